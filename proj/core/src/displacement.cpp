#include "reliefkit/displacement.hpp"

#include "reliefkit/adjacency.hpp"
#include "reliefkit/lscm.hpp"

#include <algorithm>
#include <deque>

namespace relief {
namespace {

// Hop distance over the vertex graph from a seed set (kUnreachable if cut off).
std::vector<std::uint32_t> vertex_bfs(const TriangleMesh& mesh,
                                      const std::vector<char>& is_seed) {
    std::vector<std::vector<std::uint32_t>> adj(mesh.vertices.size());
    for (const auto& e : unique_edges(mesh)) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    std::vector<std::uint32_t> dist(mesh.vertices.size(), kUnreachable);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t v = 0; v < is_seed.size(); ++v) {
        if (is_seed[v]) {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t w : adj[u]) {
            if (dist[w] == kUnreachable) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

std::vector<std::array<double, 2>> planar_projection_uvs(const TriangleMesh& mesh) {
    BoundingBox box = bounding_box(mesh);
    Vec3 extent = box.extent();
    // Drop the thinnest axis; the remaining two become (u, v).
    int drop = 0;
    if (extent.y < extent[drop]) drop = 1;
    if (extent.z < extent[drop]) drop = 2;
    int ua = drop == 0 ? 1 : 0;
    int va = drop == 2 ? 1 : 2;
    double su = extent[ua] > 0 ? 1.0 / extent[ua] : 1.0;
    double sv = extent[va] > 0 ? 1.0 / extent[va] : 1.0;
    std::vector<std::array<double, 2>> uvs(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        uvs[i] = {(p[ua] - box.min[ua]) * su, (p[va] - box.min[va]) * sv};
    }
    return uvs;
}

// Flatten each region with LSCM and normalize its UV bounding box to [0,1]^2
// so pattern frequency reads the same on every region.
std::vector<std::array<double, 2>> per_region_lscm_uvs(const TriangleMesh& mesh,
                                                       const RegionMask& mask) {
    std::vector<std::array<double, 2>> uvs(mesh.vertices.size(), {0.0, 0.0});
    for (std::uint32_t r = 0; r < mask.region_count; ++r) {
        std::vector<std::uint32_t> patch;
        for (std::uint32_t f = 0; f < mask.region_ids.size(); ++f)
            if (mask.region_ids[f] == r) patch.push_back(f);
        LscmResult flat = lscm_flatten(mesh, patch);
        double ulo = 1e300, uhi = -1e300, vlo = 1e300, vhi = -1e300;
        for (std::size_t i = 0; i < flat.patch_vertices.size(); ++i) {
            ulo = std::min(ulo, flat.uvs[i][0]);
            uhi = std::max(uhi, flat.uvs[i][0]);
            vlo = std::min(vlo, flat.uvs[i][1]);
            vhi = std::max(vhi, flat.uvs[i][1]);
        }
        double su = uhi > ulo ? 1.0 / (uhi - ulo) : 1.0;
        double sv = vhi > vlo ? 1.0 / (vhi - vlo) : 1.0;
        for (std::size_t i = 0; i < flat.patch_vertices.size(); ++i) {
            // Interior vertices belong to exactly one region; boundary
            // vertices have blend 0, so overwrites there are harmless.
            uvs[flat.patch_vertices[i]] = {(flat.uvs[i][0] - ulo) * su,
                                           (flat.uvs[i][1] - vlo) * sv};
        }
    }
    return uvs;
}

} // namespace

std::vector<double> region_blend_factors(const TriangleMesh& mesh, const RegionMask& mask) {
    // A vertex is on the region boundary iff its incident faces span more
    // than one region.
    auto incidence = vertex_face_incidence(mesh);
    std::vector<char> boundary(mesh.vertices.size(), 0);
    for (std::uint32_t v = 0; v < mesh.vertices.size(); ++v) {
        std::uint32_t first = kUnreachable;
        for (std::uint32_t f : incidence[v]) {
            if (first == kUnreachable) {
                first = mask.region_ids[f];
            } else if (mask.region_ids[f] != first) {
                boundary[v] = 1;
                break;
            }
        }
    }
    std::vector<double> blend(mesh.vertices.size(), 1.0);
    bool any_boundary = std::find(boundary.begin(), boundary.end(), 1) != boundary.end();
    if (!any_boundary) return blend;  // single effective region: full displacement

    std::vector<std::uint32_t> dist = vertex_bfs(mesh, boundary);
    for (std::size_t v = 0; v < blend.size(); ++v) {
        std::uint32_t d = dist[v] == kUnreachable ? 2 : std::min<std::uint32_t>(dist[v], 2);
        blend[v] = static_cast<double>(d) / 2.0;
    }
    return blend;
}

ReliefResult apply_relief(const TriangleMesh& base, const RegionMask& mask,
                          const ReliefSpec& spec) {
    if (mask.region_ids.size() != base.faces.size())
        throw Error("apply_relief: region mask does not match face count");
    if (spec.amplitude < 0) throw Error("apply_relief: amplitude must be nonnegative");
    for (std::uint32_t r = 0; r < mask.region_count; ++r) {
        if (r >= spec.region_pattern.size())
            throw Error("apply_relief: region " + std::to_string(r) + " missing from assignment");
        std::uint32_t pattern = spec.region_pattern[r];
        if (pattern != 0 && spec.patterns.find(pattern) == spec.patterns.end())
            throw Error("apply_relief: pattern " + std::to_string(pattern) + " has no heightfield");
    }
    if (spec.uv_mode == UvMode::Stored && !base.has_uvs())
        throw Error("apply_relief: stored UV mode requires mesh UVs");

    ReliefResult result;
    result.mesh = base;

    // Per-face labels come straight from the region assignment: ground truth
    // by construction.
    result.labeling.labels.resize(base.faces.size());
    for (std::size_t f = 0; f < base.faces.size(); ++f)
        result.labeling.labels[f] = spec.region_pattern[mask.region_ids[f]];

    // Vertex -> region (interior vertices have exactly one; boundary vertices
    // take the lowest incident id, irrelevant because their blend is 0).
    auto incidence = vertex_face_incidence(base);
    result.vertex_region.assign(base.vertices.size(), 0);
    for (std::uint32_t v = 0; v < base.vertices.size(); ++v) {
        std::uint32_t best = kUnreachable;
        for (std::uint32_t f : incidence[v]) best = std::min(best, mask.region_ids[f]);
        result.vertex_region[v] = best == kUnreachable ? 0 : best;
    }

    result.vertex_blend = region_blend_factors(base, mask);

    if (spec.amplitude == 0.0) return result;  // bit-identical geometry

    std::vector<Vec3> normals =
        base.has_normals() ? base.normals
                           : compute_vertex_normals(base, compute_face_attributes(base));

    std::vector<std::array<double, 2>> uvs;
    switch (spec.uv_mode) {
        case UvMode::Stored: uvs = base.uvs; break;
        case UvMode::PlanarProjection: uvs = planar_projection_uvs(base); break;
        case UvMode::PerRegionLscm: uvs = per_region_lscm_uvs(base, mask); break;
    }

    bool moved = false;
    for (std::uint32_t v = 0; v < base.vertices.size(); ++v) {
        double blend = result.vertex_blend[v];
        if (blend <= 0.0) continue;
        std::uint32_t pattern = spec.region_pattern[result.vertex_region[v]];
        if (pattern == 0) continue;
        const HeightField& field = spec.patterns.at(pattern);
        double offset = spec.amplitude * blend * field.sample(uvs[v][0], uvs[v][1]);
        if (offset != 0.0) {
            result.mesh.vertices[v] += offset * normals[v];
            moved = true;
        }
    }

    if (moved)
        result.mesh.normals =
            compute_vertex_normals(result.mesh, compute_face_attributes(result.mesh));
    return result;
}

} // namespace relief
