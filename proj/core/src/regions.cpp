#include "reliefkit/regions.hpp"

#include "reliefkit/rng.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace relief {
namespace {

// Connected components of one region's face set; returns components sorted
// by size descending (ties by smallest face id) as lists of face ids.
std::vector<std::vector<std::uint32_t>> region_components(
    const std::vector<std::uint32_t>& region_ids, std::uint32_t region,
    const FaceAdjacencyGraph& graph) {
    const std::size_t nf = region_ids.size();
    std::vector<char> visited(nf, 0);
    std::vector<std::vector<std::uint32_t>> components;
    for (std::uint32_t f = 0; f < nf; ++f) {
        if (region_ids[f] != region || visited[f]) continue;
        std::vector<std::uint32_t> comp;
        std::deque<std::uint32_t> queue{f};
        visited[f] = 1;
        while (!queue.empty()) {
            std::uint32_t u = queue.front();
            queue.pop_front();
            comp.push_back(u);
            auto [begin, end] = graph.neighbors_of(u);
            for (const std::uint32_t* it = begin; it != end; ++it) {
                if (!visited[*it] && region_ids[*it] == region) {
                    visited[*it] = 1;
                    queue.push_back(*it);
                }
            }
        }
        components.push_back(std::move(comp));
    }
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a[0] < b[0];
              });
    return components;
}

// Merge every non-largest component of every region into the neighboring
// region most frequently adjacent to it (deterministic tie-break: lowest id).
void repair_connectivity(std::vector<std::uint32_t>& region_ids, std::uint32_t k,
                         const FaceAdjacencyGraph& graph) {
    for (std::uint32_t pass = 0; pass < 32; ++pass) {
        bool changed = false;
        for (std::uint32_t r = 0; r < k; ++r) {
            auto components = region_components(region_ids, r, graph);
            for (std::size_t c = 1; c < components.size(); ++c) {
                std::vector<std::uint32_t> votes(k, 0);
                for (std::uint32_t f : components[c]) {
                    auto [begin, end] = graph.neighbors_of(f);
                    for (const std::uint32_t* it = begin; it != end; ++it)
                        if (region_ids[*it] != r) ++votes[region_ids[*it]];
                }
                std::uint32_t target = r;
                std::uint32_t best = 0;
                for (std::uint32_t cand = 0; cand < k; ++cand) {
                    if (votes[cand] > best) {
                        best = votes[cand];
                        target = cand;
                    }
                }
                if (target != r) {
                    for (std::uint32_t f : components[c]) region_ids[f] = target;
                    changed = true;
                }
            }
        }
        if (!changed) return;
    }
}

// Reassign faces whose three vertices all touch some other region: such a
// face would never receive displacement. Moves a face to the adjacent region
// with the most shared vertices (lowest id on ties), but only when the move
// keeps the source region nonempty and connected.
void repair_pinched_faces(const TriangleMesh& mesh, std::vector<std::uint32_t>& region_ids,
                          std::uint32_t k, const FaceAdjacencyGraph& graph) {
    auto incidence = vertex_face_incidence(mesh);
    std::vector<std::uint32_t> region_sizes(k, 0);
    for (std::uint32_t r : region_ids) ++region_sizes[r];

    for (std::uint32_t pass = 0; pass < 8; ++pass) {
        bool changed = false;
        for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
            const std::uint32_t r = region_ids[f];
            std::vector<std::uint32_t> shared(k, 0);
            bool all_boundary = true;
            for (std::uint32_t v : mesh.faces[f]) {
                bool touches_other = false;
                std::vector<char> seen(k, 0);
                for (std::uint32_t g : incidence[v]) {
                    std::uint32_t rg = region_ids[g];
                    if (rg != r) touches_other = true;
                    if (!seen[rg]) {
                        seen[rg] = 1;
                        ++shared[rg];
                    }
                }
                if (!touches_other) {
                    all_boundary = false;
                    break;
                }
            }
            if (!all_boundary) continue;
            std::uint32_t target = r, best = 0;
            for (std::uint32_t cand = 0; cand < k; ++cand) {
                if (cand == r) continue;
                if (shared[cand] > best) {
                    best = shared[cand];
                    target = cand;
                }
            }
            if (target == r || region_sizes[r] <= 1) continue;
            region_ids[f] = target;
            if (region_components(region_ids, r, graph).size() != 1) {
                region_ids[f] = r;  // move would split the source region
                continue;
            }
            --region_sizes[r];
            ++region_sizes[target];
            changed = true;
        }
        if (!changed) return;
    }
}

std::vector<std::uint32_t> axis_split(const TriangleMesh& mesh, std::uint32_t k) {
    const FaceAttributes attrs = compute_face_attributes(mesh);
    const std::size_t nf = mesh.faces.size();

    Vec3 lo = attrs.centroids[0], hi = attrs.centroids[0];
    for (const Vec3& c : attrs.centroids) {
        lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
        hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
    }
    Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;

    std::vector<std::uint32_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        double ca = attrs.centroids[a][axis], cb = attrs.centroids[b][axis];
        if (ca != cb) return ca < cb;
        return a < b;
    });

    std::vector<std::uint32_t> region_ids(nf, 0);
    for (std::size_t rank = 0; rank < nf; ++rank) {
        std::uint32_t region = static_cast<std::uint32_t>(rank * k / nf);
        region_ids[order[rank]] = std::min(region, k - 1);
    }
    return region_ids;
}

std::vector<std::uint32_t> geodesic_seeds(const TriangleMesh& mesh, std::uint32_t k,
                                          std::uint64_t seed, const FaceAdjacencyGraph& graph) {
    const std::size_t nf = mesh.faces.size();
    Rng rng(seed);
    std::vector<std::uint32_t> seeds;
    seeds.push_back(static_cast<std::uint32_t>(rng.bounded(nf)));

    // Farthest-point seeding on hop distance; unreachable faces (other
    // components) have infinite distance and attract the next seed.
    std::vector<std::uint32_t> min_dist = bfs_distances(graph, seeds);
    while (seeds.size() < k) {
        std::uint32_t far_face = 0;
        std::uint32_t far_dist = 0;
        bool found = false;
        for (std::uint32_t f = 0; f < nf; ++f) {
            if (std::find(seeds.begin(), seeds.end(), f) != seeds.end()) continue;
            if (!found || min_dist[f] > far_dist) {
                far_face = f;
                far_dist = min_dist[f];
                found = true;
            }
        }
        seeds.push_back(far_face);
        std::vector<std::uint32_t> d = bfs_distances(graph, {far_face});
        for (std::size_t f = 0; f < nf; ++f) min_dist[f] = std::min(min_dist[f], d[f]);
    }

    // Every face joins its nearest seed; equal distance goes to the lowest
    // region id.
    std::vector<std::uint32_t> region_ids(nf, 0);
    std::vector<std::uint32_t> best(nf, kUnreachable);
    for (std::uint32_t r = 0; r < k; ++r) {
        std::vector<std::uint32_t> d = bfs_distances(graph, {seeds[r]});
        for (std::size_t f = 0; f < nf; ++f) {
            if (d[f] < best[f]) {
                best[f] = d[f];
                region_ids[f] = r;
            }
        }
    }
    for (std::size_t f = 0; f < nf; ++f)
        if (best[f] == kUnreachable)
            throw Error("plan_regions: mesh has more components than regions");
    return region_ids;
}

void renumber_contiguous(std::vector<std::uint32_t>& region_ids, std::uint32_t& k) {
    std::vector<std::uint32_t> remap(k, kUnreachable);
    std::uint32_t next = 0;
    for (std::uint32_t& r : region_ids) {
        if (remap[r] == kUnreachable) remap[r] = next++;
        r = remap[r];
    }
    k = next;
}

} // namespace

bool regions_connected(const RegionMask& mask, const FaceAdjacencyGraph& graph) {
    for (std::uint32_t r = 0; r < mask.region_count; ++r) {
        auto components = region_components(mask.region_ids, r, graph);
        if (components.size() != 1) return false;
    }
    return true;
}

RegionMask plan_regions(const TriangleMesh& mesh, std::uint32_t k, std::uint64_t seed,
                        RegionStrategy strategy) {
    const std::size_t nf = mesh.faces.size();
    if (k == 0 || k > nf) throw Error("plan_regions: region count out of range");

    const FaceAdjacencyGraph graph = build_face_adjacency(mesh, AdjacencyMode::VertexShared);

    std::vector<std::uint32_t> region_ids;
    if (k == 1) {
        region_ids.assign(nf, 0);
    } else if (strategy == RegionStrategy::AxisSplit) {
        region_ids = axis_split(mesh, k);
        repair_connectivity(region_ids, k, graph);
    } else {
        region_ids = geodesic_seeds(mesh, k, seed, graph);
    }

    if (k > 1) repair_pinched_faces(mesh, region_ids, k, graph);

    RegionMask mask;
    mask.region_count = k;
    mask.region_ids = std::move(region_ids);
    renumber_contiguous(mask.region_ids, mask.region_count);
    if (mask.region_count != k || !regions_connected(mask, graph))
        throw Error("plan_regions: " + std::to_string(k) +
                    " connected regions unachievable on this mesh");
    return mask;
}

} // namespace relief
