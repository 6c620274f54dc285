#include "reliefkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace relief {

BoundingBox bounding_box(const TriangleMesh& mesh) {
    BoundingBox box;
    if (mesh.vertices.empty()) return box;
    box.min = box.max = mesh.vertices[0];
    for (const Vec3& v : mesh.vertices) {
        box.min.x = std::min(box.min.x, v.x);
        box.min.y = std::min(box.min.y, v.y);
        box.min.z = std::min(box.min.z, v.z);
        box.max.x = std::max(box.max.x, v.x);
        box.max.y = std::max(box.max.y, v.y);
        box.max.z = std::max(box.max.z, v.z);
    }
    return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

ValidationReport validate_mesh(TriangleMesh& mesh) {
    const std::size_t nv = mesh.vertices.size();
    for (const Vec3& v : mesh.vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            throw Error("mesh validation: non-finite vertex coordinate");
    }
    for (const FaceIndices& f : mesh.faces) {
        for (std::uint32_t idx : f)
            if (idx >= nv) throw Error("mesh validation: face index out of range");
    }

    const double diag = bounding_box(mesh).diagonal();
    const double threshold = 1e-12 * diag * diag;

    ValidationReport report;
    report.area_threshold = threshold;

    std::vector<FaceIndices> kept;
    kept.reserve(mesh.faces.size());
    report.kept_faces.reserve(mesh.faces.size());
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const FaceIndices& f = mesh.faces[i];
        double area = triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
        if (area > threshold) {
            kept.push_back(f);
            report.kept_faces.push_back(static_cast<std::uint32_t>(i));
        } else {
            ++report.degenerate_faces_dropped;
        }
    }
    mesh.faces = std::move(kept);

    if (!mesh.normals.empty()) {
        if (mesh.normals.size() != nv)
            throw Error("mesh validation: normal count does not match vertex count");
        for (Vec3& n : mesh.normals) {
            double len = n.norm();
            if (!std::isfinite(len) || len < 1e-12)
                throw Error("mesh validation: zero-length vertex normal");
            n = n / len;
        }
    }
    if (!mesh.uvs.empty() && mesh.uvs.size() != nv)
        throw Error("mesh validation: uv count does not match vertex count");

    return report;
}

FaceAttributes compute_face_attributes(const TriangleMesh& mesh) {
    FaceAttributes attrs;
    const std::size_t nf = mesh.faces.size();
    attrs.areas.resize(nf);
    attrs.normals.resize(nf);
    attrs.centroids.resize(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        const FaceIndices& f = mesh.faces[i];
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        Vec3 cr = (b - a).cross(c - a);
        double len = cr.norm();
        attrs.areas[i] = 0.5 * len;
        attrs.normals[i] = len > 0.0 ? cr / len : Vec3{0, 0, 0};
        attrs.centroids[i] = (a + b + c) / 3.0;
    }
    return attrs;
}

std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh, const FaceAttributes& attrs) {
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3{0, 0, 0});
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        Vec3 weighted = attrs.normals[i] * attrs.areas[i];
        for (std::uint32_t idx : mesh.faces[i]) normals[idx] += weighted;
    }
    for (Vec3& n : normals) {
        double len = n.norm();
        if (len > 0.0) n = n / len;
    }
    return normals;
}

std::vector<std::array<std::uint32_t, 2>> unique_edges(const TriangleMesh& mesh) {
    std::vector<std::array<std::uint32_t, 2>> edges;
    edges.reserve(mesh.faces.size() * 3);
    for (const FaceIndices& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            std::uint32_t a = f[k], b = f[(k + 1) % 3];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            edges.push_back({a, b});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

double mean_edge_length(const TriangleMesh& mesh) {
    if (mesh.faces.empty()) throw Error("mean_edge_length: mesh has no faces");
    auto edges = unique_edges(mesh);
    double sum = 0.0;
    for (const auto& e : edges) sum += (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    return sum / static_cast<double>(edges.size());
}

} // namespace relief
