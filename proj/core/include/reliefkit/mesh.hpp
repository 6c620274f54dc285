#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "reliefkit/vec3.hpp"

namespace relief {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using FaceIndices = std::array<std::uint32_t, 3>;

// Indexed triangle surface. Immutable once validated; every pipeline stage
// works on const references.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<FaceIndices> faces;
    std::vector<Vec3> normals;                  // per-vertex, optional
    std::vector<std::array<double, 2>> uvs;     // per-vertex, optional

    bool has_normals() const { return normals.size() == vertices.size() && !vertices.empty(); }
    bool has_uvs() const { return uvs.size() == vertices.size() && !vertices.empty(); }
    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t face_count() const { return faces.size(); }
};

struct FaceAttributes {
    std::vector<double> areas;      // strictly positive after validation
    std::vector<Vec3> normals;      // unit length, winding order of the face
    std::vector<Vec3> centroids;
};

struct ValidationReport {
    std::size_t degenerate_faces_dropped = 0;
    double area_threshold = 0.0;
    std::vector<std::uint32_t> kept_faces;  // original indices of surviving faces
};

struct BoundingBox {
    Vec3 min, max;
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return (min + max) * 0.5; }
    double diagonal() const { return extent().norm(); }
};

BoundingBox bounding_box(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Checks indices and coordinate finiteness (throws Error on violation),
/// renormalizes stored vertex normals, and drops faces whose area is at or
/// below 1e-12 * (bbox diagonal)^2. Returns the number dropped.
ValidationReport validate_mesh(TriangleMesh& mesh);

FaceAttributes compute_face_attributes(const TriangleMesh& mesh);

/// Area-weighted per-vertex normals from face geometry.
std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh, const FaceAttributes& attrs);

/// Arithmetic mean over the unique undirected edges of the face set.
/// Throws Error on a mesh with no faces.
double mean_edge_length(const TriangleMesh& mesh);

/// Unique undirected edges (v0 < v1), sorted lexicographically.
std::vector<std::array<std::uint32_t, 2>> unique_edges(const TriangleMesh& mesh);

} // namespace relief
