#pragma once

#include "reliefkit/mesh.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace relief {

struct LscmResult {
    std::vector<std::uint32_t> patch_vertices;      // mesh vertex ids, ascending
    std::vector<std::array<double, 2>> uvs;         // parallel to patch_vertices
    std::array<std::uint32_t, 2> pinned;            // mesh vertex ids pinned to (0,0), (1,0)
    double energy = 0.0;                            // conformal energy of the result
    double initial_energy = 0.0;                    // energy of the aligned planar-projection guess
    double relative_residual = 0.0;                 // of the least-squares normal equations
    std::uint32_t flipped_faces = 0;                // faces with negative UV area
};

/// Least-squares conformal flattening of an edge-connected disk patch
/// (checked: connected, manifold edges, V - E + F == 1). The two pins are the
/// farthest boundary vertex pair by hop distance in the patch graph,
/// placed at (0,0) and (1,0). Throws Error("non-disk patch") otherwise and
/// Error on solver failure (relative residual >= 1e-8).
LscmResult lscm_flatten(const TriangleMesh& mesh, const std::vector<std::uint32_t>& patch_faces);

/// Conformal energy of an arbitrary UV assignment over the same patch;
/// uv is parallel to patch_vertices ordering (ascending mesh vertex id).
double conformal_energy(const TriangleMesh& mesh, const std::vector<std::uint32_t>& patch_faces,
                        const std::vector<std::array<double, 2>>& uv);

} // namespace relief
