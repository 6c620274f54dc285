#pragma once

#include "reliefkit/mesh.hpp"

#include <cstdint>
#include <string>

namespace relief {

/// Procedural base surfaces with stored UVs and vertex normals.
/// kind is one of: grid, wavy-grid, cylinder, torus, sphere, folded-sheet.
/// resolution is a vertex-count target (>= 9); the actual count lands within
/// 10% for targets reachable by the surface's tessellation scheme.
/// Deterministic: same (kind, resolution) -> identical mesh.
TriangleMesh make_base_surface(const std::string& kind, std::uint32_t resolution);

/// Icosahedron subdivided `level` times and projected to the sphere.
/// V = 10*4^level + 2, F = 20*4^level.
TriangleMesh make_icosphere(std::uint32_t level, double radius);

const std::vector<std::string>& base_surface_kinds();

} // namespace relief
