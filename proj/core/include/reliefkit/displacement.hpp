#pragma once

#include "reliefkit/heightfield.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh.hpp"
#include "reliefkit/regions.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace relief {

enum class UvMode {
    Stored,            // use the mesh's own UVs
    PlanarProjection,  // drop the thinnest bounding-box axis, normalize to [0,1]^2
    PerRegionLscm,     // flatten each region independently (regions must be disks)
};

struct ReliefSpec {
    std::vector<std::uint32_t> region_pattern;       // per region: pattern label, 0 = plain
    std::map<std::uint32_t, HeightField> patterns;   // pattern label -> field
    double amplitude = 0.0;                          // length units, >= 0
    UvMode uv_mode = UvMode::Stored;
};

struct ReliefResult {
    TriangleMesh mesh;
    PatternLabeling labeling;                 // per-face pattern label, exact by construction
    std::vector<double> vertex_blend;         // 0 on region boundaries, 1 in the interior
    std::vector<std::uint32_t> vertex_region; // region id per vertex (boundary: lowest id)
};

/// Displaces each vertex of a patterned region along its normal by
/// amplitude * blend * h(u,v). blend ramps 0 -> 1 over two vertex rings from
/// the region boundary, so patterns fade out instead of cliffing. Vertices of
/// plain regions never move; amplitude 0 returns bit-identical geometry.
ReliefResult apply_relief(const TriangleMesh& base, const RegionMask& mask,
                          const ReliefSpec& spec);

/// Blend factor per vertex: min(hop distance to a region-boundary vertex, 2) / 2.
std::vector<double> region_blend_factors(const TriangleMesh& mesh, const RegionMask& mask);

} // namespace relief
