#pragma once

#include "reliefkit/adjacency.hpp"
#include "reliefkit/mesh.hpp"

#include <cstdint>
#include <vector>

namespace relief {

enum class RegionStrategy {
    AxisSplit,      // contiguous slabs along the dominant centroid axis
    GeodesicSeeds,  // nearest farthest-point seed by face-graph hop distance
};

struct RegionMask {
    std::vector<std::uint32_t> region_ids;  // one per face, contiguous from 0
    std::uint32_t region_count = 0;
};

/// Partitions faces into exactly k nonempty regions, each connected under
/// vertex-shared adjacency. Faces whose three vertices all touch another
/// region are reassigned so every region keeps a displaceable interior.
/// Deterministic per seed. Throws if k connected regions are unachievable.
RegionMask plan_regions(const TriangleMesh& mesh, std::uint32_t k, std::uint64_t seed,
                        RegionStrategy strategy = RegionStrategy::GeodesicSeeds);

/// True iff every region id in [0, region_count) is nonempty and connected
/// under the given adjacency graph.
bool regions_connected(const RegionMask& mask, const FaceAdjacencyGraph& graph);

} // namespace relief
