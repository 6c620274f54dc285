#pragma once

#include "reliefkit/adjacency.hpp"
#include "reliefkit/mesh.hpp"
#include "reliefkit/spatial_grid.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace relief {

struct NeighborhoodParams {
    double radius_multiplier = 3.0;   // initial radius = multiplier * mean edge length
    std::uint32_t max_neighbors = 200;
    double shrink_factor = 0.75;      // radius scale per shrink attempt
    std::uint32_t max_attempts = 20;

    void validate() const;
};

struct Neighborhood {
    std::vector<std::uint32_t> faces;  // ascending, seed included
    double radius = 0.0;               // final accepted radius
    std::uint32_t attempts = 0;        // shrinks performed
    bool ring_fallback = false;        // 1-ring taken because shrinking never fit
};

// Five per-face channels. All derive from the neighborhood only, so they are
// invariant to mesh size and rigid motion.
struct FaceDescriptor {
    double depth = 0.0;              // signed centroid distance to the fitted plane
    double log_area = 0.0;           // log(face area / neighborhood mean area)
    double surface_variation = 0.0;  // lambda0 / (lambda0+lambda1+lambda2), in [0, 1/3]
    double curvature = 0.0;          // area-weighted mean dihedral deviation, radians
    double normal_deviation = 0.0;   // angle(face normal, neighborhood mean normal)
    bool degenerate_pca = false;     // centroids collinear; depth measured along the line

    static constexpr int kChannels = 5;
    double channel(int i) const {
        switch (i) {
            case 0: return depth;
            case 1: return log_area;
            case 2: return surface_variation;
            case 3: return curvature;
            default: return normal_deviation;
        }
    }
    void set_channel(int i, double v) {
        switch (i) {
            case 0: depth = v; break;
            case 1: log_area = v; break;
            case 2: surface_variation = v; break;
            case 3: curvature = v; break;
            default: normal_deviation = v; break;
        }
    }
};

struct ChannelStats {
    std::array<double, FaceDescriptor::kChannels> mean{};
    std::array<double, FaceDescriptor::kChannels> stdev{};  // population
    std::array<bool, FaceDescriptor::kChannels> zero_variance{};
};

/// Faces whose centroids lie within a shrinking radius of the seed centroid.
/// Starts at radius_multiplier * mean_edge, multiplies by shrink_factor while
/// the count exceeds max_neighbors (up to max_attempts); falls back to the
/// seed's 1-ring when shrinking never fits. The grid must be built over face
/// centroids with cell size >= the initial radius.
Neighborhood collect_neighborhood(const FaceAttributes& attrs, const SpatialGrid& grid,
                                  const FaceAdjacencyGraph& graph, std::uint32_t face,
                                  double mean_edge, const NeighborhoodParams& params = {});

FaceDescriptor face_descriptor(const TriangleMesh& mesh, const FaceAttributes& attrs,
                               const FaceAdjacencyGraph& edge_graph, std::uint32_t face,
                               const std::vector<std::uint32_t>& neighborhood);

/// Mean dihedral deviation (angle between face normals) of a face against its
/// edge-adjacent neighbors; 0 for isolated faces.
double face_curvature(const FaceAttributes& attrs, const FaceAdjacencyGraph& edge_graph,
                      std::uint32_t face);

/// Per-channel z-score over the given population (in place). Channels with
/// (near-)zero variance pass through as 0 and are flagged. Needs >= 2 rows.
ChannelStats normalize_bank(std::vector<FaceDescriptor>& descriptors);

/// Apply previously computed stats to one descriptor.
FaceDescriptor apply_normalization(const FaceDescriptor& d, const ChannelStats& stats);

} // namespace relief
