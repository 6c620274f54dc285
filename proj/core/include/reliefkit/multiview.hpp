#pragma once

#include "reliefkit/mesh.hpp"
#include "reliefkit/signature.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// Fixed axis-aligned orthographic views, in descriptor block order.
enum class ViewId : std::uint8_t { PosX = 0, NegX, PosY, NegY, PosZ, NegZ };

// Orthographic depth rendering over the frame [-0.5, 0.5]^2. Depth is the
// distance from the view's near plane (the bounding-cube face the camera
// looks through), quantized to steps of 1/65535; background pixels are
// flagged and hold depth 0.
struct DepthImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<double> depth;             // row-major, row 0 at the top
    std::vector<std::uint8_t> foreground;  // 1 where a face covers the pixel
    ViewId view = ViewId::PosX;

    double silhouette_fraction() const;
};

/// Recentres the mesh on the origin and scales the longest bounding-box edge
/// to 1, so every vertex fits in [-0.5, 0.5]^3. Axes are left as authored.
TriangleMesh normalize_to_unit_cube(const TriangleMesh& mesh);

/// Software z-buffer rasterization of a unit-cube-normalized mesh. Pixel
/// centers sample interpolated face depth; the nearest face wins, exact ties
/// keeping the lowest face id. Deterministic.
DepthImage render_orthographic(const TriangleMesh& mesh, ViewId view, std::uint32_t width,
                               std::uint32_t height);

/// Unit-cube normalization followed by all six axis views at a square
/// resolution.
std::array<DepthImage, 6> render_views(const TriangleMesh& mesh, std::uint32_t resolution);

// Per-view descriptor blocks. Histogram blocks sum to 1 over the pixels they
// count; the variance pyramid keeps raw depth-variance units.
inline constexpr std::size_t kGradientBins = 16;  // bin 0 = zero gradient
inline constexpr std::size_t kLbpBins = 59;       // 58 uniform codes + 1 catch-all
inline constexpr std::size_t kPyramidLevels = 4;  // 1,4,16,64-block mean variances
inline constexpr std::size_t kViewDescriptorSize =
    6 * (kGradientBins + kLbpBins + kPyramidLevels);

std::array<double, kGradientBins> gradient_orientation_histogram(const DepthImage& image);
std::array<double, kLbpBins> lbp_histogram(const DepthImage& image);
std::array<double, kPyramidLevels> depth_variance_pyramid(const DepthImage& image);

/// Concatenation of the three blocks for the six views, in ViewId order.
std::vector<double> view_descriptor(const std::array<DepthImage, 6>& views);

/// Complement of the normalized Euclidean distance, clamped to [0,1].
double multiview_score(const std::vector<double>& a, const std::vector<double>& b, double d_max);

/// 99.5th percentile (nearest-rank) of pairwise descriptor distances over a
/// corpus; frozen by the caller so scores are comparable across runs.
double multiview_normalization_diameter(const std::vector<std::vector<double>>& descriptors);

/// Pairwise multiview_score grid in the retrieval membership format.
MembershipMatrix multiview_membership(const std::vector<std::string>& query_ids,
                                      const std::vector<std::vector<double>>& query_descriptors,
                                      const std::vector<std::string>& target_ids,
                                      const std::vector<std::vector<double>>& target_descriptors,
                                      double d_max);

/// Debug export: 16-bit PGM, quantized depth, background black.
void save_depth_pgm(const std::string& path, const DepthImage& image);

} // namespace relief
