#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// G x G raster of per-face channel values over a patch's UV layout.
struct PatchImage {
    std::uint32_t size = 0;                       // G
    std::array<std::vector<double>, 3> channels;  // row-major, values in [0,1]
    std::vector<std::uint8_t> covered;            // per cell
    std::vector<std::uint32_t> face_of_cell;      // patch-face index, UINT32_MAX where uncovered
    std::array<bool, 3> scaling_degenerate{};     // channel had no value spread

    double coverage() const;
};

/// Rasterizes per-face channel values into a G x G grid over the patch's
/// normalized UV bounding box. A cell takes the values of the lowest-index
/// face whose UV triangle contains the cell center; channels are min-max
/// scaled to [0,1] over covered cells (flat channels become 0.5, flagged).
/// `uv` holds one coordinate pair per patch vertex, `faces` indexes into it.
/// G >= 8.
PatchImage rasterize_patch(const std::vector<std::array<double, 2>>& uv,
                           const std::vector<std::array<std::uint32_t, 3>>& faces,
                           const std::vector<std::array<double, 3>>& face_channels,
                           std::uint32_t grid_size);

/// Inclusive point-in-triangle test shared by the rasterizer and its tests.
bool uv_triangle_contains(const std::array<double, 2>& a, const std::array<double, 2>& b,
                          const std::array<double, 2>& c, double px, double py);

/// Debug export: one PGM per channel, uncovered cells black.
void save_patch_image_pgm(const std::string& path_prefix, const PatchImage& image);

} // namespace relief
