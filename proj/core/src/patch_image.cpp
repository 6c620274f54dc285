#include "reliefkit/patch_image.hpp"

#include "reliefkit/heightfield.hpp"
#include "reliefkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace relief {

namespace {

double edge_side(const std::array<double, 2>& a, const std::array<double, 2>& b, double px,
                 double py) {
    return (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
}

} // namespace

double PatchImage::coverage() const {
    if (covered.empty()) {
        return 0.0;
    }
    std::size_t hit = 0;
    for (std::uint8_t c : covered) {
        hit += c ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(covered.size());
}

bool uv_triangle_contains(const std::array<double, 2>& a, const std::array<double, 2>& b,
                          const std::array<double, 2>& c, double px, double py) {
    const double d0 = edge_side(a, b, px, py);
    const double d1 = edge_side(b, c, px, py);
    const double d2 = edge_side(c, a, px, py);
    const bool any_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
    const bool any_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
    // Inclusive of edges and vertices; handles either triangle winding.
    return !(any_neg && any_pos);
}

PatchImage rasterize_patch(const std::vector<std::array<double, 2>>& uv,
                           const std::vector<std::array<std::uint32_t, 3>>& faces,
                           const std::vector<std::array<double, 3>>& face_channels,
                           std::uint32_t grid_size) {
    if (faces.empty()) {
        throw Error("rasterize_patch: empty patch");
    }
    if (face_channels.size() != faces.size()) {
        throw Error("rasterize_patch: per-face channel count does not match face count");
    }
    if (grid_size < 8) {
        throw Error("rasterize_patch: grid size must be at least 8");
    }
    for (const auto& f : faces) {
        for (std::uint32_t v : f) {
            if (v >= uv.size()) {
                throw Error("rasterize_patch: face references vertex outside the uv map");
            }
        }
    }

    // Normalize the patch's UV bounding box to the unit square.
    double min_u = std::numeric_limits<double>::infinity();
    double min_v = std::numeric_limits<double>::infinity();
    double max_u = -std::numeric_limits<double>::infinity();
    double max_v = -std::numeric_limits<double>::infinity();
    for (const auto& f : faces) {
        for (std::uint32_t v : f) {
            min_u = std::min(min_u, uv[v][0]);
            max_u = std::max(max_u, uv[v][0]);
            min_v = std::min(min_v, uv[v][1]);
            max_v = std::max(max_v, uv[v][1]);
        }
    }
    const double span_u = max_u - min_u;
    const double span_v = max_v - min_v;
    const double scale_u = span_u > 0.0 ? 1.0 / span_u : 0.0;
    const double scale_v = span_v > 0.0 ? 1.0 / span_v : 0.0;
    auto normalized = [&](std::uint32_t v) {
        return std::array<double, 2>{(uv[v][0] - min_u) * scale_u, (uv[v][1] - min_v) * scale_v};
    };

    const std::uint32_t g = grid_size;
    PatchImage image;
    image.size = g;
    const std::size_t cells = static_cast<std::size_t>(g) * g;
    for (auto& channel : image.channels) {
        channel.assign(cells, 0.0);
    }
    image.covered.assign(cells, 0);
    image.face_of_cell.assign(cells, std::numeric_limits<std::uint32_t>::max());

    // Rasterize each face over its cell-bounding box; a cell keeps the
    // lowest face index among faces containing its center.
    const double cell = 1.0 / static_cast<double>(g);
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const auto pa = normalized(faces[fi][0]);
        const auto pb = normalized(faces[fi][1]);
        const auto pc = normalized(faces[fi][2]);
        const double fmin_u = std::min({pa[0], pb[0], pc[0]});
        const double fmax_u = std::max({pa[0], pb[0], pc[0]});
        const double fmin_v = std::min({pa[1], pb[1], pc[1]});
        const double fmax_v = std::max({pa[1], pb[1], pc[1]});
        // Cell centers are at (col + 0.5) / g; cover the closed bbox.
        const auto first_index = [&](double lo) {
            const long idx = static_cast<long>(std::floor(lo * g - 0.5));
            return static_cast<std::uint32_t>(std::clamp(idx, 0L, static_cast<long>(g) - 1));
        };
        const auto last_index = [&](double hi) {
            const long idx = static_cast<long>(std::ceil(hi * g - 0.5));
            return static_cast<std::uint32_t>(std::clamp(idx, 0L, static_cast<long>(g) - 1));
        };
        const std::uint32_t col0 = first_index(fmin_u);
        const std::uint32_t col1 = last_index(fmax_u);
        const std::uint32_t row0 = first_index(fmin_v);
        const std::uint32_t row1 = last_index(fmax_v);
        for (std::uint32_t row = row0; row <= row1; ++row) {
            const double py = (row + 0.5) * cell;
            for (std::uint32_t col = col0; col <= col1; ++col) {
                const std::size_t idx = static_cast<std::size_t>(row) * g + col;
                if (image.face_of_cell[idx] <= fi) {
                    continue; // already claimed by a lower face index
                }
                const double px = (col + 0.5) * cell;
                if (uv_triangle_contains(pa, pb, pc, px, py)) {
                    image.face_of_cell[idx] = static_cast<std::uint32_t>(fi);
                    image.covered[idx] = 1;
                }
            }
        }
    }

    // Fill channel values, then min-max scale each channel over covered cells.
    for (int ch = 0; ch < 3; ++ch) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t idx = 0; idx < cells; ++idx) {
            if (!image.covered[idx]) {
                continue;
            }
            const double value = face_channels[image.face_of_cell[idx]][ch];
            image.channels[ch][idx] = value;
            lo = std::min(lo, value);
            hi = std::max(hi, value);
        }
        const double span = hi - lo;
        const bool degenerate = !(span > 0.0);
        image.scaling_degenerate[static_cast<std::size_t>(ch)] = degenerate;
        for (std::size_t idx = 0; idx < cells; ++idx) {
            if (!image.covered[idx]) {
                image.channels[ch][idx] = 0.0;
                continue;
            }
            image.channels[ch][idx] =
                degenerate ? 0.5 : (image.channels[ch][idx] - lo) / span;
        }
    }
    return image;
}

void save_patch_image_pgm(const std::string& path_prefix, const PatchImage& image) {
    for (int ch = 0; ch < 3; ++ch) {
        save_pgm(path_prefix + "_c" + std::to_string(ch) + ".pgm", image.size, image.size,
                 image.channels[static_cast<std::size_t>(ch)]);
    }
}

} // namespace relief
