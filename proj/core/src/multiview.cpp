#include "reliefkit/multiview.hpp"

#include "reliefkit/heightfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relief {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ViewFrame {
    Vec3 right;
    Vec3 up;
    Vec3 forward;  // into the scene
};

const ViewFrame& frame_of(ViewId view) {
    static const std::array<ViewFrame, 6> kFrames = {{
        {{0, -1, 0}, {0, 0, 1}, {-1, 0, 0}},  // +X
        {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}},    // -X
        {{1, 0, 0}, {0, 0, 1}, {0, -1, 0}},   // +Y
        {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},   // -Y
        {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}},   // +Z
        {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}},   // -Z
    }};
    return kFrames[static_cast<std::size_t>(view)];
}

constexpr double kDepthStep = 1.0 / 65535.0;

double quantize_depth(double depth) {
    return std::round(depth * 65535.0) * kDepthStep;
}

// 58 rotation-closed 8-bit codes with at most two circular bit transitions,
// plus one catch-all bin for everything else.
const std::array<std::uint8_t, 256>& lbp_bin_table() {
    static const std::array<std::uint8_t, 256> table = [] {
        std::array<std::uint8_t, 256> t{};
        std::uint8_t next = 0;
        for (int code = 0; code < 256; ++code) {
            int transitions = 0;
            for (int bit = 0; bit < 8; ++bit) {
                const int a = (code >> bit) & 1;
                const int b = (code >> ((bit + 1) % 8)) & 1;
                transitions += a != b;
            }
            t[static_cast<std::size_t>(code)] =
                transitions <= 2 ? next++ : static_cast<std::uint8_t>(kLbpBins - 1);
        }
        return t;
    }();
    return table;
}

} // namespace

double DepthImage::silhouette_fraction() const {
    if (foreground.empty()) {
        return 0.0;
    }
    std::size_t hit = 0;
    for (std::uint8_t f : foreground) {
        hit += f ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(foreground.size());
}

TriangleMesh normalize_to_unit_cube(const TriangleMesh& mesh) {
    if (mesh.vertices.empty() || mesh.faces.empty()) {
        throw Error("normalize: empty mesh");
    }
    const BoundingBox box = bounding_box(mesh);
    const Vec3 extent = box.extent();
    const double longest = std::max({extent.x, extent.y, extent.z});
    if (!(longest > 0.0)) {
        throw Error("normalize: mesh has zero extent");
    }
    const Vec3 center = box.center();
    const double scale = 1.0 / longest;
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) {
        v = (v - center) * scale;
    }
    return out;
}

DepthImage render_orthographic(const TriangleMesh& mesh, ViewId view, std::uint32_t width,
                               std::uint32_t height) {
    if (mesh.vertices.empty() || mesh.faces.empty()) {
        throw Error("render: empty mesh");
    }
    if (width == 0 || height == 0) {
        throw Error("render: resolution must be positive");
    }
    const ViewFrame& frame = frame_of(view);

    // Project every vertex to (s, t, depth) in view coordinates.
    std::vector<std::array<double, 3>> projected(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        projected[i] = {p.dot(frame.right), p.dot(frame.up), 0.5 + p.dot(frame.forward)};
    }

    DepthImage image;
    image.width = width;
    image.height = height;
    image.view = view;
    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    image.depth.assign(pixels, std::numeric_limits<double>::infinity());
    image.foreground.assign(pixels, 0);

    const double w = static_cast<double>(width);
    const double h = static_cast<double>(height);
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const auto& f = mesh.faces[fi];
        const auto& a = projected[f[0]];
        const auto& b = projected[f[1]];
        const auto& c = projected[f[2]];
        // Signed area of the projected triangle; edge-on faces contribute no
        // pixels of their own.
        const double area2 =
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (area2 == 0.0) {
            continue;
        }
        const double min_s = std::min({a[0], b[0], c[0]});
        const double max_s = std::max({a[0], b[0], c[0]});
        const double min_t = std::min({a[1], b[1], c[1]});
        const double max_t = std::max({a[1], b[1], c[1]});
        // Pixel (row, col) centers: s = (col + 0.5)/w - 0.5, t = 0.5 - (row + 0.5)/h.
        const long col0 = std::clamp(static_cast<long>(std::floor((min_s + 0.5) * w - 0.5)), 0L,
                                     static_cast<long>(width) - 1);
        const long col1 = std::clamp(static_cast<long>(std::ceil((max_s + 0.5) * w - 0.5)), 0L,
                                     static_cast<long>(width) - 1);
        const long row0 = std::clamp(static_cast<long>(std::floor((0.5 - max_t) * h - 0.5)), 0L,
                                     static_cast<long>(height) - 1);
        const long row1 = std::clamp(static_cast<long>(std::ceil((0.5 - min_t) * h - 0.5)), 0L,
                                     static_cast<long>(height) - 1);
        const double inv_area2 = 1.0 / area2;
        for (long row = row0; row <= row1; ++row) {
            const double t = 0.5 - (static_cast<double>(row) + 0.5) / h;
            for (long col = col0; col <= col1; ++col) {
                const double s = (static_cast<double>(col) + 0.5) / w - 0.5;
                const double w0 = ((b[0] - s) * (c[1] - t) - (b[1] - t) * (c[0] - s)) * inv_area2;
                const double w1 = ((c[0] - s) * (a[1] - t) - (c[1] - t) * (a[0] - s)) * inv_area2;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) {
                    continue;
                }
                const double depth = w0 * a[2] + w1 * b[2] + w2 * c[2];
                const std::size_t idx =
                    static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col);
                // Strict comparison keeps the lowest face id on exact ties.
                if (depth < image.depth[idx]) {
                    image.depth[idx] = depth;
                    image.foreground[idx] = 1;
                }
            }
        }
    }

    for (std::size_t idx = 0; idx < pixels; ++idx) {
        image.depth[idx] = image.foreground[idx] ? quantize_depth(image.depth[idx]) : 0.0;
    }
    return image;
}

std::array<DepthImage, 6> render_views(const TriangleMesh& mesh, std::uint32_t resolution) {
    const TriangleMesh normalized = normalize_to_unit_cube(mesh);
    std::array<DepthImage, 6> views;
    for (std::size_t v = 0; v < 6; ++v) {
        views[v] = render_orthographic(normalized, static_cast<ViewId>(v), resolution, resolution);
    }
    return views;
}

std::array<double, kGradientBins> gradient_orientation_histogram(const DepthImage& image) {
    std::array<double, kGradientBins> hist{};
    std::size_t counted = 0;
    const std::uint32_t w = image.width;
    const std::uint32_t h = image.height;
    for (std::uint32_t row = 0; row < h; ++row) {
        for (std::uint32_t col = 0; col < w; ++col) {
            const std::size_t idx = static_cast<std::size_t>(row) * w + col;
            if (!image.foreground[idx]) {
                continue;
            }
            if (col == 0 || col + 1 >= w || row == 0 || row + 1 >= h) {
                continue;
            }
            const std::size_t left = idx - 1, right = idx + 1, up = idx - w, down = idx + w;
            if (!image.foreground[left] || !image.foreground[right] || !image.foreground[up] ||
                !image.foreground[down]) {
                continue;
            }
            const double gx = (image.depth[right] - image.depth[left]) * 0.5;
            const double gy = (image.depth[down] - image.depth[up]) * 0.5;
            ++counted;
            if (gx == 0.0 && gy == 0.0) {
                hist[0] += 1.0;
                continue;
            }
            const double angle = std::atan2(gy, gx);  // [-pi, pi]
            const double unit = (angle + kPi) / (2.0 * kPi);
            std::size_t bin = 1 + std::min<std::size_t>(
                                      static_cast<std::size_t>(unit * (kGradientBins - 1)),
                                      kGradientBins - 2);
            hist[bin] += 1.0;
        }
    }
    if (counted == 0) {
        hist[0] = 1.0;  // no measurable gradients
        return hist;
    }
    for (double& v : hist) {
        v /= static_cast<double>(counted);
    }
    return hist;
}

std::array<double, kLbpBins> lbp_histogram(const DepthImage& image) {
    // Neighbor ring, counterclockwise from east, as (row offset, col offset).
    static constexpr std::array<std::array<int, 2>, 8> kRing = {{
        {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1},
    }};
    std::array<double, kLbpBins> hist{};
    std::size_t counted = 0;
    const std::uint32_t w = image.width;
    const std::uint32_t h = image.height;
    for (std::uint32_t row = 0; row < h; ++row) {
        for (std::uint32_t col = 0; col < w; ++col) {
            const std::size_t idx = static_cast<std::size_t>(row) * w + col;
            if (!image.foreground[idx] || col == 0 || col + 1 >= w || row == 0 || row + 1 >= h) {
                continue;
            }
            int code = 0;
            bool valid = true;
            for (std::size_t k = 0; k < kRing.size(); ++k) {
                const std::size_t nidx =
                    static_cast<std::size_t>(static_cast<long>(row) + kRing[k][0]) * w +
                    static_cast<std::size_t>(static_cast<long>(col) + kRing[k][1]);
                if (!image.foreground[nidx]) {
                    valid = false;
                    break;
                }
                if (image.depth[nidx] >= image.depth[idx]) {
                    code |= 1 << k;
                }
            }
            if (!valid) {
                continue;
            }
            ++counted;
            hist[lbp_bin_table()[static_cast<std::size_t>(code)]] += 1.0;
        }
    }
    if (counted == 0) {
        hist[kLbpBins - 1] = 1.0;
        return hist;
    }
    for (double& v : hist) {
        v /= static_cast<double>(counted);
    }
    return hist;
}

std::array<double, kPyramidLevels> depth_variance_pyramid(const DepthImage& image) {
    std::array<double, kPyramidLevels> pyramid{};
    for (std::size_t level = 0; level < kPyramidLevels; ++level) {
        const std::uint32_t blocks = 1u << level;  // per axis
        double level_sum = 0.0;
        for (std::uint32_t brow = 0; brow < blocks; ++brow) {
            for (std::uint32_t bcol = 0; bcol < blocks; ++bcol) {
                const std::uint32_t row0 = image.height * brow / blocks;
                const std::uint32_t row1 = image.height * (brow + 1) / blocks;
                const std::uint32_t col0 = image.width * bcol / blocks;
                const std::uint32_t col1 = image.width * (bcol + 1) / blocks;
                double sum = 0.0, sum2 = 0.0;
                std::size_t n = 0;
                for (std::uint32_t row = row0; row < row1; ++row) {
                    for (std::uint32_t col = col0; col < col1; ++col) {
                        const std::size_t idx = static_cast<std::size_t>(row) * image.width + col;
                        if (!image.foreground[idx]) {
                            continue;
                        }
                        sum += image.depth[idx];
                        sum2 += image.depth[idx] * image.depth[idx];
                        ++n;
                    }
                }
                if (n >= 2) {
                    const double mean = sum / static_cast<double>(n);
                    level_sum += std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
                }
            }
        }
        pyramid[level] = level_sum / static_cast<double>(blocks * blocks);
    }
    return pyramid;
}

std::vector<double> view_descriptor(const std::array<DepthImage, 6>& views) {
    for (const DepthImage& v : views) {
        if (v.width != views[0].width || v.height != views[0].height) {
            throw Error("view descriptor: views have mismatched resolutions");
        }
        if (v.width == 0) {
            throw Error("view descriptor: empty view");
        }
    }
    std::vector<double> descriptor;
    descriptor.reserve(kViewDescriptorSize);
    for (const DepthImage& v : views) {
        const auto grad = gradient_orientation_histogram(v);
        descriptor.insert(descriptor.end(), grad.begin(), grad.end());
        const auto lbp = lbp_histogram(v);
        descriptor.insert(descriptor.end(), lbp.begin(), lbp.end());
        const auto pyr = depth_variance_pyramid(v);
        descriptor.insert(descriptor.end(), pyr.begin(), pyr.end());
    }
    return descriptor;
}

double multiview_score(const std::vector<double>& a, const std::vector<double>& b, double d_max) {
    if (a.size() != b.size()) {
        throw Error("multiview: descriptor dimensions differ");
    }
    if (!(d_max > 0.0)) {
        throw Error("multiview: normalization diameter must be positive");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    const double score = 1.0 - std::sqrt(sum) / d_max;
    return score < 0.0 ? 0.0 : (score > 1.0 ? 1.0 : score);
}

double multiview_normalization_diameter(const std::vector<std::vector<double>>& descriptors) {
    if (descriptors.size() < 2) {
        throw Error("multiview normalization: need at least two descriptors");
    }
    std::vector<double> distances;
    distances.reserve(descriptors.size() * (descriptors.size() - 1) / 2);
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        for (std::size_t j = i + 1; j < descriptors.size(); ++j) {
            if (descriptors[i].size() != descriptors[j].size()) {
                throw Error("multiview normalization: descriptor dimensions differ");
            }
            double sum = 0.0;
            for (std::size_t k = 0; k < descriptors[i].size(); ++k) {
                const double d = descriptors[i][k] - descriptors[j][k];
                sum += d * d;
            }
            distances.push_back(std::sqrt(sum));
        }
    }
    std::sort(distances.begin(), distances.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.995 * static_cast<double>(distances.size())));
    const double d_max =
        distances[std::min(distances.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
    if (!(d_max > 0.0)) {
        throw Error("multiview normalization: zero diameter (all descriptors coincide)");
    }
    return d_max;
}

MembershipMatrix multiview_membership(const std::vector<std::string>& query_ids,
                                      const std::vector<std::vector<double>>& query_descriptors,
                                      const std::vector<std::string>& target_ids,
                                      const std::vector<std::vector<double>>& target_descriptors,
                                      double d_max) {
    if (query_ids.size() != query_descriptors.size() ||
        target_ids.size() != target_descriptors.size()) {
        throw Error("multiview membership: ids do not align with descriptors");
    }
    if (query_ids.empty() || target_ids.empty()) {
        throw Error("multiview membership: query and target sets must be nonempty");
    }
    MembershipMatrix matrix;
    matrix.query_ids = query_ids;
    matrix.target_ids = target_ids;
    matrix.scores.resize(query_ids.size() * target_ids.size());
    for (std::size_t q = 0; q < query_ids.size(); ++q) {
        for (std::size_t t = 0; t < target_ids.size(); ++t) {
            matrix.scores[q * target_ids.size() + t] =
                multiview_score(query_descriptors[q], target_descriptors[t], d_max);
        }
    }
    return matrix;
}

void save_depth_pgm(const std::string& path, const DepthImage& image) {
    save_pgm(path, image.width, image.height, image.depth, /*sixteen_bit=*/true);
}

} // namespace relief
