#include "reliefkit/heightfield.hpp"

#include "reliefkit/io_util.hpp"
#include "reliefkit/mesh.hpp"
#include "reliefkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relief {
namespace {

constexpr double kPi = 3.14159265358979323846;
// Minimum lifted value of every procedural field: keeps displacement strictly
// positive on patterned surface while staying under the low end of the
// required value span.
constexpr double kFloor = 0.01;

enum Kind {
    kBumps = 1,
    kRidges,
    kBricks,
    kScales,
    kWeave,
    kCells,
    kBarkNoise,
    kRaster,
    kConstant,
};

double frac(double x) { return x - std::floor(x); }

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

double smoothstep(double e0, double e1, double x) {
    double t = clamp01((x - e0) / (e1 - e0));
    return t * t * (3.0 - 2.0 * t);
}

double lift(double raw) { return kFloor + (1.0 - kFloor) * clamp01(raw); }

// Raised cosine product: peaks where both factors hit -1 or +1; h in [0,1].
double bumps(double s, double t, double f) {
    return (std::cos(2.0 * kPi * f * s) * std::cos(2.0 * kPi * f * t) + 1.0) * 0.5;
}

// Triangle wave along u, constant along v.
double ridges(double s, double /*t*/, double f) {
    double x = frac(f * s);
    return 1.0 - std::fabs(2.0 * x - 1.0);
}

double bricks(double s, double t, double f) {
    double y = f * t;
    double row = std::floor(y);
    double x = f * s + (static_cast<long long>(row) % 2 != 0 ? 0.5 : 0.0);
    double cx = frac(x), cy = frac(y);
    const double mortar = 0.08, edge = 0.04;
    double hx = smoothstep(mortar, mortar + edge, cx) * smoothstep(mortar, mortar + edge, 1.0 - cx);
    double hy = smoothstep(mortar, mortar + edge, cy) * smoothstep(mortar, mortar + edge, 1.0 - cy);
    return hx * hy;
}

// Staggered rounded caps, one per cell.
double scales(double s, double t, double f) {
    double y = f * t;
    double row = std::floor(y);
    double x = f * s + (static_cast<long long>(row) % 2 != 0 ? 0.5 : 0.0);
    double cx = frac(x) - 0.5, cy = frac(y) - 1.0;
    double d = std::sqrt(cx * cx + cy * cy * 0.8);
    return clamp01(1.0 - d);
}

// Checkerboard of strand directions with a half-cylinder profile.
double weave(double s, double t, double f) {
    double x = f * s, y = f * t;
    long long parity = (static_cast<long long>(std::floor(x)) +
                        static_cast<long long>(std::floor(y))) % 2;
    double across = parity == 0 ? frac(y) : frac(x);
    return std::sin(kPi * across);
}

// Jittered-lattice nearest-feature distance (F1), wrapped for periodicity.
double cells(double s, double t, double f, std::uint64_t seed) {
    const long long n = std::max<long long>(1, static_cast<long long>(std::llround(f)));
    double x = s * static_cast<double>(n), y = t * static_cast<double>(n);
    long long cx = static_cast<long long>(std::floor(x));
    long long cy = static_cast<long long>(std::floor(y));
    double best = 1e30;
    for (long long dy = -1; dy <= 1; ++dy) {
        for (long long dx = -1; dx <= 1; ++dx) {
            long long gx = cx + dx, gy = cy + dy;
            std::uint64_t wx = static_cast<std::uint64_t>(((gx % n) + n) % n);
            std::uint64_t wy = static_cast<std::uint64_t>(((gy % n) + n) % n);
            std::uint64_t h = hash_mix(seed * 0x9e3779b97f4a7c15ull + wx, wy);
            double jx = (h >> 32) * 0x1.0p-32;
            double jy = (h & 0xffffffffull) * 0x1.0p-32;
            double px = static_cast<double>(gx) + jx;
            double py = static_cast<double>(gy) + jy;
            double d2 = (x - px) * (x - px) + (y - py) * (y - py);
            best = std::min(best, d2);
        }
    }
    return clamp01(std::sqrt(best) * 1.6);
}

double value_noise(double x, double y, std::uint64_t seed) {
    long long ix = static_cast<long long>(std::floor(x));
    long long iy = static_cast<long long>(std::floor(y));
    double fx = x - static_cast<double>(ix), fy = y - static_cast<double>(iy);
    double sx = fx * fx * (3.0 - 2.0 * fx), sy = fy * fy * (3.0 - 2.0 * fy);
    auto corner = [&](long long dx, long long dy) {
        return hash_unit(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(ix + dx),
                         static_cast<std::uint64_t>(iy + dy));
    };
    double v00 = corner(0, 0), v10 = corner(1, 0), v01 = corner(0, 1), v11 = corner(1, 1);
    double a = v00 + (v10 - v00) * sx;
    double b = v01 + (v11 - v01) * sx;
    return a + (b - a) * sy;
}

// Aperiodic fractal noise, made tileable by mirroring the tile coordinate.
double bark_noise(double s, double t, double f, std::uint64_t seed) {
    double ms = 1.0 - std::fabs(2.0 * s - 1.0);
    double mt = 1.0 - std::fabs(2.0 * t - 1.0);
    double x = ms * f, y = mt * f;
    double sum = 0.0, amp = 1.0, total = 0.0;
    for (int octave = 0; octave < 4; ++octave) {
        sum += amp * value_noise(x, y, seed + static_cast<std::uint64_t>(octave) * 0x12345ull);
        total += amp;
        x = x * 2.0 + 17.13;
        y = y * 2.0 + 9.71;
        amp *= 0.5;
    }
    double n = sum / total;
    return clamp01((n - 0.5) * 3.4 + 0.5);
}

double sample_raster(const std::vector<double>& grid, std::uint32_t w, std::uint32_t h,
                     double s, double t) {
    double x = s * static_cast<double>(w) - 0.5;
    double y = t * static_cast<double>(h) - 0.5;
    long long x0 = static_cast<long long>(std::floor(x));
    long long y0 = static_cast<long long>(std::floor(y));
    double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
    auto wrap = [](long long i, std::uint32_t n) {
        long long m = i % static_cast<long long>(n);
        if (m < 0) m += n;
        return static_cast<std::uint32_t>(m);
    };
    auto at = [&](long long xi, long long yi) {
        return grid[static_cast<std::size_t>(wrap(yi, h)) * w + wrap(xi, w)];
    };
    double a = at(x0, y0) + (at(x0 + 1, y0) - at(x0, y0)) * fx;
    double b = at(x0, y0 + 1) + (at(x0 + 1, y0 + 1) - at(x0, y0 + 1)) * fx;
    return clamp01(a + (b - a) * fy);
}

} // namespace

double HeightField::sample(double u, double v) const {
    // Tile reduction first: the result depends only on frac(u+phase), frac(v+phase).
    double s = frac(u + params_.phase_u);
    double t = frac(v + params_.phase_v);
    const double f = params_.frequency;
    switch (kind_) {
        case kBumps: return lift(bumps(s, t, f));
        case kRidges: return lift(ridges(s, t, f));
        case kBricks: return lift(bricks(s, t, f));
        case kScales: return lift(scales(s, t, f));
        case kWeave: return lift(weave(s, t, f));
        case kCells: return lift(cells(s, t, f, params_.seed));
        case kBarkNoise: return lift(bark_noise(s, t, f, params_.seed));
        case kRaster: {
            double ss = frac(s * tiles_), tt = frac(t * tiles_);
            return sample_raster(*grid_, width_, height_, ss, tt);
        }
        case kConstant: return constant_;
        default: return 0.0;
    }
}

HeightField make_heightfield(const std::string& pattern, const HeightFieldParams& params) {
    if (!(params.frequency > 0.0)) throw Error("heightfield: frequency must be positive");
    HeightField hf;
    hf.pattern_ = pattern;
    hf.params_ = params;
    if (pattern == "bumps") hf.kind_ = kBumps;
    else if (pattern == "ridges") hf.kind_ = kRidges;
    else if (pattern == "bricks") hf.kind_ = kBricks;
    else if (pattern == "scales") hf.kind_ = kScales;
    else if (pattern == "weave") hf.kind_ = kWeave;
    else if (pattern == "cells") hf.kind_ = kCells;
    else if (pattern == "bark-noise") hf.kind_ = kBarkNoise;
    else throw Error("heightfield: unknown pattern '" + pattern + "'");
    return hf;
}

HeightField make_raster_heightfield(std::uint32_t width, std::uint32_t height,
                                    std::vector<double> values, double tiles) {
    if (width == 0 || height == 0 || values.size() != static_cast<std::size_t>(width) * height)
        throw Error("heightfield: raster dimensions do not match value count");
    if (!(tiles > 0.0)) throw Error("heightfield: tiles must be positive");
    HeightField hf;
    hf.pattern_ = "raster";
    hf.kind_ = kRaster;
    hf.width_ = width;
    hf.height_ = height;
    for (double& v : values) v = clamp01(v);
    hf.grid_ = std::make_shared<const std::vector<double>>(std::move(values));
    hf.tiles_ = tiles;
    return hf;
}

HeightField make_constant_heightfield(double value) {
    HeightField hf;
    hf.pattern_ = "constant";
    hf.kind_ = kConstant;
    hf.constant_ = clamp01(value);
    return hf;
}

HeightField load_heightfield_pgm(const std::string& path, double tiles) {
    std::uint32_t w = 0, h = 0;
    std::vector<double> values = load_pgm(path, w, h);
    return make_raster_heightfield(w, h, std::move(values), tiles);
}

void save_pgm(const std::string& path, std::uint32_t width, std::uint32_t height,
              const std::vector<double>& values01, bool sixteen_bit) {
    if (values01.size() != static_cast<std::size_t>(width) * height)
        throw Error("pgm: dimensions do not match value count");
    const std::uint32_t maxval = sixteen_bit ? 65535 : 255;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" +
                      std::to_string(maxval) + "\n";
    out.reserve(out.size() + values01.size() * (sixteen_bit ? 2 : 1));
    for (double v : values01) {
        std::uint32_t q = static_cast<std::uint32_t>(std::lround(clamp01(v) * maxval));
        if (sixteen_bit) {
            out += static_cast<char>((q >> 8) & 0xff);  // PGM 16-bit is big-endian
            out += static_cast<char>(q & 0xff);
        } else {
            out += static_cast<char>(q & 0xff);
        }
    }
    write_file_atomic(path, out);
}

std::vector<double> load_pgm(const std::string& path, std::uint32_t& width, std::uint32_t& height) {
    const std::string data = read_file(path);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < data.size()) {
            if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        std::size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) throw Error("pgm: truncated header");
        return data.substr(start, pos - start);
    };

    const std::string magic = next_token();
    if (magic != "P2" && magic != "P5") throw Error("pgm: unsupported magic '" + magic + "'");
    width = static_cast<std::uint32_t>(std::stoul(next_token()));
    height = static_cast<std::uint32_t>(std::stoul(next_token()));
    const std::uint32_t maxval = static_cast<std::uint32_t>(std::stoul(next_token()));
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535)
        throw Error("pgm: invalid dimensions or maxval");

    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<double> values(count);
    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i)
            values[i] = std::stod(next_token()) / maxval;
    } else {
        ++pos;  // single whitespace after maxval
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (pos + count * bytes_per > data.size()) throw Error("pgm: truncated pixel data");
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t q;
            if (bytes_per == 2) {
                q = (static_cast<std::uint8_t>(data[pos]) << 8) |
                    static_cast<std::uint8_t>(data[pos + 1]);
                pos += 2;
            } else {
                q = static_cast<std::uint8_t>(data[pos]);
                ++pos;
            }
            values[i] = static_cast<double>(q) / maxval;
        }
    }
    return values;
}

} // namespace relief
