#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace relief {

// Scalar relief field over the unit UV tile, values in [0,1], period 1 in
// both arguments. Procedural generators reduce (u,v) to the tile coordinate
// first (frac before any scaling), so h(u+1, v) == h(u, v) bit-exactly
// whenever u+1 is exactly representable. Procedural values are lifted to a
// small positive floor so a patterned vertex always receives some offset.
struct HeightFieldParams {
    double frequency = 4.0;  // pattern repetitions per UV unit; must be > 0
    double phase_u = 0.0;
    double phase_v = 0.0;
    std::uint64_t seed = 0;  // drives the stochastic generators (cells, bark-noise)
};

class HeightField {
public:
    double sample(double u, double v) const;
    double period() const { return 1.0; }
    const std::string& pattern() const { return pattern_; }

private:
    friend HeightField make_heightfield(const std::string&, const HeightFieldParams&);
    friend HeightField make_raster_heightfield(std::uint32_t, std::uint32_t,
                                               std::vector<double>, double);
    friend HeightField make_constant_heightfield(double);

    std::string pattern_;
    HeightFieldParams params_;
    int kind_ = 0;
    // raster-backed fields
    std::uint32_t width_ = 0, height_ = 0;
    std::shared_ptr<const std::vector<double>> grid_;
    double tiles_ = 1.0;
    double constant_ = 0.0;
};

/// pattern is one of: bumps, ridges, bricks, scales, weave, cells, bark-noise.
HeightField make_heightfield(const std::string& pattern, const HeightFieldParams& params = {});

/// Raster field sampled bilinearly with wrap-around; `tiles` repeats the
/// image that many times across the unit tile. Values are clamped to [0,1].
HeightField make_raster_heightfield(std::uint32_t width, std::uint32_t height,
                                    std::vector<double> values, double tiles = 1.0);

/// h == value everywhere; used by synthesis tests.
HeightField make_constant_heightfield(double value);

/// PGM (P2/P5, maxval 255 or 65535) loaders/writers for raster fields.
HeightField load_heightfield_pgm(const std::string& path, double tiles = 1.0);
void save_pgm(const std::string& path, std::uint32_t width, std::uint32_t height,
              const std::vector<double>& values01, bool sixteen_bit = false);
std::vector<double> load_pgm(const std::string& path, std::uint32_t& width, std::uint32_t& height);

} // namespace relief
