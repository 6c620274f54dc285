#pragma once

#include "reliefkit/vec3.hpp"

#include <cstdint>
#include <vector>

namespace relief {

// Uniform hash grid for fixed-radius point queries. Cell size should be the
// largest radius that will be queried; queries with smaller radii reuse the
// same grid.
class SpatialGrid {
public:
    SpatialGrid(const std::vector<Vec3>& points, double cell_size);

    /// Ids of points with |p - center| <= radius, ascending. radius must not
    /// exceed the construction cell size.
    void query_radius(const Vec3& center, double radius, std::vector<std::uint32_t>& out) const;

private:
    std::int64_t cell_of(double x) const;
    std::size_t bucket_index(std::int64_t cx, std::int64_t cy, std::int64_t cz) const;

    const std::vector<Vec3>& points_;
    double cell_size_;
    std::vector<std::uint32_t> bucket_offsets_;
    std::vector<std::uint32_t> bucket_points_;
    std::size_t bucket_count_;
};

} // namespace relief
