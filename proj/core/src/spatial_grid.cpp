#include "reliefkit/spatial_grid.hpp"

#include "reliefkit/mesh.hpp"
#include "reliefkit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace relief {

SpatialGrid::SpatialGrid(const std::vector<Vec3>& points, double cell_size)
    : points_(points), cell_size_(cell_size) {
    if (!(cell_size > 0)) throw Error("spatial grid: cell size must be positive");
    bucket_count_ = std::max<std::size_t>(16, points.size() * 2);

    std::vector<std::uint32_t> counts(bucket_count_ + 1, 0);
    std::vector<std::size_t> buckets(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points_[i];
        buckets[i] = bucket_index(cell_of(p.x), cell_of(p.y), cell_of(p.z));
        ++counts[buckets[i] + 1];
    }
    for (std::size_t b = 0; b < bucket_count_; ++b) counts[b + 1] += counts[b];
    bucket_offsets_ = counts;
    bucket_points_.resize(points.size());
    std::vector<std::uint32_t> cursor(bucket_offsets_.begin(), bucket_offsets_.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i)
        bucket_points_[cursor[buckets[i]]++] = static_cast<std::uint32_t>(i);
}

std::int64_t SpatialGrid::cell_of(double x) const {
    return static_cast<std::int64_t>(std::floor(x / cell_size_));
}

std::size_t SpatialGrid::bucket_index(std::int64_t cx, std::int64_t cy, std::int64_t cz) const {
    std::uint64_t h = hash_mix(hash_mix(static_cast<std::uint64_t>(cx),
                                        static_cast<std::uint64_t>(cy)),
                               static_cast<std::uint64_t>(cz));
    return static_cast<std::size_t>(h % bucket_count_);
}

void SpatialGrid::query_radius(const Vec3& center, double radius,
                               std::vector<std::uint32_t>& out) const {
    out.clear();
    const double r2 = radius * radius;
    std::int64_t cx = cell_of(center.x), cy = cell_of(center.y), cz = cell_of(center.z);
    for (std::int64_t dz = -1; dz <= 1; ++dz) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                std::size_t b = bucket_index(cx + dx, cy + dy, cz + dz);
                for (std::uint32_t k = bucket_offsets_[b]; k < bucket_offsets_[b + 1]; ++k) {
                    std::uint32_t id = bucket_points_[k];
                    if ((points_[id] - center).norm2() <= r2) out.push_back(id);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

} // namespace relief
