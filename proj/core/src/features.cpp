#include "reliefkit/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace relief {

void NeighborhoodParams::validate() const {
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
        throw Error("neighborhood: shrink factor must be in (0,1)");
    if (max_neighbors < 8) throw Error("neighborhood: max neighbors must be at least 8");
    if (!(radius_multiplier > 0.0))
        throw Error("neighborhood: radius multiplier must be positive");
    if (max_attempts == 0) throw Error("neighborhood: max attempts must be at least 1");
}

Neighborhood collect_neighborhood(const FaceAttributes& attrs, const SpatialGrid& grid,
                                  const FaceAdjacencyGraph& graph, std::uint32_t face,
                                  double mean_edge, const NeighborhoodParams& params) {
    params.validate();
    Neighborhood result;
    const Vec3& center = attrs.centroids[face];
    const double r0 = params.radius_multiplier * mean_edge;

    std::vector<std::uint32_t> ring;
    {
        auto [begin, end] = graph.neighbors_of(face);
        ring.assign(begin, end);
        ring.push_back(face);
        std::sort(ring.begin(), ring.end());
    }

    bool exhausted = false;
    for (std::uint32_t attempt = 0;; ++attempt) {
        // Exact radius sequence r0 * shrink^k (recomputed, not accumulated).
        result.radius = r0 * std::pow(params.shrink_factor, static_cast<double>(attempt));
        grid.query_radius(center, result.radius, result.faces);
        result.attempts = attempt;
        if (result.faces.size() <= params.max_neighbors) break;
        if (attempt + 1 >= params.max_attempts) {
            exhausted = true;
            break;
        }
    }

    // The 1-ring is the floor of any neighborhood: if shrinking ran out of
    // attempts, or the accepted ball holds fewer faces than the ring (which
    // is certain when max_neighbors < ring size), take the ring instead.
    if (exhausted || result.faces.size() < ring.size()) {
        result.ring_fallback = true;
        result.faces = ring;
    }
    if (!std::binary_search(result.faces.begin(), result.faces.end(), face)) {
        result.faces.push_back(face);
        std::sort(result.faces.begin(), result.faces.end());
    }
    return result;
}

double face_curvature(const FaceAttributes& attrs, const FaceAdjacencyGraph& edge_graph,
                      std::uint32_t face) {
    auto [begin, end] = edge_graph.neighbors_of(face);
    if (begin == end) return 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    for (const std::uint32_t* it = begin; it != end; ++it) {
        sum += angle_between(attrs.normals[face], attrs.normals[*it]);
        ++count;
    }
    return sum / static_cast<double>(count);
}

FaceDescriptor face_descriptor(const TriangleMesh& mesh, const FaceAttributes& attrs,
                               const FaceAdjacencyGraph& edge_graph, std::uint32_t face,
                               const std::vector<std::uint32_t>& neighborhood) {
    if (neighborhood.empty()) throw Error("face descriptor: empty neighborhood");
    (void)mesh;
    FaceDescriptor d;
    const std::size_t n = neighborhood.size();

    Vec3 mean_centroid{0, 0, 0};
    Vec3 mean_normal{0, 0, 0};
    double mean_area = 0.0;
    for (std::uint32_t g : neighborhood) {
        mean_centroid += attrs.centroids[g];
        mean_normal += attrs.normals[g] * attrs.areas[g];
        mean_area += attrs.areas[g];
    }
    mean_centroid = mean_centroid / static_cast<double>(n);
    mean_area /= static_cast<double>(n);
    Vec3 unit_mean_normal = mean_normal.normalized();
    if (unit_mean_normal == Vec3{0, 0, 0}) unit_mean_normal = attrs.normals[face];

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::uint32_t g : neighborhood) {
        Vec3 c = attrs.centroids[g] - mean_centroid;
        Eigen::Vector3d e(c.x, c.y, c.z);
        cov += e * e.transpose();
    }
    cov /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    double l0 = std::max(0.0, lambda[0]);
    double l1 = std::max(0.0, lambda[1]);
    double l2 = std::max(0.0, lambda[2]);
    double total = l0 + l1 + l2;

    Vec3 plane_normal;
    if (total <= 0.0) {
        // All centroids coincide: treat the neighborhood as flat along the
        // mean normal.
        plane_normal = unit_mean_normal;
        d.surface_variation = 0.0;
    } else if (l1 <= 1e-12 * l2) {
        // Collinear centroids: no unique plane. Measure depth along the
        // best-fit line instead and flag the descriptor.
        d.degenerate_pca = true;
        d.surface_variation = 0.0;
        Eigen::Vector3d dir = eig.eigenvectors().col(2);
        plane_normal = {dir[0], dir[1], dir[2]};
    } else {
        d.surface_variation = l0 / total;
        Eigen::Vector3d nrm = eig.eigenvectors().col(0);
        plane_normal = {nrm[0], nrm[1], nrm[2]};
    }
    if (plane_normal.dot(unit_mean_normal) < 0) plane_normal = -plane_normal;

    d.depth = (attrs.centroids[face] - mean_centroid).dot(plane_normal);
    d.log_area = std::log(attrs.areas[face] / mean_area);
    d.normal_deviation = angle_between(attrs.normals[face], unit_mean_normal);

    // Area-weighted mean dihedral deviation over edge-adjacent pairs whose
    // faces both lie in the neighborhood.
    double weighted = 0.0, weight_total = 0.0;
    for (std::uint32_t g : neighborhood) {
        auto [begin, end] = edge_graph.neighbors_of(g);
        for (const std::uint32_t* it = begin; it != end; ++it) {
            if (*it <= g) continue;  // each unordered pair once
            if (!std::binary_search(neighborhood.begin(), neighborhood.end(), *it)) continue;
            double w = attrs.areas[g] + attrs.areas[*it];
            weighted += w * angle_between(attrs.normals[g], attrs.normals[*it]);
            weight_total += w;
        }
    }
    d.curvature = weight_total > 0 ? weighted / weight_total : 0.0;
    return d;
}

ChannelStats normalize_bank(std::vector<FaceDescriptor>& descriptors) {
    if (descriptors.size() < 2) throw Error("normalize: need at least 2 descriptors");
    ChannelStats stats;
    const double n = static_cast<double>(descriptors.size());
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        double mean = 0.0;
        for (const FaceDescriptor& d : descriptors) mean += d.channel(c);
        mean /= n;
        double var = 0.0;
        for (const FaceDescriptor& d : descriptors) {
            double delta = d.channel(c) - mean;
            var += delta * delta;
        }
        var /= n;
        stats.mean[c] = mean;
        stats.stdev[c] = std::sqrt(var);
        stats.zero_variance[c] = !(var > 1e-18 * std::max(1.0, mean * mean));
        for (FaceDescriptor& d : descriptors) {
            d.set_channel(c, stats.zero_variance[c]
                                 ? 0.0
                                 : (d.channel(c) - stats.mean[c]) / stats.stdev[c]);
        }
    }
    return stats;
}

FaceDescriptor apply_normalization(const FaceDescriptor& d, const ChannelStats& stats) {
    FaceDescriptor out = d;
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        out.set_channel(c, stats.zero_variance[c] ? 0.0
                                                  : (d.channel(c) - stats.mean[c]) / stats.stdev[c]);
    }
    return out;
}

} // namespace relief
