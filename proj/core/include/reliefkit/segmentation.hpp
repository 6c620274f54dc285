#pragma once

#include "reliefkit/adjacency.hpp"
#include "reliefkit/features.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// Descriptor rows harvested from labeled training meshes, z-scored with the
// bank's own channel statistics (stored so inference descriptors can be
// mapped into the same space). Class ids index `catalog`; class 0 is plain.
struct ReferenceBank {
    std::vector<std::string> catalog;         // class id -> pattern name
    std::vector<std::uint32_t> classes;       // one class id per row
    std::vector<FaceDescriptor> descriptors;  // normalized rows
    ChannelStats stats;
    // Frozen retrieval-score normalization (99.5th-percentile region-mean
    // distance over the training split); 0 until the training pipeline sets it.
    double normalization_diameter = 0.0;

    std::size_t size() const { return descriptors.size(); }
    /// Throws unless the bank is nonempty, rows and class ids are aligned,
    /// and every class id has a catalog entry.
    void validate() const;
};

/// Binary bank file, little-endian: magic "RKBANK01", class-name table,
/// channel statistics, then one (class id, channels) record per row.
void save_reference_bank(const std::string& path, const ReferenceBank& bank);
ReferenceBank load_reference_bank(const std::string& path);

struct BankTrainingMesh {
    const TriangleMesh* mesh = nullptr;
    const PatternLabeling* labels = nullptr;  // dense ground truth
};

/// Samples faces from each training mesh, extracts raw descriptors, pools
/// them, and z-scores the pool. `catalog` lists class names by id; classes
/// that never occur in the training labels simply contribute no rows.
ReferenceBank build_reference_bank(const std::vector<BankTrainingMesh>& training,
                                   const std::vector<std::string>& catalog,
                                   std::uint32_t samples_per_mesh, std::uint64_t seed,
                                   const NeighborhoodParams& params = {});

/// `count` distinct face ids drawn uniformly with a seeded generator,
/// returned ascending. Requires 1 <= count <= face_count.
std::vector<std::uint32_t> sample_faces(std::size_t face_count, std::size_t count,
                                        std::uint64_t seed);

struct SparseLabels {
    std::vector<std::uint32_t> faces;  // ascending
    std::vector<std::uint32_t> labels;
    std::vector<double> confidences;
};

/// k-nearest-neighbor vote in normalized descriptor space. Label = majority
/// class among the k nearest bank rows (Euclidean); confidence = majority
/// fraction; vote ties resolve to the lowest class id at the tied fraction.
/// k is clamped to the bank size.
SparseLabels classify_sampled(const std::vector<std::uint32_t>& sample_ids,
                              const std::vector<FaceDescriptor>& normalized_samples,
                              const ReferenceBank& bank, std::uint32_t k);

enum class FallbackPolicy {
    GlobalMajority,  // remaining faces take the most common assigned label
    NearestLabeled,  // remaining faces take the hop-nearest assigned label
};

struct PropagationConfig {
    double alpha = 1.0;  // normal-similarity weight
    double beta = 1.0;   // centroid-distance kernel weight
    double gamma = 1.0;  // curvature-consistency weight
    double sigma = 0.0;  // distance kernel bandwidth; <= 0 selects 3 x mean edge
    double tau = 0.4;    // minimum vote share to adopt a label, in (0,1]
    std::uint32_t max_iterations = 64;
    FallbackPolicy fallback = FallbackPolicy::GlobalMajority;

    void validate() const;
};

/// Synchronous weighted voting over the face adjacency graph. Seed faces
/// never change. Each round, an unlabeled face adopts the top-vote label of
/// its labeled neighbors iff that label's vote share >= tau, with
///   w = alpha * max(0, n_i . n_j) + beta * exp(-d^2 / (2 sigma^2))
///     + gamma * exp(-|k_i - k_j|).
/// After convergence (or the iteration cap) the fallback policy labels every
/// remaining face, so the output is total. Fallback-labeled faces report
/// confidence 0.
PatternLabeling propagate_labels(const FaceAdjacencyGraph& graph, const FaceAttributes& attrs,
                                 const std::vector<double>& face_curvatures, double mean_edge,
                                 const SparseLabels& seeds, const PropagationConfig& config);

struct SegmenterConfig {
    std::uint32_t sample_count = 2000;  // clamped to the mesh's face count
    std::uint32_t knn = 5;
    double min_keep_confidence = 0.6;  // classifier outputs below this seed nothing
    std::uint64_t seed = 0;
    NeighborhoodParams neighborhood;
    PropagationConfig propagation;
};

/// Full dense labeling: sample -> descriptors -> normalize with the bank's
/// statistics -> k-NN classify -> confidence gate -> propagate. Deterministic
/// for a fixed (mesh, bank, config).
PatternLabeling segment_mesh(const TriangleMesh& mesh, const ReferenceBank& bank,
                             const SegmenterConfig& config = {});

/// Debug CSV: face_id,depth,log_area,surface_variation,curvature,normal_deviation.
std::string descriptor_rows_csv(const std::vector<std::uint32_t>& face_ids,
                                const std::vector<FaceDescriptor>& rows);

} // namespace relief
