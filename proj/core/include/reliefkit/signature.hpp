#pragma once

#include "reliefkit/features.hpp"
#include "reliefkit/labeling.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// Aggregate of one labeled pattern region (all faces sharing a label).
struct RegionSignature {
    std::uint32_t label = 0;  // catalog class id; 0 = plain
    double share = 0.0;       // fraction of the mesh's faces carrying this label
    std::array<double, FaceDescriptor::kChannels> mean{};   // over sampled descriptors
    std::array<double, FaceDescriptor::kChannels> stdev{};  // population
    std::uint32_t sample_count = 0;
};

struct ModelSignature {
    std::string model_id;
    std::vector<RegionSignature> regions;  // ascending label order
};

/// Aggregates sampled, normalized descriptors per labeled region. One entry
/// per distinct label among the sampled faces; shares come from the dense
/// labeling and sum to 1 over the included regions. With include_plain=false
/// an all-plain labeling is an error ("no pattern regions").
ModelSignature build_signature(const PatternLabeling& labeling,
                               const std::vector<std::uint32_t>& sampled_faces,
                               const std::vector<FaceDescriptor>& sampled_descriptors,
                               bool include_plain = true);

/// Complement of the normalized mean-descriptor distance, maximized over
/// region pairs: max over (q, t) of clamp01(1 - |mu_q - mu_t| / d_max).
/// Plain regions are skipped unless match_plain; no eligible pair -> 0.
double score_pair(const ModelSignature& query, const ModelSignature& target, double d_max,
                  bool match_plain = false);

/// 99.5th percentile (nearest-rank) of pairwise distances between region
/// descriptor means across the given signatures. Computed once over the
/// training split and frozen so scores are comparable across runs. Plain
/// regions are skipped unless match_plain.
double signature_normalization_diameter(const std::vector<ModelSignature>& signatures,
                                        bool match_plain = false);

struct MembershipMatrix {
    std::vector<std::string> query_ids;
    std::vector<std::string> target_ids;
    std::vector<double> scores;  // row-major, query_ids.size() x target_ids.size()

    double at(std::size_t q, std::size_t t) const { return scores[q * target_ids.size() + t]; }
};

/// Entry (q, t) = score_pair(queries[q], targets[t], d_max).
MembershipMatrix build_membership_matrix(const std::vector<ModelSignature>& queries,
                                         const std::vector<ModelSignature>& targets,
                                         double d_max);

/// CSV with a header row and column of model ids; cell (q, t) is the score.
std::string membership_to_csv(const MembershipMatrix& matrix);
MembershipMatrix membership_from_csv(const std::string& text);

void save_membership(const std::string& path, const MembershipMatrix& matrix);
MembershipMatrix load_membership(const std::string& path);

/// Per-face annotation on the target: faces of a target region whose best
/// match among the query's pattern regions scores >= threshold take that
/// query pattern's id; everything else takes 0.
PatternLabeling localize_shared(const ModelSignature& query_signature,
                                const PatternLabeling& target_labeling,
                                const ModelSignature& target_signature, double d_max,
                                double threshold);

} // namespace relief
