#pragma once

#include "reliefkit/adjacency.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/signature.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// Binary ground-truth relevance: a target is relevant to a query iff they
// share at least one nonzero pattern class. Ids are optional bookkeeping.
struct RelevanceMatrix {
    std::vector<std::string> query_ids;
    std::vector<std::string> target_ids;
    std::size_t query_count = 0;
    std::size_t target_count = 0;
    std::vector<std::uint8_t> relevant;  // row-major

    bool at(std::size_t q, std::size_t t) const { return relevant[q * target_count + t] != 0; }
};

/// Intersects nonzero label sets; plain (label 0) never creates relevance.
/// Labelings with catalogs must agree on shared class names.
RelevanceMatrix relevance_from_labels(const std::vector<PatternLabeling>& queries,
                                      const std::vector<PatternLabeling>& targets);

/// Number of shared nonzero classes per (query, target); same layout as the
/// relevance matrix. Used as graded nDCG gains.
std::vector<double> shared_pattern_counts(const std::vector<PatternLabeling>& queries,
                                          const std::vector<PatternLabeling>& targets);

struct FilteredEvaluation {
    MembershipMatrix membership;
    RelevanceMatrix relevance;
    std::vector<std::size_t> kept_rows;  // original query indices
};

/// Drops queries with no relevant target from both matrices.
FilteredEvaluation filter_queries(const MembershipMatrix& membership,
                                  const RelevanceMatrix& relevance);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RetrievalMetrics {
    double nn = 0.0;
    double ft = 0.0;
    double st = 0.0;
    double map = 0.0;
    double ndcg = 0.0;
    double e_measure = 0.0;
    double auc = 0.0;
    std::size_t retained_queries = 0;
    std::vector<RocPoint> roc;
};

/// Ranked-retrieval scores, averaged over queries. Targets rank by
/// descending score with ties broken by ascending column index. NN is the
/// top-1 relevance; FT/ST are recall at |R| and min(2|R|, T); AP averages
/// precision at the relevant ranks; nDCG uses binary gains with a
/// 1/log2(rank+1) discount (or the supplied graded gains); the e-measure is
/// the harmonic precision/recall mean at cutoff min(32, T). AUC and the ROC
/// curve pool all (query, target) pairs. Inputs must already be filtered.
RetrievalMetrics retrieval_metrics(const MembershipMatrix& membership,
                                   const RelevanceMatrix& relevance,
                                   const std::vector<double>* graded_gains = nullptr);

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> points;  // (0,0) to (1,1), one step per distinct score
};

/// Pooled micro-ROC over all pairs; AUC by the Mann-Whitney rank statistic
/// with ties counted half.
RocResult roc_auc(const MembershipMatrix& membership, const RelevanceMatrix& relevance);

std::string roc_to_csv(const std::vector<RocPoint>& points);

struct SegmentationMetrics {
    double accuracy = 0.0;
    double mean_iou = 0.0;
    double band_accuracy = 0.0;       // accuracy excluding the boundary band
    std::uint32_t band_rings = 0;
    std::size_t band_retained = 0;    // faces scored by band_accuracy
};

/// Per-face accuracy, mean IoU over classes present in the truth, and
/// accuracy excluding faces within `band_rings` rings (over the given
/// adjacency graph) of any edge whose endpoint truth labels differ.
SegmentationMetrics segmentation_metrics(const PatternLabeling& predicted,
                                         const PatternLabeling& truth,
                                         const FaceAdjacencyGraph& graph,
                                         std::uint32_t band_rings);

} // namespace relief
