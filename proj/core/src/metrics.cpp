#include "reliefkit/metrics.hpp"

#include "reliefkit/io_util.hpp"
#include "reliefkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace relief {

namespace {

std::set<std::uint32_t> nonzero_label_set(const PatternLabeling& labeling) {
    std::set<std::uint32_t> out;
    for (std::uint32_t lab : labeling.labels) {
        if (lab != 0) {
            out.insert(lab);
        }
    }
    return out;
}

void check_catalogs(const std::vector<PatternLabeling>& queries,
                    const std::vector<PatternLabeling>& targets) {
    const std::vector<std::string>* reference = nullptr;
    for (const auto* split : {&queries, &targets}) {
        for (const PatternLabeling& labeling : *split) {
            if (labeling.catalog.empty()) {
                continue;
            }
            if (reference == nullptr) {
                reference = &labeling.catalog;
                continue;
            }
            const std::size_t shared = std::min(reference->size(), labeling.catalog.size());
            for (std::size_t i = 0; i < shared; ++i) {
                if ((*reference)[i] != labeling.catalog[i]) {
                    throw Error("relevance: catalog mismatch between labelings");
                }
            }
        }
    }
}

std::size_t shared_count(const std::set<std::uint32_t>& a, const std::set<std::uint32_t>& b) {
    std::size_t n = 0;
    for (std::uint32_t x : a) {
        n += b.count(x);
    }
    return n;
}

/// Target ranking for one query: descending score, ascending column index.
std::vector<std::size_t> ranked_targets(const MembershipMatrix& membership, std::size_t q) {
    std::vector<std::size_t> order(membership.target_ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return membership.at(q, a) > membership.at(q, b);
    });
    return order;
}

double log2_discount(std::size_t rank) {  // rank is 1-based
    return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

} // namespace

RelevanceMatrix relevance_from_labels(const std::vector<PatternLabeling>& queries,
                                      const std::vector<PatternLabeling>& targets) {
    check_catalogs(queries, targets);
    RelevanceMatrix matrix;
    matrix.query_count = queries.size();
    matrix.target_count = targets.size();
    matrix.relevant.resize(queries.size() * targets.size(), 0);
    std::vector<std::set<std::uint32_t>> target_sets;
    target_sets.reserve(targets.size());
    for (const PatternLabeling& t : targets) {
        target_sets.push_back(nonzero_label_set(t));
    }
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const std::set<std::uint32_t> qset = nonzero_label_set(queries[q]);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            matrix.relevant[q * targets.size() + t] =
                shared_count(qset, target_sets[t]) > 0 ? 1 : 0;
        }
    }
    return matrix;
}

std::vector<double> shared_pattern_counts(const std::vector<PatternLabeling>& queries,
                                          const std::vector<PatternLabeling>& targets) {
    check_catalogs(queries, targets);
    std::vector<double> counts(queries.size() * targets.size(), 0.0);
    std::vector<std::set<std::uint32_t>> target_sets;
    target_sets.reserve(targets.size());
    for (const PatternLabeling& t : targets) {
        target_sets.push_back(nonzero_label_set(t));
    }
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const std::set<std::uint32_t> qset = nonzero_label_set(queries[q]);
        for (std::size_t t = 0; t < targets.size(); ++t) {
            counts[q * targets.size() + t] =
                static_cast<double>(shared_count(qset, target_sets[t]));
        }
    }
    return counts;
}

FilteredEvaluation filter_queries(const MembershipMatrix& membership,
                                  const RelevanceMatrix& relevance) {
    const std::size_t nq = membership.query_ids.size();
    const std::size_t nt = membership.target_ids.size();
    if (relevance.query_count != nq || relevance.target_count != nt) {
        throw Error("filter: membership and relevance dimensions differ");
    }
    if (!relevance.query_ids.empty() && relevance.query_ids != membership.query_ids) {
        throw Error("filter: membership and relevance query ids differ");
    }
    if (!relevance.target_ids.empty() && relevance.target_ids != membership.target_ids) {
        throw Error("filter: membership and relevance target ids differ");
    }

    FilteredEvaluation out;
    out.membership.target_ids = membership.target_ids;
    out.relevance.target_ids = relevance.target_ids;
    out.relevance.target_count = nt;
    for (std::size_t q = 0; q < nq; ++q) {
        bool any = false;
        for (std::size_t t = 0; t < nt; ++t) {
            if (relevance.at(q, t)) {
                any = true;
                break;
            }
        }
        if (!any) {
            continue;
        }
        out.kept_rows.push_back(q);
        out.membership.query_ids.push_back(membership.query_ids[q]);
        if (!relevance.query_ids.empty()) {
            out.relevance.query_ids.push_back(relevance.query_ids[q]);
        }
        for (std::size_t t = 0; t < nt; ++t) {
            out.membership.scores.push_back(membership.at(q, t));
            out.relevance.relevant.push_back(relevance.at(q, t) ? 1 : 0);
        }
    }
    out.relevance.query_count = out.kept_rows.size();
    if (out.kept_rows.empty()) {
        throw Error("filter: no evaluable queries");
    }
    return out;
}

RetrievalMetrics retrieval_metrics(const MembershipMatrix& membership,
                                   const RelevanceMatrix& relevance,
                                   const std::vector<double>* graded_gains) {
    const std::size_t nq = membership.query_ids.size();
    const std::size_t nt = membership.target_ids.size();
    if (relevance.query_count != nq || relevance.target_count != nt) {
        throw Error("metrics: membership and relevance dimensions differ");
    }
    if (nq == 0 || nt == 0) {
        throw Error("metrics: empty evaluation");
    }
    if (graded_gains != nullptr && graded_gains->size() != nq * nt) {
        throw Error("metrics: graded gains do not match the matrix layout");
    }

    RetrievalMetrics metrics;
    metrics.retained_queries = nq;
    for (std::size_t q = 0; q < nq; ++q) {
        const std::vector<std::size_t> order = ranked_targets(membership, q);
        std::size_t total_relevant = 0;
        for (std::size_t t = 0; t < nt; ++t) {
            total_relevant += relevance.at(q, t) ? 1 : 0;
        }
        if (total_relevant == 0) {
            throw Error("metrics: query with no relevant target (filter first)");
        }

        metrics.nn += relevance.at(q, order[0]) ? 1.0 : 0.0;

        std::size_t hits = 0;
        double ap = 0.0;
        double dcg = 0.0;
        std::size_t ft_hits = 0, st_hits = 0, cutoff_hits = 0;
        const std::size_t st_cut = std::min(nt, 2 * total_relevant);
        const std::size_t e_cut = std::min<std::size_t>(32, nt);
        for (std::size_t rank = 1; rank <= nt; ++rank) {
            const bool rel = relevance.at(q, order[rank - 1]);
            if (rel) {
                ++hits;
                ap += static_cast<double>(hits) / static_cast<double>(rank);
            }
            if (rank <= total_relevant && rel) {
                ++ft_hits;
            }
            if (rank <= st_cut && rel) {
                ++st_hits;
            }
            if (rank <= e_cut && rel) {
                ++cutoff_hits;
            }
            if (graded_gains == nullptr) {
                if (rel) {
                    dcg += log2_discount(rank);
                }
            } else {
                dcg += (*graded_gains)[q * nt + order[rank - 1]] * log2_discount(rank);
            }
        }
        metrics.ft += static_cast<double>(ft_hits) / static_cast<double>(total_relevant);
        metrics.st += static_cast<double>(st_hits) / static_cast<double>(total_relevant);
        metrics.map += ap / static_cast<double>(total_relevant);

        double idcg = 0.0;
        if (graded_gains == nullptr) {
            for (std::size_t rank = 1; rank <= total_relevant; ++rank) {
                idcg += log2_discount(rank);
            }
        } else {
            std::vector<double> gains(nt);
            for (std::size_t t = 0; t < nt; ++t) {
                gains[t] = (*graded_gains)[q * nt + t];
            }
            std::sort(gains.begin(), gains.end(), std::greater<>());
            for (std::size_t rank = 1; rank <= nt; ++rank) {
                idcg += gains[rank - 1] * log2_discount(rank);
            }
        }
        metrics.ndcg += idcg > 0.0 ? dcg / idcg : 0.0;

        const double precision =
            static_cast<double>(cutoff_hits) / static_cast<double>(e_cut);
        const double recall =
            static_cast<double>(cutoff_hits) / static_cast<double>(total_relevant);
        metrics.e_measure +=
            (precision > 0.0 && recall > 0.0)
                ? 2.0 * precision * recall / (precision + recall)
                : 0.0;
    }
    const double dq = static_cast<double>(nq);
    metrics.nn /= dq;
    metrics.ft /= dq;
    metrics.st /= dq;
    metrics.map /= dq;
    metrics.ndcg /= dq;
    metrics.e_measure /= dq;

    const RocResult roc = roc_auc(membership, relevance);
    metrics.auc = roc.auc;
    metrics.roc = roc.points;
    return metrics;
}

RocResult roc_auc(const MembershipMatrix& membership, const RelevanceMatrix& relevance) {
    const std::size_t nq = membership.query_ids.size();
    const std::size_t nt = membership.target_ids.size();
    if (relevance.query_count != nq || relevance.target_count != nt) {
        throw Error("roc: membership and relevance dimensions differ");
    }
    std::vector<std::pair<double, bool>> pairs;  // (score, is positive)
    pairs.reserve(nq * nt);
    std::size_t positives = 0;
    for (std::size_t q = 0; q < nq; ++q) {
        for (std::size_t t = 0; t < nt; ++t) {
            const bool rel = relevance.at(q, t);
            positives += rel ? 1 : 0;
            pairs.emplace_back(membership.at(q, t), rel);
        }
    }
    const std::size_t negatives = pairs.size() - positives;
    if (positives == 0) {
        throw Error("roc: no positive pairs");
    }
    if (negatives == 0) {
        throw Error("roc: no negative pairs");
    }

    // Mann-Whitney rank statistic with average ranks for ties.
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double positive_rank_sum = 0.0;
    for (std::size_t i = 0; i < pairs.size();) {
        std::size_t j = i;
        std::size_t tied_positives = 0;
        while (j < pairs.size() && pairs[j].first == pairs[i].first) {
            tied_positives += pairs[j].second ? 1 : 0;
            ++j;
        }
        const double average_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        positive_rank_sum += average_rank * static_cast<double>(tied_positives);
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    RocResult result;
    result.auc = (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);

    // Curve: sweep thresholds from high to low, one step per distinct score.
    result.points.push_back({0.0, 0.0});
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = pairs.size(); i > 0;) {
        const double score = pairs[i - 1].first;
        while (i > 0 && pairs[i - 1].first == score) {
            if (pairs[i - 1].second) {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            --i;
        }
        result.points.push_back({fp / n, tp / p});
    }
    return result;
}

std::string roc_to_csv(const std::vector<RocPoint>& points) {
    std::string out = "fpr,tpr\n";
    for (const RocPoint& point : points) {
        out += fmt_double(point.fpr);
        out += ',';
        out += fmt_double(point.tpr);
        out += '\n';
    }
    return out;
}

SegmentationMetrics segmentation_metrics(const PatternLabeling& predicted,
                                         const PatternLabeling& truth,
                                         const FaceAdjacencyGraph& graph,
                                         std::uint32_t band_rings) {
    const std::size_t nf = truth.labels.size();
    if (predicted.labels.size() != nf) {
        throw Error("segmentation metrics: labelings differ in length");
    }
    if (nf == 0) {
        throw Error("segmentation metrics: empty labelings");
    }
    if (graph.node_count() != nf) {
        throw Error("segmentation metrics: adjacency graph does not match the labelings");
    }

    SegmentationMetrics metrics;
    metrics.band_rings = band_rings;

    std::size_t correct = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        correct += predicted.labels[f] == truth.labels[f] ? 1 : 0;
    }
    metrics.accuracy = static_cast<double>(correct) / static_cast<double>(nf);

    // IoU per class present in the truth.
    std::set<std::uint32_t> classes(truth.labels.begin(), truth.labels.end());
    double iou_sum = 0.0;
    for (std::uint32_t cls : classes) {
        std::size_t intersection = 0, uni = 0;
        for (std::size_t f = 0; f < nf; ++f) {
            const bool in_truth = truth.labels[f] == cls;
            const bool in_pred = predicted.labels[f] == cls;
            intersection += (in_truth && in_pred) ? 1 : 0;
            uni += (in_truth || in_pred) ? 1 : 0;
        }
        iou_sum += uni == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(uni);
    }
    metrics.mean_iou = iou_sum / static_cast<double>(classes.size());

    // Boundary band: faces within band_rings rings of an edge whose truth
    // labels differ. The endpoints of such an edge are ring 1.
    std::vector<std::uint8_t> excluded(nf, 0);
    if (band_rings > 0) {
        std::vector<std::uint32_t> boundary;
        for (std::uint32_t f = 0; f < nf; ++f) {
            auto [begin, end] = graph.neighbors_of(f);
            for (const std::uint32_t* neighbor = begin; neighbor != end; ++neighbor) {
                if (truth.labels[*neighbor] != truth.labels[f]) {
                    boundary.push_back(f);
                    break;
                }
            }
        }
        if (!boundary.empty()) {
            const std::vector<std::uint32_t> dist = bfs_distances(graph, boundary);
            for (std::size_t f = 0; f < nf; ++f) {
                if (dist[f] != kUnreachable && dist[f] <= band_rings - 1) {
                    excluded[f] = 1;
                }
            }
        }
    }
    std::size_t band_correct = 0, band_total = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        if (excluded[f]) {
            continue;
        }
        ++band_total;
        band_correct += predicted.labels[f] == truth.labels[f] ? 1 : 0;
    }
    metrics.band_retained = band_total;
    metrics.band_accuracy =
        band_total == 0 ? 1.0
                        : static_cast<double>(band_correct) / static_cast<double>(band_total);
    return metrics;
}

} // namespace relief
