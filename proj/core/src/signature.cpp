#include "reliefkit/signature.hpp"

#include "reliefkit/io_util.hpp"
#include "reliefkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace relief {

namespace {

double mean_distance(const RegionSignature& a, const RegionSignature& b) {
    double sum = 0.0;
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        const double d = a.mean[static_cast<std::size_t>(c)] - b.mean[static_cast<std::size_t>(c)];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

} // namespace

ModelSignature build_signature(const PatternLabeling& labeling,
                               const std::vector<std::uint32_t>& sampled_faces,
                               const std::vector<FaceDescriptor>& sampled_descriptors,
                               bool include_plain) {
    if (labeling.labels.empty()) {
        throw Error("build_signature: empty labeling");
    }
    if (sampled_faces.size() != sampled_descriptors.size()) {
        throw Error("build_signature: sampled faces do not align with descriptors");
    }
    if (sampled_faces.empty()) {
        throw Error("build_signature: no sampled descriptors");
    }

    // Face-count shares from the dense labeling, normalized over the labels
    // this signature includes.
    std::map<std::uint32_t, std::size_t> face_counts;
    for (std::uint32_t lab : labeling.labels) {
        if (lab == 0 && !include_plain) {
            continue;
        }
        ++face_counts[lab];
    }
    if (face_counts.empty()) {
        throw Error("build_signature: no pattern regions");
    }
    std::size_t total = 0;
    for (const auto& [lab, count] : face_counts) {
        total += count;
    }

    // Aggregate sampled descriptors per label (Welford-free two-pass is
    // unnecessary; accumulate sums and squared sums).
    struct Accum {
        std::array<double, FaceDescriptor::kChannels> sum{};
        std::array<double, FaceDescriptor::kChannels> sum2{};
        std::uint32_t n = 0;
    };
    std::map<std::uint32_t, Accum> accums;
    for (std::size_t i = 0; i < sampled_faces.size(); ++i) {
        const std::uint32_t f = sampled_faces[i];
        if (f >= labeling.labels.size()) {
            throw Error("build_signature: sampled face outside the labeling");
        }
        const std::uint32_t lab = labeling.labels[f];
        if (lab == 0 && !include_plain) {
            continue;
        }
        Accum& acc = accums[lab];
        for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
            const double v = sampled_descriptors[i].channel(c);
            acc.sum[static_cast<std::size_t>(c)] += v;
            acc.sum2[static_cast<std::size_t>(c)] += v * v;
        }
        ++acc.n;
    }

    ModelSignature sig;
    for (const auto& [lab, count] : face_counts) {
        auto it = accums.find(lab);
        if (it == accums.end() || it->second.n == 0) {
            throw Error("build_signature: region has no sampled descriptors");
        }
        const Accum& acc = it->second;
        RegionSignature region;
        region.label = lab;
        region.share = static_cast<double>(count) / static_cast<double>(total);
        region.sample_count = acc.n;
        for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
            const std::size_t ci = static_cast<std::size_t>(c);
            const double mean = acc.sum[ci] / acc.n;
            region.mean[ci] = mean;
            const double var = std::max(0.0, acc.sum2[ci] / acc.n - mean * mean);
            region.stdev[ci] = std::sqrt(var);
        }
        sig.regions.push_back(region);
    }
    return sig;
}

double score_pair(const ModelSignature& query, const ModelSignature& target, double d_max,
                  bool match_plain) {
    if (query.regions.empty() || target.regions.empty()) {
        throw Error("score_pair: empty signature");
    }
    if (!(d_max > 0.0)) {
        throw Error("score_pair: normalization diameter must be positive");
    }
    double best = 0.0;
    bool any = false;
    for (const RegionSignature& q : query.regions) {
        if (q.label == 0 && !match_plain) {
            continue;
        }
        for (const RegionSignature& t : target.regions) {
            if (t.label == 0 && !match_plain) {
                continue;
            }
            any = true;
            best = std::max(best, clamp01(1.0 - mean_distance(q, t) / d_max));
        }
    }
    return any ? best : 0.0;
}

double signature_normalization_diameter(const std::vector<ModelSignature>& signatures,
                                        bool match_plain) {
    std::vector<const RegionSignature*> regions;
    for (const ModelSignature& sig : signatures) {
        for (const RegionSignature& region : sig.regions) {
            if (region.label == 0 && !match_plain) {
                continue;
            }
            regions.push_back(&region);
        }
    }
    if (regions.size() < 2) {
        throw Error("signature normalization: need at least two pattern regions");
    }
    std::vector<double> distances;
    distances.reserve(regions.size() * (regions.size() - 1) / 2);
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            distances.push_back(mean_distance(*regions[i], *regions[j]));
        }
    }
    std::sort(distances.begin(), distances.end());
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.995 * static_cast<double>(distances.size())));
    const double d_max = distances[std::min(distances.size() - 1, std::max<std::size_t>(rank, 1) - 1)];
    if (!(d_max > 0.0)) {
        throw Error("signature normalization: zero diameter (all region means coincide)");
    }
    return d_max;
}

MembershipMatrix build_membership_matrix(const std::vector<ModelSignature>& queries,
                                         const std::vector<ModelSignature>& targets,
                                         double d_max) {
    if (queries.empty() || targets.empty()) {
        throw Error("membership: query and target sets must be nonempty");
    }
    MembershipMatrix matrix;
    matrix.query_ids.reserve(queries.size());
    for (const ModelSignature& q : queries) {
        matrix.query_ids.push_back(q.model_id);
    }
    matrix.target_ids.reserve(targets.size());
    for (const ModelSignature& t : targets) {
        matrix.target_ids.push_back(t.model_id);
    }
    matrix.scores.resize(queries.size() * targets.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t t = 0; t < targets.size(); ++t) {
            matrix.scores[q * targets.size() + t] = score_pair(queries[q], targets[t], d_max);
        }
    }
    return matrix;
}

std::string membership_to_csv(const MembershipMatrix& matrix) {
    std::string out = "id";
    for (const std::string& t : matrix.target_ids) {
        out += ',';
        out += t;
    }
    out += '\n';
    for (std::size_t q = 0; q < matrix.query_ids.size(); ++q) {
        out += matrix.query_ids[q];
        for (std::size_t t = 0; t < matrix.target_ids.size(); ++t) {
            out += ',';
            out += fmt_double(matrix.at(q, t));
        }
        out += '\n';
    }
    return out;
}

MembershipMatrix membership_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("membership csv: empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    MembershipMatrix matrix;
    {
        std::istringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first) {
                first = false;  // corner cell, any text
                continue;
            }
            matrix.target_ids.push_back(cell);
        }
    }
    if (matrix.target_ids.empty()) {
        throw Error("membership csv: no target columns");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) {
            throw Error("membership csv: malformed row");
        }
        matrix.query_ids.push_back(cell);
        std::size_t got = 0;
        while (std::getline(row, cell, ',')) {
            char* endp = nullptr;
            const double v = std::strtod(cell.c_str(), &endp);
            if (endp == cell.c_str()) {
                throw Error("membership csv: non-numeric score '" + cell + "'");
            }
            matrix.scores.push_back(v);
            ++got;
        }
        if (got != matrix.target_ids.size()) {
            throw Error("membership csv: row width does not match header");
        }
    }
    if (matrix.query_ids.empty()) {
        throw Error("membership csv: no query rows");
    }
    return matrix;
}

void save_membership(const std::string& path, const MembershipMatrix& matrix) {
    write_file_atomic(path, membership_to_csv(matrix));
}

MembershipMatrix load_membership(const std::string& path) {
    return membership_from_csv(read_file(path));
}

PatternLabeling localize_shared(const ModelSignature& query_signature,
                                const PatternLabeling& target_labeling,
                                const ModelSignature& target_signature, double d_max,
                                double threshold) {
    if (!(d_max > 0.0)) {
        throw Error("localize: normalization diameter must be positive");
    }
    // For each target pattern region, find the best-scoring query pattern
    // region; the target region adopts that query pattern's id when the score
    // clears the threshold.
    std::map<std::uint32_t, std::uint32_t> region_annotation;  // target label -> query label
    for (const RegionSignature& t : target_signature.regions) {
        if (t.label == 0) {
            continue;
        }
        double best_score = -1.0;
        std::uint32_t best_query = 0;
        for (const RegionSignature& q : query_signature.regions) {
            if (q.label == 0) {
                continue;
            }
            const double score = 1.0 - mean_distance(q, t) / d_max;
            if (score > best_score || (score == best_score && q.label < best_query)) {
                best_score = score;
                best_query = q.label;
            }
        }
        if (best_score >= threshold && best_query != 0) {
            region_annotation[t.label] = best_query;
        }
    }

    PatternLabeling out;
    out.labels.resize(target_labeling.labels.size(), 0);
    out.catalog = target_labeling.catalog;
    for (std::size_t f = 0; f < target_labeling.labels.size(); ++f) {
        auto it = region_annotation.find(target_labeling.labels[f]);
        out.labels[f] = it == region_annotation.end() ? 0 : it->second;
    }
    return out;
}

} // namespace relief
