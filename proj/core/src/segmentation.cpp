#include "reliefkit/segmentation.hpp"

#include "reliefkit/io_util.hpp"
#include "reliefkit/rng.hpp"
#include "reliefkit/spatial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <tuple>

namespace relief {

namespace {

constexpr std::uint32_t kUnlabeled = std::numeric_limits<std::uint32_t>::max();
constexpr char kBankMagic[8] = {'R', 'K', 'B', 'A', 'N', 'K', '0', '1'};

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
}

void append_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    append_u64(out, bits);
}

struct Cursor {
    const std::string& data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > data.size()) {
            throw Error("reference bank: truncated file");
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data[pos++]);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

double descriptor_distance2(const FaceDescriptor& a, const FaceDescriptor& b) {
    double sum = 0.0;
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        const double d = a.channel(c) - b.channel(c);
        sum += d * d;
    }
    return sum;
}

} // namespace

void ReferenceBank::validate() const {
    if (descriptors.empty()) {
        throw Error("reference bank: empty bank");
    }
    if (classes.size() != descriptors.size()) {
        throw Error("reference bank: class ids do not align with descriptor rows");
    }
    for (std::uint32_t c : classes) {
        if (c >= catalog.size()) {
            throw Error("reference bank: class id outside the catalog");
        }
    }
}

void save_reference_bank(const std::string& path, const ReferenceBank& bank) {
    bank.validate();
    std::string out;
    out.append(kBankMagic, sizeof kBankMagic);
    append_u32(out, static_cast<std::uint32_t>(bank.catalog.size()));
    for (const std::string& name : bank.catalog) {
        append_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        append_f64(out, bank.stats.mean[static_cast<std::size_t>(c)]);
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        append_f64(out, bank.stats.stdev[static_cast<std::size_t>(c)]);
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        out.push_back(bank.stats.zero_variance[static_cast<std::size_t>(c)] ? 1 : 0);
    }
    append_f64(out, bank.normalization_diameter);
    append_u64(out, bank.descriptors.size());
    for (std::size_t i = 0; i < bank.descriptors.size(); ++i) {
        append_u32(out, bank.classes[i]);
        for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
            append_f64(out, bank.descriptors[i].channel(c));
        }
    }
    write_file_atomic(path, out);
}

ReferenceBank load_reference_bank(const std::string& path) {
    const std::string data = read_file(path);
    Cursor cur{data};
    if (cur.bytes(sizeof kBankMagic) != std::string(kBankMagic, sizeof kBankMagic)) {
        throw Error("reference bank: bad magic (expected RKBANK01)");
    }
    ReferenceBank bank;
    const std::uint32_t catalog_count = cur.u32();
    bank.catalog.reserve(catalog_count);
    for (std::uint32_t i = 0; i < catalog_count; ++i) {
        const std::uint32_t len = cur.u32();
        bank.catalog.push_back(cur.bytes(len));
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        bank.stats.mean[static_cast<std::size_t>(c)] = cur.f64();
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        bank.stats.stdev[static_cast<std::size_t>(c)] = cur.f64();
    }
    for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
        bank.stats.zero_variance[static_cast<std::size_t>(c)] = cur.u8() != 0;
    }
    bank.normalization_diameter = cur.f64();
    const std::uint64_t rows = cur.u64();
    bank.classes.reserve(rows);
    bank.descriptors.reserve(rows);
    for (std::uint64_t i = 0; i < rows; ++i) {
        bank.classes.push_back(cur.u32());
        FaceDescriptor d;
        for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
            d.set_channel(c, cur.f64());
        }
        bank.descriptors.push_back(d);
    }
    if (cur.pos != data.size()) {
        throw Error("reference bank: trailing bytes after descriptor rows");
    }
    bank.validate();
    return bank;
}

std::vector<std::uint32_t> sample_faces(std::size_t face_count, std::size_t count,
                                        std::uint64_t seed) {
    if (count < 1 || count > face_count) {
        throw Error("sample_faces: count must be between 1 and the face count");
    }
    Rng rng(seed);
    return sample_without_replacement(static_cast<std::uint32_t>(face_count),
                                      static_cast<std::uint32_t>(count), rng);
}

ReferenceBank build_reference_bank(const std::vector<BankTrainingMesh>& training,
                                   const std::vector<std::string>& catalog,
                                   std::uint32_t samples_per_mesh, std::uint64_t seed,
                                   const NeighborhoodParams& params) {
    if (training.empty()) {
        throw Error("reference bank: no training meshes");
    }
    if (samples_per_mesh == 0) {
        throw Error("reference bank: samples per mesh must be positive");
    }
    params.validate();
    ReferenceBank bank;
    bank.catalog = catalog;
    const Rng root(seed);
    for (std::size_t mi = 0; mi < training.size(); ++mi) {
        const TriangleMesh& mesh = *training[mi].mesh;
        const PatternLabeling& labels = *training[mi].labels;
        if (labels.labels.size() != mesh.face_count()) {
            throw Error("reference bank: labeling does not match mesh face count");
        }
        const FaceAttributes attrs = compute_face_attributes(mesh);
        const FaceAdjacencyGraph graph = build_face_adjacency(mesh, AdjacencyMode::VertexShared);
        const FaceAdjacencyGraph edge_graph = build_face_adjacency(mesh, AdjacencyMode::EdgeShared);
        const double mean_edge = mean_edge_length(mesh);
        const SpatialGrid grid(attrs.centroids, params.radius_multiplier * mean_edge);
        Rng mesh_rng = root.child(mi);
        const std::size_t want =
            std::min<std::size_t>(samples_per_mesh, mesh.face_count());
        const std::vector<std::uint32_t> picks = sample_without_replacement(
            static_cast<std::uint32_t>(mesh.face_count()), static_cast<std::uint32_t>(want),
            mesh_rng);
        for (std::uint32_t f : picks) {
            const std::uint32_t cls = labels.labels[f];
            if (cls >= catalog.size()) {
                throw Error("reference bank: training label outside the catalog");
            }
            const Neighborhood hood =
                collect_neighborhood(attrs, grid, graph, f, mean_edge, params);
            bank.descriptors.push_back(face_descriptor(mesh, attrs, edge_graph, f, hood.faces));
            bank.classes.push_back(cls);
        }
    }
    bank.stats = normalize_bank(bank.descriptors);
    bank.validate();
    return bank;
}

SparseLabels classify_sampled(const std::vector<std::uint32_t>& sample_ids,
                              const std::vector<FaceDescriptor>& normalized_samples,
                              const ReferenceBank& bank, std::uint32_t k) {
    if (bank.descriptors.empty()) {
        throw Error("classify: reference bank is empty");
    }
    bank.validate();
    if (k < 1) {
        throw Error("classify: k must be at least 1");
    }
    if (sample_ids.size() != normalized_samples.size()) {
        throw Error("classify: sample ids do not align with descriptors");
    }
    const std::size_t use_k = std::min<std::size_t>(k, bank.descriptors.size());

    SparseLabels out;
    out.faces = sample_ids;
    out.labels.resize(sample_ids.size());
    out.confidences.resize(sample_ids.size());

    // (distance^2, class id, row index): the trailing fields make neighbor
    // selection deterministic under exact distance ties.
    std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> order(bank.descriptors.size());
    std::vector<std::uint32_t> votes(bank.catalog.size());
    for (std::size_t s = 0; s < normalized_samples.size(); ++s) {
        for (std::size_t r = 0; r < bank.descriptors.size(); ++r) {
            order[r] = {descriptor_distance2(normalized_samples[s], bank.descriptors[r]),
                        bank.classes[r], static_cast<std::uint32_t>(r)};
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(use_k),
                          order.end());
        std::fill(votes.begin(), votes.end(), 0u);
        for (std::size_t i = 0; i < use_k; ++i) {
            ++votes[std::get<1>(order[i])];
        }
        std::uint32_t best_class = 0;
        std::uint32_t best_votes = 0;
        for (std::size_t c = 0; c < votes.size(); ++c) {
            if (votes[c] > best_votes) {
                best_votes = votes[c];
                best_class = static_cast<std::uint32_t>(c);
            }
        }
        out.labels[s] = best_class;
        out.confidences[s] = static_cast<double>(best_votes) / static_cast<double>(use_k);
    }
    return out;
}

void PropagationConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
        throw Error("propagation: weight coefficients must be nonnegative");
    }
    if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
        throw Error("propagation: at least one weight coefficient must be positive");
    }
    if (!(tau > 0.0) || tau > 1.0) {
        throw Error("propagation: confidence threshold must be in (0, 1]");
    }
    if (max_iterations < 1) {
        throw Error("propagation: max iterations must be at least 1");
    }
}

PatternLabeling propagate_labels(const FaceAdjacencyGraph& graph, const FaceAttributes& attrs,
                                 const std::vector<double>& face_curvatures, double mean_edge,
                                 const SparseLabels& seeds, const PropagationConfig& config) {
    config.validate();
    const std::size_t nf = graph.node_count();
    if (attrs.normals.size() != nf || face_curvatures.size() != nf) {
        throw Error("propagate: face attributes do not cover the graph");
    }
    if (seeds.faces.empty()) {
        throw Error("propagate: no labeled faces");
    }
    if (seeds.labels.size() != seeds.faces.size()) {
        throw Error("propagate: seed labels do not align with seed faces");
    }

    std::vector<std::uint32_t> labels(nf, kUnlabeled);
    std::vector<double> confidences(nf, 0.0);
    std::uint32_t num_classes = 0;
    for (std::size_t i = 0; i < seeds.faces.size(); ++i) {
        const std::uint32_t f = seeds.faces[i];
        if (f >= nf) {
            throw Error("propagate: seed face outside the graph");
        }
        labels[f] = seeds.labels[i];
        confidences[f] = i < seeds.confidences.size() ? seeds.confidences[i] : 1.0;
        num_classes = std::max(num_classes, seeds.labels[i] + 1);
    }

    const double sigma = config.sigma > 0.0 ? config.sigma : 3.0 * mean_edge;
    const double inv_two_sigma2 = sigma > 0.0 ? 1.0 / (2.0 * sigma * sigma) : 0.0;

    std::vector<std::uint32_t> next_labels = labels;
    std::vector<double> next_conf = confidences;
    std::vector<double> votes(num_classes);
    for (std::uint32_t iter = 0; iter < config.max_iterations; ++iter) {
        std::size_t adopted = 0;
        for (std::uint32_t f = 0; f < nf; ++f) {
            if (labels[f] != kUnlabeled) {
                continue;
            }
            std::fill(votes.begin(), votes.end(), 0.0);
            double total = 0.0;
            auto [begin, end] = graph.neighbors_of(f);
            for (const std::uint32_t* n = begin; n != end; ++n) {
                const std::uint32_t lab = labels[*n];
                if (lab == kUnlabeled) {
                    continue;
                }
                const double dot = attrs.normals[f].dot(attrs.normals[*n]);
                const double dist2 = (attrs.centroids[f] - attrs.centroids[*n]).norm2();
                const double dk = face_curvatures[f] - face_curvatures[*n];
                const double w = config.alpha * std::max(0.0, dot) +
                                 config.beta * std::exp(-dist2 * inv_two_sigma2) +
                                 config.gamma * std::exp(-std::abs(dk));
                votes[lab] += w;
                total += w;
            }
            if (!(total > 0.0)) {
                continue;
            }
            std::uint32_t best = 0;
            double best_votes = -1.0;
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (votes[c] > best_votes) {
                    best_votes = votes[c];
                    best = c;
                }
            }
            const double share = best_votes / total;
            if (share >= config.tau) {
                next_labels[f] = best;
                next_conf[f] = share;
                ++adopted;
            }
        }
        labels = next_labels;
        confidences = next_conf;
        if (adopted == 0) {
            break;
        }
    }

    // Fallback: every face must end up labeled.
    std::vector<std::uint32_t> remaining;
    for (std::uint32_t f = 0; f < nf; ++f) {
        if (labels[f] == kUnlabeled) {
            remaining.push_back(f);
        }
    }
    if (!remaining.empty()) {
        if (config.fallback == FallbackPolicy::NearestLabeled) {
            // Level-synchronous flood from the labeled set; ties at equal hop
            // distance resolve to the lowest neighbor label.
            bool progressed = true;
            while (progressed && !remaining.empty()) {
                progressed = false;
                std::vector<std::uint32_t> still;
                std::vector<std::pair<std::uint32_t, std::uint32_t>> assign;
                for (std::uint32_t f : remaining) {
                    std::uint32_t best = kUnlabeled;
                    auto [begin, end] = graph.neighbors_of(f);
                    for (const std::uint32_t* n = begin; n != end; ++n) {
                        if (labels[*n] != kUnlabeled) {
                            best = std::min(best, labels[*n]);
                        }
                    }
                    if (best != kUnlabeled) {
                        assign.emplace_back(f, best);
                        progressed = true;
                    } else {
                        still.push_back(f);
                    }
                }
                for (const auto& [f, lab] : assign) {
                    labels[f] = lab;
                    confidences[f] = 0.0;
                }
                remaining = std::move(still);
            }
        }
        if (!remaining.empty()) {
            // Global majority (also the backstop for components the flood
            // cannot reach). Ties resolve to the lowest label id.
            std::vector<std::size_t> counts(num_classes, 0);
            for (std::uint32_t f = 0; f < nf; ++f) {
                if (labels[f] != kUnlabeled) {
                    ++counts[labels[f]];
                }
            }
            std::uint32_t majority = 0;
            std::size_t best_count = 0;
            for (std::uint32_t c = 0; c < num_classes; ++c) {
                if (counts[c] > best_count) {
                    best_count = counts[c];
                    majority = c;
                }
            }
            for (std::uint32_t f : remaining) {
                labels[f] = majority;
                confidences[f] = 0.0;
            }
        }
    }

    PatternLabeling out;
    out.labels = std::move(labels);
    out.confidences = std::move(confidences);
    return out;
}

PatternLabeling segment_mesh(const TriangleMesh& mesh, const ReferenceBank& bank,
                             const SegmenterConfig& config) {
    bank.validate();
    config.neighborhood.validate();
    config.propagation.validate();
    if (mesh.face_count() == 0) {
        throw Error("segment: mesh has no faces");
    }

    const FaceAttributes attrs = compute_face_attributes(mesh);
    const FaceAdjacencyGraph graph = build_face_adjacency(mesh, AdjacencyMode::VertexShared);
    const FaceAdjacencyGraph edge_graph = build_face_adjacency(mesh, AdjacencyMode::EdgeShared);
    const double mean_edge = mean_edge_length(mesh);
    const SpatialGrid grid(attrs.centroids, config.neighborhood.radius_multiplier * mean_edge);

    const std::size_t count =
        std::min<std::size_t>(std::max<std::uint32_t>(config.sample_count, 1), mesh.face_count());
    const std::vector<std::uint32_t> samples = sample_faces(mesh.face_count(), count, config.seed);

    std::vector<FaceDescriptor> descriptors;
    descriptors.reserve(samples.size());
    for (std::uint32_t f : samples) {
        const Neighborhood hood =
            collect_neighborhood(attrs, grid, graph, f, mean_edge, config.neighborhood);
        descriptors.push_back(apply_normalization(
            face_descriptor(mesh, attrs, edge_graph, f, hood.faces), bank.stats));
    }

    SparseLabels sparse = classify_sampled(samples, descriptors, bank, config.knn);

    // Keep only confident classifications as propagation seeds; if the gate
    // would discard everything, keep the full set rather than fail.
    SparseLabels gated;
    for (std::size_t i = 0; i < sparse.faces.size(); ++i) {
        if (sparse.confidences[i] >= config.min_keep_confidence) {
            gated.faces.push_back(sparse.faces[i]);
            gated.labels.push_back(sparse.labels[i]);
            gated.confidences.push_back(sparse.confidences[i]);
        }
    }
    const SparseLabels& seeds = gated.faces.empty() ? sparse : gated;

    std::vector<double> curvatures(mesh.face_count());
    for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
        curvatures[f] = face_curvature(attrs, edge_graph, f);
    }

    PatternLabeling labeling =
        propagate_labels(edge_graph, attrs, curvatures, mean_edge, seeds, config.propagation);
    labeling.catalog = bank.catalog;
    return labeling;
}

std::string descriptor_rows_csv(const std::vector<std::uint32_t>& face_ids,
                                const std::vector<FaceDescriptor>& rows) {
    if (face_ids.size() != rows.size()) {
        throw Error("descriptor csv: ids do not align with rows");
    }
    std::string out = "face_id,depth,log_area,surface_variation,curvature,normal_deviation\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += std::to_string(face_ids[i]);
        for (int c = 0; c < FaceDescriptor::kChannels; ++c) {
            out += ',';
            out += fmt_double(rows[i].channel(c));
        }
        out += '\n';
    }
    return out;
}

} // namespace relief
