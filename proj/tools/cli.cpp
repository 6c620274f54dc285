#include "cli.hpp"

#include "reliefkit/dataset.hpp"
#include "reliefkit/features.hpp"
#include "reliefkit/io_util.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh_io.hpp"
#include "reliefkit/metrics.hpp"
#include "reliefkit/multiview.hpp"
#include "reliefkit/rng.hpp"
#include "reliefkit/segmentation.hpp"
#include "reliefkit/signature.hpp"
#include "reliefkit/spatial_grid.hpp"
#include "reliefkit/thread_pool.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace relief {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Usage problems detected after flag parsing (missing required inputs).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Flat key=value config files. Flags that were given on the command line win;
// file values fill the rest. Unknown keys are rejected by name.

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    const std::string text = read_file(path);
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error("config: line " + std::to_string(line_no) + " is not key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw Error("config: line " + std::to_string(line_no) + " has an empty key");
        }
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

// Typed setters used when applying config-file values.
void set_from_string(const std::string& key, const std::string& value, std::string& out) {
    (void)key;
    out = value;
}

void set_from_string(const std::string& key, const std::string& value, std::uint64_t& out) {
    try {
        std::size_t used = 0;
        out = std::stoull(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
    } catch (const std::exception&) {
        throw Error("config: key '" + key + "' expects an unsigned integer, got '" + value + "'");
    }
}

void set_from_string(const std::string& key, const std::string& value, std::uint32_t& out) {
    std::uint64_t wide = 0;
    set_from_string(key, value, wide);
    out = static_cast<std::uint32_t>(wide);
}

void set_from_string(const std::string& key, const std::string& value, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
    } catch (const std::exception&) {
        throw Error("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

void set_from_string(const std::string& key, const std::string& value, bool& out) {
    if (value == "true" || value == "1" || value == "yes") {
        out = true;
    } else if (value == "false" || value == "0" || value == "no") {
        out = false;
    } else {
        throw Error("config: key '" + key + "' expects true/false, got '" + value + "'");
    }
}

// Binds config keys to (CLI option, variable) pairs so file values only apply
// when the flag was absent.
class ConfigBinder {
public:
    explicit ConfigBinder(CLI::App* command) : command_(command) {}

    template <typename T>
    void bind(const std::string& key, const std::string& flag, T* target) {
        appliers_[key] = [this, flag, target, key](const std::string& value) {
            const CLI::Option* opt = command_->get_option(flag);
            if (opt != nullptr && opt->count() > 0) {
                return;  // command line wins
            }
            set_from_string(key, value, *target);
        };
    }

    void apply(const std::map<std::string, std::string>& values) const {
        for (const auto& [key, value] : values) {
            auto it = appliers_.find(key);
            if (it == appliers_.end()) {
                throw Error("config: unknown key '" + key + "'");
            }
            it->second(value);
        }
    }

private:
    CLI::App* command_;
    std::map<std::string, std::function<void(const std::string&)>> appliers_;
};

std::string default_out_root() {
    const char* env = std::getenv("RELIEFKIT_OUT");
    return env != nullptr ? std::string(env) : std::string();
}

std::string require_out(std::string value, const std::string& command) {
    if (!value.empty()) {
        return value;
    }
    value = default_out_root();
    if (value.empty()) {
        throw UsageError(command + ": --out is required (or set RELIEFKIT_OUT)");
    }
    return value;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

json json_of_labeling_histogram(const PatternLabeling& labeling) {
    std::map<std::string, std::size_t> histogram;
    for (std::uint32_t label : labeling.labels) {
        ++histogram[std::to_string(label)];
    }
    return json(histogram);
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces.

struct DescriptorPipeline {
    FaceAttributes attrs;
    FaceAdjacencyGraph vertex_graph;
    FaceAdjacencyGraph edge_graph;
    double mean_edge = 0.0;

    explicit DescriptorPipeline(const TriangleMesh& mesh)
        : attrs(compute_face_attributes(mesh)),
          vertex_graph(build_face_adjacency(mesh, AdjacencyMode::VertexShared)),
          edge_graph(build_face_adjacency(mesh, AdjacencyMode::EdgeShared)),
          mean_edge(mean_edge_length(mesh)) {}
};

std::vector<FaceDescriptor> normalized_descriptors(const TriangleMesh& mesh,
                                                   const DescriptorPipeline& pipe,
                                                   const std::vector<std::uint32_t>& faces,
                                                   const ChannelStats& stats,
                                                   const NeighborhoodParams& params) {
    const SpatialGrid grid(pipe.attrs.centroids, params.radius_multiplier * pipe.mean_edge);
    std::vector<FaceDescriptor> out(faces.size());
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const Neighborhood hood =
            collect_neighborhood(pipe.attrs, grid, pipe.vertex_graph, faces[i], pipe.mean_edge,
                                 params);
        out[i] = apply_normalization(
            face_descriptor(mesh, pipe.attrs, pipe.edge_graph, faces[i], hood.faces), stats);
    }
    return out;
}

/// Sampled faces for signature building; every label present in the dense
/// labeling keeps at least one sampled face (lowest face id), so region
/// aggregation never starves.
std::vector<std::uint32_t> signature_sample(const PatternLabeling& labeling, std::size_t count,
                                            std::uint64_t seed) {
    const std::size_t nf = labeling.labels.size();
    std::vector<std::uint32_t> samples =
        sample_faces(nf, std::min<std::size_t>(std::max<std::size_t>(count, 1), nf), seed);
    std::set<std::uint32_t> sampled_labels;
    for (std::uint32_t f : samples) {
        sampled_labels.insert(labeling.labels[f]);
    }
    std::map<std::uint32_t, std::uint32_t> first_face_of_label;
    for (std::size_t f = 0; f < nf; ++f) {
        first_face_of_label.emplace(labeling.labels[f], static_cast<std::uint32_t>(f));
    }
    bool changed = false;
    for (const auto& [label, face] : first_face_of_label) {
        if (sampled_labels.count(label) == 0) {
            samples.push_back(face);
            changed = true;
        }
    }
    if (changed) {
        std::sort(samples.begin(), samples.end());
        samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
    }
    return samples;
}

ModelSignature signature_of_item(const DatasetItem& item, const std::string& dataset_dir,
                                 const std::string& labels_path, const ReferenceBank& bank,
                                 std::size_t sample_count, const NeighborhoodParams& params) {
    const LoadedMesh loaded = load_mesh((fs::path(dataset_dir) / item.mesh_path).string());
    PatternLabeling labeling = load_labeling(labels_path);
    if (labeling.labels.size() != loaded.mesh.face_count()) {
        throw Error("retrieve: labeling for '" + item.id + "' does not match its mesh");
    }
    const DescriptorPipeline pipe(loaded.mesh);
    const std::vector<std::uint32_t> samples =
        signature_sample(labeling, sample_count, Rng(item.seed).child(7).next());
    const std::vector<FaceDescriptor> descriptors =
        normalized_descriptors(loaded.mesh, pipe, samples, bank.stats, params);
    ModelSignature sig = build_signature(labeling, samples, descriptors, /*include_plain=*/true);
    sig.model_id = item.id;
    return sig;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    std::string out;
    std::string config_path;
    DatasetConfig dataset;
};

int cmd_generate(GenerateOptions& opt, const ConfigBinder& binder,
                 const std::string& bases_csv) {
    if (!opt.config_path.empty()) {
        binder.apply(parse_config_file(opt.config_path));
    }
    opt.out = require_out(opt.out, "generate");
    if (!bases_csv.empty()) {
        opt.dataset.bases = split_csv_list(bases_csv);
    }
    const DatasetManifest manifest = generate_dataset(opt.dataset, opt.out);

    json splits;
    for (const char* split : {"query", "retrieval", "training"}) {
        splits[split] = manifest.split_items(split).size();
    }
    json summary;
    summary["command"] = "generate";
    summary["config"] = {
        {"amplitude_scale", opt.dataset.amplitude_scale},
        {"bases", opt.dataset.bases},
        {"profile", opt.dataset.profile},
        {"queries", opt.dataset.query_count},
        {"resolution", opt.dataset.resolution},
        {"retrieval", opt.dataset.retrieval_count},
        {"seed", opt.dataset.seed},
        {"training", opt.dataset.training_count},
        {"two_pattern_queries", opt.dataset.two_pattern_queries},
    };
    summary["items"] = manifest.items.size();
    summary["splits"] = splits;
    write_file_atomic((fs::path(opt.out) / "generate_summary.json").string(),
                      summary.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOptions {
    std::string dataset_dir;
    std::string bank_path;
    std::string out_dir;
    std::string splits = "query,retrieval";
    std::string config_path;
    bool build_bank = false;
    bool resume = false;
    std::uint32_t samples = 2000;
    std::uint32_t bank_samples = 300;
    std::uint32_t knn = 5;
    double tau = 0.4;
    double confidence_gate = 0.6;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

int cmd_segment(SegmentOptions& opt, const ConfigBinder& binder) {
    if (!opt.config_path.empty()) {
        binder.apply(parse_config_file(opt.config_path));
    }
    if (opt.dataset_dir.empty()) {
        throw UsageError("segment: --dataset is required");
    }
    if (opt.bank_path.empty()) {
        throw UsageError("segment: --bank is required");
    }
    const DatasetManifest manifest =
        load_manifest((fs::path(opt.dataset_dir) / "manifest.jsonl").string());

    if (opt.build_bank) {
        const std::vector<const DatasetItem*> training = manifest.split_items("training");
        if (training.empty()) {
            throw Error("segment: manifest has no training items to build a bank from");
        }
        std::vector<TriangleMesh> meshes(training.size());
        std::vector<PatternLabeling> labelings(training.size());
        parallel_for(
            training.size(),
            [&](std::size_t i) {
                meshes[i] =
                    load_mesh((fs::path(opt.dataset_dir) / training[i]->mesh_path).string()).mesh;
                labelings[i] = load_labeling(
                    (fs::path(opt.dataset_dir) / training[i]->labels_path).string());
            },
            opt.threads);
        std::vector<BankTrainingMesh> pairs(training.size());
        for (std::size_t i = 0; i < training.size(); ++i) {
            pairs[i] = {&meshes[i], &labelings[i]};
        }
        ReferenceBank bank =
            build_reference_bank(pairs, manifest.catalog, opt.bank_samples, opt.seed);

        // Freeze the retrieval normalization diameter from training
        // signatures built with ground-truth labels.
        std::vector<ModelSignature> signatures(training.size());
        parallel_for(
            training.size(),
            [&](std::size_t i) {
                const DescriptorPipeline pipe(meshes[i]);
                const std::vector<std::uint32_t> samples = signature_sample(
                    labelings[i], opt.bank_samples, Rng(training[i]->seed).child(7).next());
                const std::vector<FaceDescriptor> descriptors = normalized_descriptors(
                    meshes[i], pipe, samples, bank.stats, NeighborhoodParams{});
                signatures[i] =
                    build_signature(labelings[i], samples, descriptors, /*include_plain=*/true);
                signatures[i].model_id = training[i]->id;
            },
            opt.threads);
        bank.normalization_diameter = signature_normalization_diameter(signatures);
        save_reference_bank(opt.bank_path, bank);

        json summary;
        summary["command"] = "segment --build-bank";
        summary["bank"] = opt.bank_path;
        summary["classes"] = bank.catalog;
        summary["normalization_diameter"] = bank.normalization_diameter;
        summary["rows"] = bank.descriptors.size();
        summary["samples_per_mesh"] = opt.bank_samples;
        summary["seed"] = opt.seed;
        summary["training_meshes"] = training.size();
        write_file_atomic(opt.bank_path + ".summary.json", summary.dump(2) + "\n");
        return 0;
    }

    const ReferenceBank bank = load_reference_bank(opt.bank_path);
    if (opt.out_dir.empty()) {
        opt.out_dir = (fs::path(opt.dataset_dir) / "predicted").string();
    }
    fs::create_directories(opt.out_dir);

    std::vector<const DatasetItem*> work;
    for (const std::string& split : split_csv_list(opt.splits)) {
        const auto items = manifest.split_items(split);
        if (items.empty()) {
            throw Error("segment: manifest has no items in split '" + split + "'");
        }
        work.insert(work.end(), items.begin(), items.end());
    }

    std::vector<json> lines(work.size());
    parallel_for(
        work.size(),
        [&](std::size_t i) {
            const DatasetItem& item = *work[i];
            const std::string out_path = (fs::path(opt.out_dir) / (item.id + ".csv")).string();
            PatternLabeling labeling;
            if (opt.resume && fs::exists(out_path)) {
                labeling = load_labeling(out_path);
            } else {
                const LoadedMesh loaded =
                    load_mesh((fs::path(opt.dataset_dir) / item.mesh_path).string());
                SegmenterConfig config;
                config.sample_count = opt.samples;
                config.knn = opt.knn;
                config.min_keep_confidence = opt.confidence_gate;
                config.propagation.tau = opt.tau;
                config.seed = Rng(item.seed).child(9).next() ^ opt.seed;
                labeling = segment_mesh(loaded.mesh, bank, config);
                save_labeling(out_path, labeling);
            }
            json line;
            line["id"] = item.id;
            line["labels"] = json_of_labeling_histogram(labeling);
            lines[i] = std::move(line);
        },
        opt.threads);

    std::string report;
    {
        json header;
        header["command"] = "segment";
        header["config"] = {
            {"confidence_gate", opt.confidence_gate}, {"knn", opt.knn},
            {"samples", opt.samples},                 {"seed", opt.seed},
            {"splits", opt.splits},                   {"tau", opt.tau},
        };
        report += header.dump();
        report += '\n';
    }
    for (const json& line : lines) {
        report += line.dump();
        report += '\n';
    }
    write_file_atomic((fs::path(opt.out_dir) / "segment_summary.jsonl").string(), report);
    return 0;
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveOptions {
    std::string dataset_dir;
    std::string method;  // signature | multiview
    std::string bank_path;
    std::string labels_dir;  // predicted labels; empty selects dataset/predicted
    std::string out_path;
    std::string config_path;
    bool use_truth_labels = false;
    std::uint32_t samples = 2000;
    std::uint32_t render_resolution = 256;
    unsigned threads = 0;
};

int cmd_retrieve(RetrieveOptions& opt, const ConfigBinder& binder) {
    if (!opt.config_path.empty()) {
        binder.apply(parse_config_file(opt.config_path));
    }
    if (opt.dataset_dir.empty()) {
        throw UsageError("retrieve: --dataset is required");
    }
    if (opt.method != "signature" && opt.method != "multiview") {
        throw UsageError("retrieve: --method must be signature or multiview");
    }
    const DatasetManifest manifest =
        load_manifest((fs::path(opt.dataset_dir) / "manifest.jsonl").string());
    const std::vector<const DatasetItem*> queries = manifest.split_items("query");
    const std::vector<const DatasetItem*> targets = manifest.split_items("retrieval");
    if (queries.empty() || targets.empty()) {
        throw Error("retrieve: manifest needs nonempty query and retrieval splits");
    }
    if (opt.out_path.empty()) {
        opt.out_path =
            (fs::path(opt.dataset_dir) / ("membership_" + opt.method + ".csv")).string();
    }

    double d_max = 0.0;
    MembershipMatrix matrix;
    if (opt.method == "signature") {
        if (opt.bank_path.empty()) {
            throw UsageError("retrieve: --bank is required for the signature method");
        }
        const ReferenceBank bank = load_reference_bank(opt.bank_path);
        if (!(bank.normalization_diameter > 0.0)) {
            throw Error(
                "retrieve: bank has no normalization diameter (rebuild with segment "
                "--build-bank)");
        }
        d_max = bank.normalization_diameter;
        if (opt.labels_dir.empty()) {
            opt.labels_dir = (fs::path(opt.dataset_dir) / "predicted").string();
        }
        auto labels_path_of = [&](const DatasetItem& item) {
            if (opt.use_truth_labels) {
                return (fs::path(opt.dataset_dir) / item.labels_path).string();
            }
            return (fs::path(opt.labels_dir) / (item.id + ".csv")).string();
        };

        std::vector<ModelSignature> query_sigs(queries.size());
        std::vector<ModelSignature> target_sigs(targets.size());
        parallel_for(
            queries.size() + targets.size(),
            [&](std::size_t i) {
                if (i < queries.size()) {
                    query_sigs[i] = signature_of_item(*queries[i], opt.dataset_dir,
                                                      labels_path_of(*queries[i]), bank,
                                                      opt.samples, NeighborhoodParams{});
                } else {
                    const std::size_t t = i - queries.size();
                    target_sigs[t] = signature_of_item(*targets[t], opt.dataset_dir,
                                                       labels_path_of(*targets[t]), bank,
                                                       opt.samples, NeighborhoodParams{});
                }
            },
            opt.threads);
        matrix = build_membership_matrix(query_sigs, target_sigs, d_max);
    } else {
        std::vector<std::vector<double>> query_desc(queries.size());
        std::vector<std::vector<double>> target_desc(targets.size());
        parallel_for(
            queries.size() + targets.size(),
            [&](std::size_t i) {
                const DatasetItem& item =
                    i < queries.size() ? *queries[i] : *targets[i - queries.size()];
                const LoadedMesh loaded =
                    load_mesh((fs::path(opt.dataset_dir) / item.mesh_path).string());
                const auto views = render_views(loaded.mesh, opt.render_resolution);
                auto descriptor = view_descriptor(views);
                if (i < queries.size()) {
                    query_desc[i] = std::move(descriptor);
                } else {
                    target_desc[i - queries.size()] = std::move(descriptor);
                }
            },
            opt.threads);
        std::vector<std::vector<double>> corpus = query_desc;
        corpus.insert(corpus.end(), target_desc.begin(), target_desc.end());
        d_max = multiview_normalization_diameter(corpus);
        std::vector<std::string> query_ids, target_ids;
        for (const DatasetItem* q : queries) {
            query_ids.push_back(q->id);
        }
        for (const DatasetItem* t : targets) {
            target_ids.push_back(t->id);
        }
        matrix = multiview_membership(query_ids, query_desc, target_ids, target_desc, d_max);
    }

    save_membership(opt.out_path, matrix);
    json summary;
    summary["command"] = "retrieve";
    summary["config"] = {
        {"dataset", opt.dataset_dir},
        {"method", opt.method},
        {"render_resolution", opt.render_resolution},
        {"samples", opt.samples},
        {"use_truth_labels", opt.use_truth_labels},
    };
    summary["d_max"] = d_max;
    summary["membership"] = opt.out_path;
    summary["queries"] = matrix.query_ids.size();
    summary["targets"] = matrix.target_ids.size();
    write_file_atomic(opt.out_path + ".summary.json", summary.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string membership_path;
    std::string truth_dir;
    std::string out_path;
    std::string roc_path;
    std::string config_path;
    bool graded_ndcg = false;
};

int cmd_evaluate(EvaluateOptions& opt, const ConfigBinder& binder) {
    if (!opt.config_path.empty()) {
        binder.apply(parse_config_file(opt.config_path));
    }
    if (opt.membership_path.empty()) {
        throw UsageError("evaluate: --membership is required");
    }
    if (opt.truth_dir.empty()) {
        throw UsageError("evaluate: --truth is required");
    }
    if (opt.out_path.empty()) {
        opt.out_path = opt.membership_path + ".metrics.jsonl";
    }

    const MembershipMatrix membership = load_membership(opt.membership_path);
    auto load_truth = [&](const std::string& id) {
        const fs::path direct = fs::path(opt.truth_dir) / (id + ".csv");
        if (fs::exists(direct)) {
            return load_labeling(direct.string());
        }
        // Also accept a dataset root (labels under labels/).
        const fs::path nested = fs::path(opt.truth_dir) / "labels" / (id + ".csv");
        if (fs::exists(nested)) {
            return load_labeling(nested.string());
        }
        throw Error("evaluate: no truth labels for id '" + id + "' under " + opt.truth_dir);
    };
    std::vector<PatternLabeling> query_truth, target_truth;
    query_truth.reserve(membership.query_ids.size());
    for (const std::string& id : membership.query_ids) {
        query_truth.push_back(load_truth(id));
    }
    target_truth.reserve(membership.target_ids.size());
    for (const std::string& id : membership.target_ids) {
        target_truth.push_back(load_truth(id));
    }

    RelevanceMatrix relevance = relevance_from_labels(query_truth, target_truth);
    relevance.query_ids = membership.query_ids;
    relevance.target_ids = membership.target_ids;
    const FilteredEvaluation filtered = filter_queries(membership, relevance);

    RetrievalMetrics metrics;
    if (opt.graded_ndcg) {
        std::vector<PatternLabeling> kept_truth;
        for (std::size_t row : filtered.kept_rows) {
            kept_truth.push_back(query_truth[row]);
        }
        const std::vector<double> gains = shared_pattern_counts(kept_truth, target_truth);
        metrics = retrieval_metrics(filtered.membership, filtered.relevance, &gains);
    } else {
        metrics = retrieval_metrics(filtered.membership, filtered.relevance);
    }

    std::string report;
    {
        json header;
        header["command"] = "evaluate";
        header["config"] = {
            {"graded_ndcg", opt.graded_ndcg},
            {"membership", opt.membership_path},
            {"truth", opt.truth_dir},
        };
        header["dropped_queries"] = membership.query_ids.size() - filtered.kept_rows.size();
        report += header.dump();
        report += '\n';
        json values;
        values["auc"] = metrics.auc;
        values["e_measure"] = metrics.e_measure;
        values["ft"] = metrics.ft;
        values["map"] = metrics.map;
        values["ndcg"] = metrics.ndcg;
        values["nn"] = metrics.nn;
        values["retained_queries"] = metrics.retained_queries;
        values["st"] = metrics.st;
        report += values.dump();
        report += '\n';
    }
    write_file_atomic(opt.out_path, report);
    if (!opt.roc_path.empty()) {
        write_file_atomic(opt.roc_path, roc_to_csv(metrics.roc));
    }
    std::fputs(report.c_str(), stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// export

struct ExportOptions {
    std::string mesh_path;
    std::string labels_path;
    std::string out_path;
    std::string config_path;
    bool binary = false;
};

int cmd_export(ExportOptions& opt, const ConfigBinder& binder) {
    if (!opt.config_path.empty()) {
        binder.apply(parse_config_file(opt.config_path));
    }
    if (opt.mesh_path.empty() || opt.labels_path.empty() || opt.out_path.empty()) {
        throw UsageError("export: --mesh, --labels, and --out are required");
    }
    const LoadedMesh loaded = load_mesh(opt.mesh_path);
    const PatternLabeling labeling = load_labeling(opt.labels_path);
    if (labeling.labels.size() != loaded.mesh.face_count()) {
        throw Error("export: labeling does not match mesh face count");
    }
    export_labeled_mesh(opt.out_path, loaded.mesh, labeling,
                        opt.binary ? PlyEncoding::BinaryLittleEndian : PlyEncoding::Ascii);
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"relief-pattern mesh synthesis, segmentation, and retrieval toolkit",
                 "reliefkit"};
    app.require_subcommand(1);

    // generate ---------------------------------------------------------
    GenerateOptions gen;
    std::string gen_bases_csv;
    CLI::App* generate = app.add_subcommand("generate", "Synthesize a relief-pattern corpus");
    generate->add_option("--out", gen.out, "Dataset output directory");
    generate->add_option("--profile", gen.dataset.profile, "desk or full")
        ->check(CLI::IsMember({"desk", "full"}));
    generate->add_option("--seed", gen.dataset.seed, "Root seed");
    generate->add_option("--queries", gen.dataset.query_count, "Query mesh count");
    generate->add_option("--two-pattern", gen.dataset.two_pattern_queries,
                         "Two-pattern query count");
    generate->add_option("--retrieval", gen.dataset.retrieval_count, "Retrieval mesh count");
    generate->add_option("--training", gen.dataset.training_count, "Training mesh count");
    generate->add_option("--resolution", gen.dataset.resolution, "Vertex-count target per mesh");
    generate->add_option("--amplitude-scale", gen.dataset.amplitude_scale,
                         "Displacement amplitude as a fraction of the bbox diagonal");
    generate->add_option("--bases", gen_bases_csv, "Comma-separated base-surface kinds");
    generate->add_option("--threads", gen.dataset.threads, "Worker threads (0 = auto)");
    generate->add_option("--config", gen.config_path, "key=value config file");
    ConfigBinder gen_binder(generate);
    gen_binder.bind("out", "--out", &gen.out);
    gen_binder.bind("profile", "--profile", &gen.dataset.profile);
    gen_binder.bind("seed", "--seed", &gen.dataset.seed);
    gen_binder.bind("queries", "--queries", &gen.dataset.query_count);
    gen_binder.bind("two_pattern", "--two-pattern", &gen.dataset.two_pattern_queries);
    gen_binder.bind("retrieval", "--retrieval", &gen.dataset.retrieval_count);
    gen_binder.bind("training", "--training", &gen.dataset.training_count);
    gen_binder.bind("resolution", "--resolution", &gen.dataset.resolution);
    gen_binder.bind("amplitude_scale", "--amplitude-scale", &gen.dataset.amplitude_scale);
    gen_binder.bind("bases", "--bases", &gen_bases_csv);
    gen_binder.bind("threads", "--threads", &gen.dataset.threads);

    // segment ----------------------------------------------------------
    SegmentOptions seg;
    CLI::App* segment = app.add_subcommand("segment", "Label faces by relief pattern");
    segment->add_option("--dataset", seg.dataset_dir, "Dataset root (with manifest.jsonl)");
    segment->add_option("--bank", seg.bank_path, "Reference bank file");
    segment->add_option("--out", seg.out_dir, "Predicted-labels directory");
    segment->add_option("--split", seg.splits, "Comma-separated splits to segment");
    segment->add_flag("--build-bank", seg.build_bank,
                      "Build the bank from the training split instead of segmenting");
    segment->add_flag("--resume", seg.resume, "Skip meshes with existing predictions");
    segment->add_option("--samples", seg.samples, "Sampled faces per mesh");
    segment->add_option("--bank-samples", seg.bank_samples,
                        "Sampled faces per training mesh for the bank");
    segment->add_option("--knn", seg.knn, "Nearest reference rows per classification");
    segment->add_option("--tau", seg.tau, "Propagation vote-share threshold");
    segment->add_option("--confidence-gate", seg.confidence_gate,
                        "Minimum classifier confidence for a propagation seed");
    segment->add_option("--seed", seg.seed, "Sampling seed");
    segment->add_option("--threads", seg.threads, "Worker threads (0 = auto)");
    segment->add_option("--config", seg.config_path, "key=value config file");
    ConfigBinder seg_binder(segment);
    seg_binder.bind("dataset", "--dataset", &seg.dataset_dir);
    seg_binder.bind("bank", "--bank", &seg.bank_path);
    seg_binder.bind("out", "--out", &seg.out_dir);
    seg_binder.bind("split", "--split", &seg.splits);
    seg_binder.bind("samples", "--samples", &seg.samples);
    seg_binder.bind("bank_samples", "--bank-samples", &seg.bank_samples);
    seg_binder.bind("knn", "--knn", &seg.knn);
    seg_binder.bind("tau", "--tau", &seg.tau);
    seg_binder.bind("confidence_gate", "--confidence-gate", &seg.confidence_gate);
    seg_binder.bind("seed", "--seed", &seg.seed);
    seg_binder.bind("threads", "--threads", &seg.threads);

    // retrieve ----------------------------------------------------------
    RetrieveOptions ret;
    CLI::App* retrieve = app.add_subcommand("retrieve", "Score queries against retrieval targets");
    retrieve->add_option("--dataset", ret.dataset_dir, "Dataset root (with manifest.jsonl)");
    retrieve->add_option("--method", ret.method, "signature or multiview")
        ->check(CLI::IsMember({"signature", "multiview"}));
    retrieve->add_option("--bank", ret.bank_path, "Reference bank (signature method)");
    retrieve->add_option("--labels", ret.labels_dir, "Predicted-labels directory");
    retrieve->add_option("--out", ret.out_path, "Membership CSV path");
    retrieve->add_flag("--use-truth-labels", ret.use_truth_labels,
                       "Score ground-truth labelings instead of predictions");
    retrieve->add_option("--samples", ret.samples, "Sampled faces per mesh (signature method)");
    retrieve->add_option("--resolution", ret.render_resolution,
                         "Render resolution (multiview method)");
    retrieve->add_option("--threads", ret.threads, "Worker threads (0 = auto)");
    retrieve->add_option("--config", ret.config_path, "key=value config file");
    ConfigBinder ret_binder(retrieve);
    ret_binder.bind("dataset", "--dataset", &ret.dataset_dir);
    ret_binder.bind("method", "--method", &ret.method);
    ret_binder.bind("bank", "--bank", &ret.bank_path);
    ret_binder.bind("labels", "--labels", &ret.labels_dir);
    ret_binder.bind("out", "--out", &ret.out_path);
    ret_binder.bind("use_truth_labels", "--use-truth-labels", &ret.use_truth_labels);
    ret_binder.bind("samples", "--samples", &ret.samples);
    ret_binder.bind("resolution", "--resolution", &ret.render_resolution);
    ret_binder.bind("threads", "--threads", &ret.threads);

    // evaluate ----------------------------------------------------------
    EvaluateOptions eval;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a membership matrix");
    evaluate->add_option("--membership", eval.membership_path, "Membership CSV");
    evaluate->add_option("--truth", eval.truth_dir,
                         "Directory of ground-truth label CSVs (or a dataset root)");
    evaluate->add_option("--out", eval.out_path, "Metrics report path (JSON lines)");
    evaluate->add_option("--roc", eval.roc_path, "ROC points CSV path");
    evaluate->add_flag("--graded-ndcg", eval.graded_ndcg,
                       "Use shared-pattern counts as nDCG gains");
    evaluate->add_option("--config", eval.config_path, "key=value config file");
    ConfigBinder eval_binder(evaluate);
    eval_binder.bind("membership", "--membership", &eval.membership_path);
    eval_binder.bind("truth", "--truth", &eval.truth_dir);
    eval_binder.bind("out", "--out", &eval.out_path);
    eval_binder.bind("roc", "--roc", &eval.roc_path);
    eval_binder.bind("graded_ndcg", "--graded-ndcg", &eval.graded_ndcg);

    // export ------------------------------------------------------------
    ExportOptions exp;
    CLI::App* exporter = app.add_subcommand("export", "Write a label-colored PLY");
    exporter->add_option("--mesh", exp.mesh_path, "Input mesh (OBJ or PLY)");
    exporter->add_option("--labels", exp.labels_path, "Labeling CSV");
    exporter->add_option("--out", exp.out_path, "Output PLY path");
    exporter->add_flag("--binary", exp.binary, "Binary little-endian PLY");
    exporter->add_option("--config", exp.config_path, "key=value config file");
    ConfigBinder exp_binder(exporter);
    exp_binder.bind("mesh", "--mesh", &exp.mesh_path);
    exp_binder.bind("labels", "--labels", &exp.labels_path);
    exp_binder.bind("out", "--out", &exp.out_path);
    exp_binder.bind("binary", "--binary", &exp.binary);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("reliefkit");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(argv_storage.size());
    for (const std::string& arg : argv_storage) {
        argv.push_back(arg.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(gen, gen_binder, gen_bases_csv);
        }
        if (segment->parsed()) {
            return cmd_segment(seg, seg_binder);
        }
        if (retrieve->parsed()) {
            return cmd_retrieve(ret, ret_binder);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(eval, eval_binder);
        }
        if (exporter->parsed()) {
            return cmd_export(exp, exp_binder);
        }
        std::fputs("reliefkit: no subcommand given\n", stderr);
        return 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "reliefkit: %s\n", e.what());
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "reliefkit: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "reliefkit: %s\n", e.what());
        return 2;
    }
}

} // namespace relief
