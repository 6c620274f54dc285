#include "reliefkit/dataset.hpp"

#include "reliefkit/displacement.hpp"
#include "reliefkit/heightfield.hpp"
#include "reliefkit/io_util.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh_io.hpp"
#include "reliefkit/rng.hpp"
#include "reliefkit/surfaces.hpp"
#include "reliefkit/thread_pool.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>

namespace relief {

namespace {

using nlohmann::json;

struct ItemPlan {
    std::string id;
    std::string split;
    std::string base_kind;
    std::vector<std::uint32_t> classes;  // nonzero class ids, in region order
    bool add_plain_region = false;
    RegionStrategy strategy = RegionStrategy::AxisSplit;
    std::uint64_t seed = 0;
};

std::string item_name(const std::string& split, std::uint32_t index) {
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "_%03u", index);
    return split + buffer;
}

/// Draws a class from `pool` that is not already in `taken`.
std::uint32_t draw_class(Rng& rng, const std::vector<std::uint32_t>& pool,
                         const std::vector<std::uint32_t>& taken) {
    for (;;) {
        const std::uint32_t candidate = pool[rng.bounded(pool.size())];
        if (std::find(taken.begin(), taken.end(), candidate) == taken.end()) {
            return candidate;
        }
    }
}

std::vector<ItemPlan> plan_items(const DatasetConfig& config) {
    const std::uint32_t catalog_size = static_cast<std::uint32_t>(config.classes.size());
    const std::uint32_t training_only = catalog_size - 2;
    const std::uint32_t query_only = catalog_size - 1;
    std::vector<std::uint32_t> shared;
    for (std::uint32_t c = 1; c < training_only; ++c) {
        shared.push_back(c);
    }
    std::vector<std::uint32_t> trainable = shared;
    trainable.push_back(training_only);

    const Rng root(config.seed);
    std::vector<ItemPlan> plans;
    std::size_t global = 0;
    auto next_plan = [&](const std::string& split, std::uint32_t index) -> ItemPlan& {
        ItemPlan plan;
        plan.id = item_name(split, index);
        plan.split = split;
        plan.base_kind = config.bases[global % config.bases.size()];
        plan.strategy = global % 2 == 0 ? RegionStrategy::AxisSplit : RegionStrategy::GeodesicSeeds;
        plan.seed = root.child(global).next();
        ++global;
        plans.push_back(std::move(plan));
        return plans.back();
    };

    for (std::uint32_t i = 0; i < config.query_count; ++i) {
        ItemPlan& plan = next_plan("query", i);
        Rng rng = Rng(plan.seed).child(0);
        if (i < config.two_pattern_queries) {
            plan.classes.push_back(draw_class(rng, shared, {}));
            plan.classes.push_back(draw_class(rng, shared, plan.classes));
        } else if ((i - config.two_pattern_queries) % 2 == 1) {
            // Every second single-pattern query carries the query-only class,
            // so the exclusion protocol has something to drop.
            plan.classes.push_back(query_only);
        } else {
            plan.classes.push_back(draw_class(rng, shared, {}));
        }
        plan.add_plain_region = rng.bounded(2) == 0;
    }
    for (std::uint32_t i = 0; i < config.retrieval_count; ++i) {
        ItemPlan& plan = next_plan("retrieval", i);
        Rng rng = Rng(plan.seed).child(0);
        // Early items cycle the shared classes so each one is retrievable.
        if (i < shared.size()) {
            plan.classes.push_back(shared[i]);
        } else {
            plan.classes.push_back(draw_class(rng, shared, {}));
        }
        if (i % 2 == 1 && shared.size() >= 2) {
            plan.classes.push_back(draw_class(rng, shared, plan.classes));
        }
        plan.add_plain_region = rng.bounded(2) == 0;
    }
    for (std::uint32_t i = 0; i < config.training_count; ++i) {
        ItemPlan& plan = next_plan("training", i);
        Rng rng = Rng(plan.seed).child(0);
        if (i % 10 == 9) {
            // Fully plain mesh: the bank needs untextured rows too.
            plan.add_plain_region = true;
            continue;
        }
        if (i < trainable.size()) {
            plan.classes.push_back(trainable[i]);
        } else {
            plan.classes.push_back(draw_class(rng, trainable, {}));
        }
        if (i % 5 == 4 && trainable.size() >= 2) {
            plan.classes.push_back(draw_class(rng, trainable, plan.classes));
        }
        plan.add_plain_region = rng.bounded(2) == 0;
    }
    return plans;
}

} // namespace

const std::vector<PatternClassDef>& default_pattern_classes() {
    static const std::vector<PatternClassDef> kClasses = {
        {"plain", "", 0.0, 0.0, 0.0},
        {"bumps", "bumps", 6.0, 0.0, 0.0},
        {"ridges", "ridges", 7.0, 0.0, 0.0},
        {"bricks", "bricks", 5.0, 0.0, 0.0},
        {"scales", "scales", 6.0, 0.0, 0.0},
        {"weave", "weave", 6.0, 0.0, 0.0},
        {"cells", "cells", 5.0, 0.0, 0.0},
        {"bark", "bark-noise", 4.0, 0.0, 0.0},
        {"bumps-fine", "bumps", 12.0, 0.25, 0.25},
    };
    return kClasses;
}

void DatasetConfig::resolve() {
    if (profile != "desk" && profile != "full") {
        throw Error("generate: unknown profile '" + profile + "' (expected desk or full)");
    }
    const bool full = profile == "full";
    if (query_count == 0) {
        query_count = full ? 54 : 6;
    }
    if (two_pattern_queries == 0xffffffffu) {
        two_pattern_queries = full ? 40 : 4;
    }
    if (two_pattern_queries > query_count) {
        two_pattern_queries = query_count;
    }
    if (retrieval_count == 0) {
        retrieval_count = full ? 300 : 30;
    }
    if (training_count == 0) {
        training_count = full ? 700 : 70;
    }
    if (resolution == 0) {
        resolution = full ? 100000 : 10000;
    }
    if (amplitude_scale == 0.0) {
        amplitude_scale = 0.02;
    }
    if (bases.empty()) {
        bases = base_surface_kinds();
    }
    if (classes.empty()) {
        classes = default_pattern_classes();
    }
    if (classes.size() < 4) {
        throw Error(
            "generate: catalog too small for disjoint split partitioning "
            "(need plain plus at least three pattern classes)");
    }
    if (two_pattern_queries > 0 && classes.size() < 5) {
        throw Error(
            "generate: catalog too small for disjoint split partitioning "
            "(two-pattern queries need at least two shared classes)");
    }
    if (!classes[0].generator.empty()) {
        throw Error("generate: class 0 must be the plain class");
    }
    for (std::size_t c = 1; c < classes.size(); ++c) {
        if (classes[c].generator.empty()) {
            throw Error("generate: pattern class '" + classes[c].name + "' has no generator");
        }
    }
}

std::vector<const DatasetItem*> DatasetManifest::split_items(const std::string& split) const {
    std::vector<const DatasetItem*> out;
    for (const DatasetItem& item : items) {
        if (item.split == split) {
            out.push_back(&item);
        }
    }
    return out;
}

DatasetManifest generate_dataset(const DatasetConfig& config_in, const std::string& out_dir) {
    DatasetConfig config = config_in;
    config.resolve();
    const std::vector<ItemPlan> plans = plan_items(config);

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "meshes");
    fs::create_directories(fs::path(out_dir) / "labels");

    DatasetManifest manifest;
    manifest.catalog.reserve(config.classes.size());
    for (const PatternClassDef& def : config.classes) {
        manifest.catalog.push_back(def.name);
    }
    manifest.items.resize(plans.size());

    parallel_for(
        plans.size(),
        [&](std::size_t index) {
            const ItemPlan& plan = plans[index];
            const Rng item_rng(plan.seed);

            TriangleMesh base = make_base_surface(plan.base_kind, config.resolution);
            const std::uint32_t k = static_cast<std::uint32_t>(plan.classes.size()) +
                                    ((plan.add_plain_region || plan.classes.empty()) ? 1 : 0);

            RegionMask mask;
            if (k <= 1) {
                mask.region_ids.assign(base.face_count(), 0);
                mask.region_count = 1;
            } else {
                mask = plan_regions(base, k, item_rng.child(1).next(), plan.strategy);
            }

            ReliefSpec spec;
            spec.amplitude = config.amplitude_scale * bounding_box(base).diagonal();
            spec.uv_mode = UvMode::Stored;
            spec.region_pattern = plan.classes;
            if (plan.classes.empty() || plan.add_plain_region) {
                spec.region_pattern.push_back(0);  // plain region last
            }
            for (std::uint32_t cls : plan.classes) {
                const PatternClassDef& def = config.classes[cls];
                HeightFieldParams params;
                params.frequency = def.frequency;
                params.phase_u = def.phase_u;
                params.phase_v = def.phase_v;
                params.seed = item_rng.child(100 + cls).next();
                spec.patterns.emplace(cls, make_heightfield(def.generator, params));
            }

            ReliefResult relief = apply_relief(base, mask, spec);
            relief.labeling.catalog = manifest.catalog;

            DatasetItem item;
            item.id = plan.id;
            item.split = plan.split;
            item.base_kind = plan.base_kind;
            item.mesh_path = "meshes/" + plan.id + ".obj";
            item.labels_path = "labels/" + plan.id + ".csv";
            item.region_patterns = spec.region_pattern;
            item.amplitude = spec.amplitude;
            item.seed = plan.seed;
            item.vertex_count = static_cast<std::uint32_t>(relief.mesh.vertex_count());
            item.face_count = static_cast<std::uint32_t>(relief.mesh.face_count());

            save_mesh_obj((fs::path(out_dir) / item.mesh_path).string(), relief.mesh);
            save_labeling((fs::path(out_dir) / item.labels_path).string(), relief.labeling);
            manifest.items[index] = std::move(item);
        },
        config.threads);

    save_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest);
    return manifest;
}

std::string manifest_to_jsonl(const DatasetManifest& manifest) {
    std::string out;
    {
        json header;
        header["catalog"] = manifest.catalog;
        out += header.dump();
        out += '\n';
    }
    for (const DatasetItem& item : manifest.items) {
        json record;
        record["id"] = item.id;
        record["split"] = item.split;
        record["base"] = item.base_kind;
        record["mesh"] = item.mesh_path;
        record["labels"] = item.labels_path;
        record["region_patterns"] = item.region_patterns;
        record["amplitude"] = item.amplitude;
        record["seed"] = item.seed;
        record["vertices"] = item.vertex_count;
        record["faces"] = item.face_count;
        out += record.dump();
        out += '\n';
    }
    return out;
}

DatasetManifest manifest_from_jsonl(const std::string& text) {
    DatasetManifest manifest;
    std::size_t start = 0;
    bool saw_header = false;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty() || line == "\r") {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(std::string("manifest: malformed JSON line: ") + e.what());
        }
        try {
            if (!saw_header) {
                if (!record.contains("catalog")) {
                    throw Error("manifest: first line must carry the catalog record");
                }
                manifest.catalog = record.at("catalog").get<std::vector<std::string>>();
                saw_header = true;
                continue;
            }
            DatasetItem item;
            item.id = record.at("id").get<std::string>();
            item.split = record.at("split").get<std::string>();
            item.base_kind = record.at("base").get<std::string>();
            item.mesh_path = record.at("mesh").get<std::string>();
            item.labels_path = record.at("labels").get<std::string>();
            item.region_patterns = record.at("region_patterns").get<std::vector<std::uint32_t>>();
            item.amplitude = record.at("amplitude").get<double>();
            item.seed = record.at("seed").get<std::uint64_t>();
            item.vertex_count = record.at("vertices").get<std::uint32_t>();
            item.face_count = record.at("faces").get<std::uint32_t>();
            manifest.items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw Error(std::string("manifest: missing or mistyped field: ") + e.what());
        }
    }
    if (!saw_header) {
        throw Error("manifest: empty manifest");
    }
    return manifest;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    write_file_atomic(path, manifest_to_jsonl(manifest));
}

DatasetManifest load_manifest(const std::string& path) {
    return manifest_from_jsonl(read_file(path));
}

} // namespace relief
