#pragma once

#include "reliefkit/mesh.hpp"
#include "reliefkit/regions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relief {

// One catalog class: a name plus the procedural recipe that synthesizes it.
// Class 0 is plain (no generator). Distinct classes may reuse a generator at
// different parameters.
struct PatternClassDef {
    std::string name;
    std::string generator;  // heightfield pattern name; empty for plain
    double frequency = 6.0;
    double phase_u = 0.0;
    double phase_v = 0.0;
};

/// Nine classes: plain + eight patterns over the seven procedural
/// generators (the last class reuses bumps at a finer frequency). The final
/// two pattern classes are reserved: one appears only in the training split,
/// one only in the query split.
const std::vector<PatternClassDef>& default_pattern_classes();

struct DatasetConfig {
    std::string profile = "desk";  // desk | full
    std::uint64_t seed = 0;
    // 0 (or the empty vector) selects the profile default.
    std::uint32_t query_count = 0;
    std::uint32_t two_pattern_queries = 0xffffffffu;
    std::uint32_t retrieval_count = 0;
    std::uint32_t training_count = 0;
    std::uint32_t resolution = 0;  // per-mesh vertex-count target
    double amplitude_scale = 0.0;  // amplitude = scale x mesh bbox diagonal
    std::vector<std::string> bases;
    std::vector<PatternClassDef> classes;
    unsigned threads = 0;

    /// Fills profile defaults and validates; the catalog must keep at least
    /// one shared class after reserving the training-only and query-only
    /// classes.
    void resolve();
};

struct DatasetItem {
    std::string id;
    std::string split;  // query | retrieval | training
    std::string base_kind;
    std::string mesh_path;    // relative to the dataset root
    std::string labels_path;  // relative to the dataset root
    std::vector<std::uint32_t> region_patterns;  // region id -> class id
    double amplitude = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t vertex_count = 0;
    std::uint32_t face_count = 0;
};

struct DatasetManifest {
    std::vector<std::string> catalog;  // class id -> name
    std::vector<DatasetItem> items;    // query, then retrieval, then training

    std::vector<const DatasetItem*> split_items(const std::string& split) const;
};

/// Synthesizes every mesh of the configured corpus under out_dir
/// (meshes/<id>.obj, labels/<id>.csv, manifest.jsonl), deterministically for
/// a fixed (config, seed). Items generate in parallel; the manifest is
/// assembled in planning order.
DatasetManifest generate_dataset(const DatasetConfig& config, const std::string& out_dir);

/// JSON-lines round trip: first line holds the catalog record, then one
/// object per item.
std::string manifest_to_jsonl(const DatasetManifest& manifest);
DatasetManifest manifest_from_jsonl(const std::string& text);

void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

} // namespace relief
