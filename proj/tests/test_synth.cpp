#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"

#include "reliefkit/adjacency.hpp"
#include "reliefkit/dataset.hpp"
#include "reliefkit/displacement.hpp"
#include "reliefkit/heightfield.hpp"
#include "reliefkit/io_util.hpp"
#include "reliefkit/labeling.hpp"
#include "reliefkit/mesh_io.hpp"
#include "reliefkit/regions.hpp"
#include "reliefkit/rng.hpp"
#include "reliefkit/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

using namespace relief;

namespace {

const std::vector<std::string> kGenerators = {"bumps",  "ridges", "bricks", "scales",
                                              "weave",  "cells",  "bark-noise"};

std::size_t euler_characteristic(const TriangleMesh& mesh) {
    return mesh.vertex_count() + mesh.face_count() - unique_edges(mesh).size();
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("base surfaces: grid hits the vertex target exactly") {
    const TriangleMesh grid = make_base_surface("grid", 10000);
    CHECK(grid.vertex_count() == 10000);           // 100 x 100
    CHECK(grid.face_count() == 2 * 99 * 99);
    CHECK(grid.has_uvs());
    CHECK(grid.has_normals());
}

TEST_CASE("base surfaces: torus is genus one, sphere is genus zero") {
    const TriangleMesh torus = make_base_surface("torus", 10000);
    CHECK(euler_characteristic(torus) == 0);
    const TriangleMesh sphere = make_base_surface("sphere", 2562);
    CHECK(sphere.vertex_count() == 2562);          // icosphere level 4
    CHECK(euler_characteristic(sphere) == 2);
}

TEST_CASE("base surfaces: vertex counts land within 10 percent of target") {
    for (const std::string& kind : base_surface_kinds()) {
        // Icosphere counts are quantized to 10*4^L + 2, so only targets near
        // a subdivision level are reachable for the sphere.
        const std::vector<std::uint32_t> targets =
            kind == "sphere" ? std::vector<std::uint32_t>{650, 2500, 10000}
                             : std::vector<std::uint32_t>{500, 2000, 10000};
        for (std::uint32_t target : targets) {
            const TriangleMesh mesh = make_base_surface(kind, target);
            const double ratio =
                static_cast<double>(mesh.vertex_count()) / static_cast<double>(target);
            INFO(kind, " at ", target, " -> ", mesh.vertex_count());
            CHECK(ratio >= 0.9);
            CHECK(ratio <= 1.1);
        }
    }
    CHECK_THROWS_AS(make_base_surface("moebius", 100), Error);
}

TEST_CASE("base surfaces: deterministic for fixed parameters") {
    const TriangleMesh a = make_base_surface("folded-sheet", 3000);
    const TriangleMesh b = make_base_surface("folded-sheet", 3000);
    REQUIRE(a.vertex_count() == b.vertex_count());
    CHECK(std::memcmp(a.vertices.data(), b.vertices.data(),
                      a.vertices.size() * sizeof(Vec3)) == 0);
}

TEST_CASE("heightfield: bumps closed form peaks at the documented point") {
    const HeightField hf = make_heightfield("bumps", {4.0, 0.0, 0.0, 0});
    CHECK(hf.sample(0.125, 0.125) == doctest::Approx(1.0).epsilon(1e-12));
    // Zero crossings of the raised cosine sit at the positive floor lift.
    CHECK(hf.sample(0.0, 0.125) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("heightfield: ridges are constant along v") {
    const HeightField hf = make_heightfield("ridges", {4.0, 0.0, 0.0, 0});
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double u = rng.uniform();
        CHECK(hf.sample(u, rng.uniform()) == hf.sample(u, rng.uniform()));
    }
}

TEST_CASE("heightfield: equal parameters give identical samples") {
    for (const std::string& name : kGenerators) {
        const HeightFieldParams params{5.0, 0.1, 0.2, 77};
        const HeightField a = make_heightfield(name, params);
        const HeightField b = make_heightfield(name, params);
        Rng rng(9);
        for (int i = 0; i < 1000; ++i) {
            const double u = rng.uniform() * 3.0 - 1.0;
            const double v = rng.uniform() * 3.0 - 1.0;
            CHECK(a.sample(u, v) == b.sample(u, v));
        }
    }
}

TEST_CASE("heightfield: values stay in range and span it") {
    for (const std::string& name : kGenerators) {
        const HeightField hf = make_heightfield(name, {5.0, 0.0, 0.0, 4});
        double lo = 1.0, hi = 0.0;
        for (int y = 0; y < 128; ++y) {
            for (int x = 0; x < 128; ++x) {
                const double h = hf.sample((x + 0.5) / 128.0, (y + 0.5) / 128.0);
                CHECK(h >= 0.0);
                CHECK(h <= 1.0);
                lo = std::min(lo, h);
                hi = std::max(hi, h);
            }
        }
        INFO(name, " spans [", lo, ", ", hi, "]");
        CHECK(lo <= 0.05);
        CHECK(hi >= 0.95);
    }
}

TEST_CASE("heightfield: unit period is exact at representable offsets") {
    for (const std::string& name : kGenerators) {
        const HeightField hf = make_heightfield(name, {3.0, 0.0, 0.0, 12});
        Rng rng(21);
        for (int i = 0; i < 300; ++i) {
            // Offsets on a 2^-20 lattice stay exactly representable after +1.
            const double u = static_cast<double>(rng.bounded(1 << 20)) * 0x1.0p-20;
            const double v = static_cast<double>(rng.bounded(1 << 20)) * 0x1.0p-20;
            CHECK(hf.sample(u + 1.0, v) == hf.sample(u, v));
            CHECK(hf.sample(u, v + 1.0) == hf.sample(u, v));
        }
    }
}

TEST_CASE("heightfield: parameter validation") {
    CHECK_THROWS_AS(make_heightfield("bumps", {0.0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(make_heightfield("bumps", {-2.0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(make_heightfield("granite", {4.0, 0, 0, 0}), Error);
}

TEST_CASE("heightfield: raster sampling interpolates and wraps") {
    // 2x2 checker: bilinear midpoint is the mean.
    const HeightField hf = make_raster_heightfield(2, 2, {0.0, 1.0, 1.0, 0.0});
    CHECK(hf.sample(0.5, 0.5) == doctest::Approx(0.5));
    CHECK(hf.sample(0.25, 0.25) == doctest::Approx(0.0));
    CHECK(hf.sample(0.75, 0.25) == doctest::Approx(1.0));
    CHECK(hf.sample(1.25, 0.25) == doctest::Approx(hf.sample(0.25, 0.25)));
    CHECK_THROWS_AS(make_raster_heightfield(2, 2, {0.0, 1.0}), Error);
}

TEST_CASE("heightfield: pgm round trip at both bit depths") {
    testutil::ScratchDir dir("pgm");
    std::vector<double> values;
    Rng rng(5);
    for (int i = 0; i < 16 * 12; ++i) values.push_back(rng.uniform());
    for (bool deep : {false, true}) {
        const std::string path = dir.file(deep ? "a16.pgm" : "a8.pgm");
        save_pgm(path, 16, 12, values, deep);
        std::uint32_t w = 0, h = 0;
        const std::vector<double> back = load_pgm(path, w, h);
        REQUIRE(w == 16);
        REQUIRE(h == 12);
        const double step = deep ? 1.0 / 65535.0 : 1.0 / 255.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            CHECK(std::fabs(back[i] - values[i]) <= 0.5 * step + 1e-12);
        }
    }
    const HeightField hf = load_heightfield_pgm(dir.file("a16.pgm"));
    CHECK(hf.sample(0.5, 0.5) >= 0.0);
}

TEST_CASE("plan_regions: k 1 puts every face in region 0") {
    const TriangleMesh mesh = testutil::planar_grid(12, 12);
    const RegionMask mask = plan_regions(mesh, 1, 7);
    CHECK(mask.region_count == 1);
    CHECK(std::set<std::uint32_t>(mask.region_ids.begin(), mask.region_ids.end()) ==
          std::set<std::uint32_t>{0});
}

TEST_CASE("plan_regions: axis split on a grid balances within 10 percent") {
    const TriangleMesh mesh = testutil::planar_grid(32, 32);
    const RegionMask mask = plan_regions(mesh, 2, 3, RegionStrategy::AxisSplit);
    REQUIRE(mask.region_count == 2);
    std::array<std::size_t, 2> counts{};
    for (std::uint32_t r : mask.region_ids) ++counts[r];
    const double ratio = static_cast<double>(counts[0]) / static_cast<double>(mesh.face_count());
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("plan_regions: geodesic seeding produces compact, non-trivial regions") {
    const TriangleMesh mesh = make_base_surface("sphere", 700);
    const RegionMask mask = plan_regions(mesh, 3, 11, RegionStrategy::GeodesicSeeds);
    REQUIRE(mask.region_count == 3);
    REQUIRE(mask.region_ids.size() == mesh.face_count());

    // Farthest-point seeding on a sphere yields three sizable Voronoi cells.
    std::array<std::size_t, 3> counts{};
    for (std::uint32_t r : mask.region_ids) ++counts[r];
    for (std::size_t c : counts) {
        CHECK(c >= mesh.face_count() / 20);
    }

    // Compactness: every face must sit within a few hops of its region's
    // "core" (the faces all of whose neighbors share the region). A region
    // that snakes through another would push its fringe far from any core.
    const auto brute = oracle::brute_adjacency({mesh.faces.begin(), mesh.faces.end()}, false);
    for (std::uint32_t r = 0; r < 3; ++r) {
        std::vector<std::uint32_t> core;
        for (std::uint32_t f = 0; f < mask.region_ids.size(); ++f) {
            if (mask.region_ids[f] != r) continue;
            bool interior = true;
            for (std::uint32_t n : brute[f]) {
                if (mask.region_ids[n] != r) interior = false;
            }
            if (interior) core.push_back(f);
        }
        REQUIRE_FALSE(core.empty());
        const std::vector<std::uint32_t> dist = oracle::relaxation_distances(brute, core);
        for (std::uint32_t f = 0; f < mask.region_ids.size(); ++f) {
            if (mask.region_ids[f] == r) CHECK(dist[f] <= 4);
        }
    }

    const RegionMask again = plan_regions(mesh, 3, 11, RegionStrategy::GeodesicSeeds);
    CHECK(again.region_ids == mask.region_ids);
}

TEST_CASE("plan_regions: nearest-seed assignment in seed-free exact cases") {
    // Two disconnected components with k = 2: farthest-point seeding must put
    // one seed per component, and nearest-seed assignment is exactly the
    // component partition regardless of where the seeds land.
    const TriangleMesh left = testutil::planar_grid(6, 6);
    TriangleMesh right = testutil::planar_grid(6, 6);
    for (Vec3& v : right.vertices) v.x += 5.0;
    const TriangleMesh two = testutil::merged(left, right);
    const RegionMask mask = plan_regions(two, 2, 13, RegionStrategy::GeodesicSeeds);
    REQUIRE(mask.region_count == 2);
    const std::size_t half = left.face_count();
    for (std::size_t f = 0; f < two.face_count(); ++f) {
        CHECK(mask.region_ids[f] == (f < half ? 0u : 1u));
    }

    // One region per face: every face is its own nearest seed.
    const TriangleMesh tiny = testutil::planar_grid(3, 3);
    const RegionMask all = plan_regions(tiny, static_cast<std::uint32_t>(tiny.face_count()), 2,
                                        RegionStrategy::GeodesicSeeds);
    CHECK(all.region_count == tiny.face_count());

    // A single connected region cannot cover two components.
    CHECK_THROWS_WITH_AS(plan_regions(two, 1, 0), doctest::Contains("unachievable"), Error);
}

TEST_CASE("plan_regions: every region is connected under vertex adjacency") {
    for (const std::string& kind : {std::string("grid"), std::string("cylinder"),
                                    std::string("torus")}) {
        const TriangleMesh mesh = make_base_surface(kind, 900);
        const FaceAdjacencyGraph graph = build_face_adjacency(mesh, AdjacencyMode::VertexShared);
        for (std::uint32_t k : {2u, 3u, 4u}) {
            for (std::uint64_t seed : {1ull, 9ull}) {
                for (RegionStrategy strategy :
                     {RegionStrategy::AxisSplit, RegionStrategy::GeodesicSeeds}) {
                    const RegionMask mask = plan_regions(mesh, k, seed, strategy);
                    CHECK(mask.region_count == k);
                    CHECK(regions_connected(mask, graph));
                }
            }
        }
    }
    const TriangleMesh tiny = testutil::planar_grid(3, 3);
    CHECK_THROWS_AS(plan_regions(tiny, 100, 1), Error);
}

TEST_CASE("apply_relief: zero amplitude reproduces the base bit-exactly") {
    const TriangleMesh base = make_base_surface("wavy-grid", 2000);
    const RegionMask mask = plan_regions(base, 2, 5, RegionStrategy::AxisSplit);
    ReliefSpec spec;
    spec.region_pattern = {1, 2};
    spec.patterns.emplace(1, make_heightfield("bumps", {6.0, 0, 0, 0}));
    spec.patterns.emplace(2, make_heightfield("ridges", {6.0, 0, 0, 0}));
    spec.amplitude = 0.0;
    const ReliefResult result = apply_relief(base, mask, spec);
    REQUIRE(result.mesh.vertex_count() == base.vertex_count());
    CHECK(std::memcmp(result.mesh.vertices.data(), base.vertices.data(),
                      base.vertices.size() * sizeof(Vec3)) == 0);
    REQUIRE(result.labeling.labels.size() == base.face_count());
    std::set<std::uint32_t> labels(result.labeling.labels.begin(),
                                   result.labeling.labels.end());
    CHECK(labels == std::set<std::uint32_t>{1, 2});
}

TEST_CASE("apply_relief: constant field displaces interior vertices by a along n") {
    const TriangleMesh base = testutil::planar_grid(24, 24);
    RegionMask mask;
    mask.region_ids.assign(base.face_count(), 0);
    mask.region_count = 1;
    const double a = 0.37;
    ReliefSpec spec;
    spec.region_pattern = {1};
    spec.patterns.emplace(1, make_constant_heightfield(1.0));
    spec.amplitude = a;
    const ReliefResult result = apply_relief(base, mask, spec);
    std::size_t interior_checked = 0;
    for (std::size_t v = 0; v < base.vertex_count(); ++v) {
        if (result.vertex_blend[v] == 1.0) {
            const Vec3 expected = base.vertices[v] + a * base.normals[v];
            CHECK((result.mesh.vertices[v] - expected).norm() <= 1e-9);
            ++interior_checked;
        }
    }
    // A single region spanning the whole grid has no boundary: all interior.
    CHECK(interior_checked == base.vertex_count());
}

TEST_CASE("apply_relief: labels follow the region assignment, plain stays put") {
    const TriangleMesh base = testutil::planar_grid(20, 20);
    const RegionMask mask = plan_regions(base, 2, 3, RegionStrategy::AxisSplit);
    ReliefSpec spec;
    spec.region_pattern = {1, 0};  // region 0 bumps, region 1 plain
    spec.patterns.emplace(1, make_heightfield("bumps", {6.0, 0, 0, 0}));
    spec.amplitude = 0.05;
    const ReliefResult result = apply_relief(base, mask, spec);
    for (std::size_t f = 0; f < base.face_count(); ++f) {
        CHECK(result.labeling.labels[f] == (mask.region_ids[f] == 0 ? 1u : 0u));
    }
    // Vertices entirely on plain faces never move.
    std::vector<bool> touches_pattern(base.vertex_count(), false);
    for (std::size_t f = 0; f < base.face_count(); ++f) {
        if (mask.region_ids[f] == 0) {
            for (std::uint32_t v : base.faces[f]) touches_pattern[v] = true;
        }
    }
    for (std::size_t v = 0; v < base.vertex_count(); ++v) {
        if (!touches_pattern[v]) {
            CHECK(result.mesh.vertices[v] == base.vertices[v]);
        }
    }
    // Displacement never exceeds the amplitude.
    for (std::size_t v = 0; v < base.vertex_count(); ++v) {
        CHECK((result.mesh.vertices[v] - base.vertices[v]).norm() <= spec.amplitude + 1e-12);
    }
    // Patterned faces have at least one displaced vertex.
    for (std::size_t f = 0; f < base.face_count(); ++f) {
        if (result.labeling.labels[f] != 0) {
            bool moved = false;
            for (std::uint32_t v : base.faces[f]) {
                if (!(result.mesh.vertices[v] == base.vertices[v])) moved = true;
            }
            CHECK(moved);
        }
    }
}

TEST_CASE("apply_relief: blend ramps from 0 at region boundaries to 1 inside") {
    const TriangleMesh base = testutil::planar_grid(20, 20);
    const RegionMask mask = plan_regions(base, 2, 3, RegionStrategy::AxisSplit);
    const std::vector<double> blend = region_blend_factors(base, mask);
    std::set<double> seen(blend.begin(), blend.end());
    for (double b : seen) {
        CHECK((b == 0.0 || b == 0.5 || b == 1.0));
    }
    CHECK(seen.count(0.0) == 1);
    CHECK(seen.count(1.0) == 1);
}

TEST_CASE("apply_relief: input validation") {
    const TriangleMesh base = testutil::planar_grid(6, 6);
    RegionMask mask;
    mask.region_ids.assign(base.face_count(), 0);
    mask.region_count = 1;
    ReliefSpec spec;
    spec.amplitude = 0.1;
    // region 0 missing from the assignment
    CHECK_THROWS_AS(apply_relief(base, mask, spec), Error);
    spec.region_pattern = {3};  // pattern 3 has no heightfield
    CHECK_THROWS_AS(apply_relief(base, mask, spec), Error);
    spec.region_pattern = {1};
    spec.patterns.emplace(1, make_constant_heightfield(0.5));
    TriangleMesh no_uv = base;
    no_uv.uvs.clear();
    CHECK_THROWS_AS(apply_relief(no_uv, mask, spec), Error);  // stored UVs absent
}

TEST_CASE("dataset: deterministic, split classes obey the reserved roles") {
    testutil::ScratchDir dir_a("ds_a");
    testutil::ScratchDir dir_b("ds_b");
    DatasetConfig config;
    config.profile = "desk";
    config.seed = 7;
    config.query_count = 4;
    config.two_pattern_queries = 1;
    config.retrieval_count = 4;
    config.training_count = 8;
    config.resolution = 300;
    const DatasetManifest manifest = generate_dataset(config, dir_a.str());
    const DatasetManifest again = generate_dataset(config, dir_b.str());

    CHECK(manifest.items.size() == 16);
    CHECK(manifest.split_items("query").size() == 4);
    CHECK(manifest.split_items("retrieval").size() == 4);
    CHECK(manifest.split_items("training").size() == 8);
    REQUIRE(manifest.catalog.size() == 9);

    // Byte-identical outputs across runs.
    CHECK(read_file(dir_a.file("manifest.jsonl")) == read_file(dir_b.file("manifest.jsonl")));
    for (const DatasetItem& item : manifest.items) {
        CHECK(read_file(dir_a.str() + "/" + item.mesh_path) ==
              read_file(dir_b.str() + "/" + item.mesh_path));
        CHECK(read_file(dir_a.str() + "/" + item.labels_path) ==
              read_file(dir_b.str() + "/" + item.labels_path));
    }

    // Reserved classes: second-to-last trains only, last queries only.
    const std::uint32_t training_only = static_cast<std::uint32_t>(manifest.catalog.size()) - 2;
    const std::uint32_t query_only = training_only + 1;
    std::map<std::string, std::set<std::uint32_t>> split_classes;
    for (const DatasetItem& item : manifest.items) {
        for (std::uint32_t cls : item.region_patterns) {
            if (cls != 0) split_classes[item.split].insert(cls);
        }
    }
    CHECK(split_classes["training"].count(training_only) == 1);
    CHECK(split_classes["query"].count(training_only) == 0);
    CHECK(split_classes["retrieval"].count(training_only) == 0);
    CHECK(split_classes["query"].count(query_only) == 1);
    CHECK(split_classes["retrieval"].count(query_only) == 0);
    CHECK(split_classes["training"].count(query_only) == 0);

    // Labels on disk agree with the manifest's class assignments.
    const DatasetItem& probe = manifest.items.front();
    const PatternLabeling labels = load_labeling(dir_a.str() + "/" + probe.labels_path);
    CHECK(labels.labels.size() == probe.face_count);
    std::set<std::uint32_t> present;
    for (std::uint32_t l : labels.labels) present.insert(l);
    for (std::uint32_t cls : probe.region_patterns) {
        CHECK(present.count(cls) == 1);
    }

    // Mesh on disk matches the recorded counts.
    const LoadedMesh mesh = load_mesh(dir_a.str() + "/" + probe.mesh_path);
    CHECK(mesh.mesh.vertex_count() == probe.vertex_count);
    CHECK(mesh.mesh.face_count() == probe.face_count);
}

TEST_CASE("dataset: full profile defaults produce the documented split sizes") {
    DatasetConfig config;
    config.profile = "full";
    config.resolution = 64;  // keep meshes tiny; the split sizes are under test
    config.seed = 1;
    testutil::ScratchDir dir("ds_full");
    const DatasetManifest manifest = generate_dataset(config, dir.str());
    CHECK(manifest.split_items("query").size() == 54);
    CHECK(manifest.split_items("retrieval").size() == 300);
    CHECK(manifest.split_items("training").size() == 700);
    CHECK(manifest.items.size() == 54 + 300 + 700);
}

TEST_CASE("dataset: manifest jsonl round trip and malformed input errors") {
    DatasetManifest manifest;
    manifest.catalog = {"plain", "bumps", "ridges", "bricks", "scales"};
    DatasetItem item;
    item.id = "query_000";
    item.split = "query";
    item.base_kind = "grid";
    item.mesh_path = "meshes/query_000.obj";
    item.labels_path = "labels/query_000.csv";
    item.region_patterns = {1, 2};
    item.amplitude = 0.0283;
    item.seed = 123456789;
    item.vertex_count = 100;
    item.face_count = 162;
    manifest.items.push_back(item);

    const std::string text = manifest_to_jsonl(manifest);
    const DatasetManifest back = manifest_from_jsonl(text);
    CHECK(back.catalog == manifest.catalog);
    REQUIRE(back.items.size() == 1);
    CHECK(back.items[0].id == item.id);
    CHECK(back.items[0].region_patterns == item.region_patterns);
    CHECK(back.items[0].amplitude == item.amplitude);
    CHECK(back.items[0].seed == item.seed);
    CHECK(manifest_to_jsonl(back) == text);

    CHECK_THROWS_AS(manifest_from_jsonl(""), Error);
    CHECK_THROWS_AS(manifest_from_jsonl("{not json}\n"), Error);
    CHECK_THROWS_AS(manifest_from_jsonl("{\"items\":[]}\n"), Error);
}

TEST_CASE("dataset: config validation") {
    DatasetConfig config;
    config.profile = "weekly";
    CHECK_THROWS_WITH_AS(config.resolve(), doctest::Contains("unknown profile"), Error);

    DatasetConfig small;
    small.profile = "desk";
    small.classes = {{"plain", "", 0, 0, 0}, {"bumps", "bumps", 6, 0, 0}};
    CHECK_THROWS_WITH_AS(small.resolve(), doctest::Contains("catalog too small"), Error);
}

} // TEST_SUITE
