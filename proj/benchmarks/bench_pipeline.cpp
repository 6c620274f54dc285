// Microbenchmarks for the hot paths: per-face descriptor extraction, label
// propagation, depth rendering, and retrieval metric evaluation.

#include "reliefkit/adjacency.hpp"
#include "reliefkit/displacement.hpp"
#include "reliefkit/features.hpp"
#include "reliefkit/heightfield.hpp"
#include "reliefkit/metrics.hpp"
#include "reliefkit/multiview.hpp"
#include "reliefkit/regions.hpp"
#include "reliefkit/rng.hpp"
#include "reliefkit/segmentation.hpp"
#include "reliefkit/surfaces.hpp"

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

namespace {

// Bumpy sheet shared by the geometry benchmarks (~5k faces).
const relief::TriangleMesh& bench_mesh() {
    static const relief::TriangleMesh mesh = [] {
        const relief::TriangleMesh base = relief::make_base_surface("grid", 2500);
        const relief::RegionMask mask = relief::plan_regions(base, 1, 1);
        relief::ReliefSpec spec;
        spec.region_pattern = {1};
        relief::HeightFieldParams params;
        params.frequency = 6.0;
        spec.patterns[1] = relief::make_heightfield("bumps", params);
        spec.amplitude = 0.02 * relief::bounding_box(base).diagonal();
        return relief::apply_relief(base, mask, spec).mesh;
    }();
    return mesh;
}

struct GeometryState {
    relief::FaceAttributes attrs;
    relief::FaceAdjacencyGraph vertex_graph;
    relief::FaceAdjacencyGraph edge_graph;
    double mean_edge;
    relief::SpatialGrid grid;

    explicit GeometryState(const relief::TriangleMesh& mesh)
        : attrs(relief::compute_face_attributes(mesh)),
          vertex_graph(relief::build_face_adjacency(mesh, relief::AdjacencyMode::VertexShared)),
          edge_graph(relief::build_face_adjacency(mesh, relief::AdjacencyMode::EdgeShared)),
          mean_edge(relief::mean_edge_length(mesh)),
          grid(attrs.centroids, relief::NeighborhoodParams{}.radius_multiplier * mean_edge) {}
};

const GeometryState& bench_state() {
    static const GeometryState state(bench_mesh());
    return state;
}

void BM_FaceDescriptors(benchmark::State& state) {
    const relief::TriangleMesh& mesh = bench_mesh();
    const GeometryState& geo = bench_state();
    const std::vector<std::uint32_t> samples =
        relief::sample_faces(mesh.face_count(), 256, 9);
    for (auto _ : state) {
        for (std::uint32_t face : samples) {
            const relief::Neighborhood hood = relief::collect_neighborhood(
                geo.attrs, geo.grid, geo.vertex_graph, face, geo.mean_edge);
            benchmark::DoNotOptimize(
                relief::face_descriptor(mesh, geo.attrs, geo.edge_graph, face, hood.faces));
        }
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}
BENCHMARK(BM_FaceDescriptors)->Unit(benchmark::kMillisecond);

void BM_PropagateLabels(benchmark::State& state) {
    const relief::TriangleMesh& mesh = bench_mesh();
    const GeometryState& geo = bench_state();
    std::vector<double> curvatures(mesh.face_count());
    for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
        curvatures[f] = relief::face_curvature(geo.attrs, geo.edge_graph, f);
    }
    relief::SparseLabels seeds;
    seeds.faces = relief::sample_faces(mesh.face_count(), 500, 4);
    for (std::size_t i = 0; i < seeds.faces.size(); ++i) {
        seeds.labels.push_back(i % 2 == 0 ? 1u : 2u);
        seeds.confidences.push_back(1.0);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(relief::propagate_labels(geo.edge_graph, geo.attrs, curvatures,
                                                          geo.mean_edge, seeds, {}));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(mesh.face_count()));
}
BENCHMARK(BM_PropagateLabels)->Unit(benchmark::kMillisecond);

void BM_RenderViews(benchmark::State& state) {
    const relief::TriangleMesh& mesh = bench_mesh();
    for (auto _ : state) {
        benchmark::DoNotOptimize(relief::render_views(mesh, 128));
    }
}
BENCHMARK(BM_RenderViews)->Unit(benchmark::kMillisecond);

void BM_RetrievalMetrics(benchmark::State& state) {
    relief::Rng rng(77);
    relief::MembershipMatrix membership;
    relief::RelevanceMatrix relevance;
    const std::size_t nq = 16;
    const std::size_t nt = 128;
    relevance.query_count = nq;
    relevance.target_count = nt;
    for (std::size_t q = 0; q < nq; ++q) {
        membership.query_ids.push_back("q" + std::to_string(q));
        relevance.query_ids.push_back("q" + std::to_string(q));
    }
    for (std::size_t t = 0; t < nt; ++t) {
        membership.target_ids.push_back("t" + std::to_string(t));
        relevance.target_ids.push_back("t" + std::to_string(t));
    }
    for (std::size_t q = 0; q < nq; ++q) {
        bool any = false;
        for (std::size_t t = 0; t < nt; ++t) {
            membership.scores.push_back(rng.uniform());
            const bool rel = rng.uniform() < 0.2;
            relevance.relevant.push_back(rel ? 1 : 0);
            any = any || rel;
        }
        if (!any) {
            relevance.relevant[q * nt] = 1;
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(relief::retrieval_metrics(membership, relevance));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(nq * nt));
}
BENCHMARK(BM_RetrievalMetrics)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
