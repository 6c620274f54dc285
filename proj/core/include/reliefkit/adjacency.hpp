#pragma once

#include <cstdint>
#include <vector>

#include "reliefkit/mesh.hpp"

namespace relief {

enum class AdjacencyMode {
    VertexShared,  // faces sharing at least one vertex
    EdgeShared,    // faces sharing a full edge
};

// Face adjacency graph: one node per face, undirected edges, no self-loops.
// Stored CSR-style; neighbor lists are sorted.
struct FaceAdjacencyGraph {
    AdjacencyMode mode = AdjacencyMode::VertexShared;
    std::vector<std::uint32_t> offsets;    // size = node_count + 1
    std::vector<std::uint32_t> neighbors;  // flattened, sorted per node

    std::size_t node_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t edge_count() const { return neighbors.size() / 2; }

    std::pair<const std::uint32_t*, const std::uint32_t*> neighbors_of(std::uint32_t node) const {
        return {neighbors.data() + offsets[node], neighbors.data() + offsets[node + 1]};
    }
};

/// Linear-time construction via a vertex -> incident-face index.
FaceAdjacencyGraph build_face_adjacency(const TriangleMesh& mesh,
                                        AdjacencyMode mode = AdjacencyMode::VertexShared);

/// Vertex -> sorted list of incident face ids.
std::vector<std::vector<std::uint32_t>> vertex_face_incidence(const TriangleMesh& mesh);

/// BFS hop distance from a seed set; unreachable nodes get UINT32_MAX.
std::vector<std::uint32_t> bfs_distances(const FaceAdjacencyGraph& graph,
                                         const std::vector<std::uint32_t>& seeds);

constexpr std::uint32_t kUnreachable = 0xffffffffu;

} // namespace relief
