#include "reliefkit/adjacency.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace relief {

std::vector<std::vector<std::uint32_t>> vertex_face_incidence(const TriangleMesh& mesh) {
    std::vector<std::vector<std::uint32_t>> incidence(mesh.vertices.size());
    for (std::uint32_t fi = 0; fi < mesh.faces.size(); ++fi)
        for (std::uint32_t v : mesh.faces[fi]) incidence[v].push_back(fi);
    return incidence;
}

FaceAdjacencyGraph build_face_adjacency(const TriangleMesh& mesh, AdjacencyMode mode) {
    const std::uint32_t nf = static_cast<std::uint32_t>(mesh.faces.size());
    std::vector<std::vector<std::uint32_t>> adj(nf);

    if (mode == AdjacencyMode::VertexShared) {
        auto incidence = vertex_face_incidence(mesh);
        for (const auto& ring : incidence) {
            for (std::size_t i = 0; i < ring.size(); ++i)
                for (std::size_t j = i + 1; j < ring.size(); ++j) {
                    adj[ring[i]].push_back(ring[j]);
                    adj[ring[j]].push_back(ring[i]);
                }
        }
    } else {
        // Map each undirected edge to the faces using it.
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> edge_faces;
        for (std::uint32_t fi = 0; fi < nf; ++fi) {
            const FaceIndices& f = mesh.faces[fi];
            for (int k = 0; k < 3; ++k) {
                std::uint32_t a = f[k], b = f[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                edge_faces[{a, b}].push_back(fi);
            }
        }
        for (const auto& [edge, fs] : edge_faces) {
            for (std::size_t i = 0; i < fs.size(); ++i)
                for (std::size_t j = i + 1; j < fs.size(); ++j) {
                    adj[fs[i]].push_back(fs[j]);
                    adj[fs[j]].push_back(fs[i]);
                }
        }
    }

    FaceAdjacencyGraph graph;
    graph.mode = mode;
    graph.offsets.resize(nf + 1, 0);
    for (std::uint32_t fi = 0; fi < nf; ++fi) {
        auto& list = adj[fi];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        graph.offsets[fi + 1] = graph.offsets[fi] + static_cast<std::uint32_t>(list.size());
    }
    graph.neighbors.reserve(graph.offsets[nf]);
    for (const auto& list : adj)
        graph.neighbors.insert(graph.neighbors.end(), list.begin(), list.end());
    return graph;
}

std::vector<std::uint32_t> bfs_distances(const FaceAdjacencyGraph& graph,
                                         const std::vector<std::uint32_t>& seeds) {
    std::vector<std::uint32_t> dist(graph.node_count(), kUnreachable);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t s : seeds) {
        if (dist[s] == kUnreachable) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        std::uint32_t u = queue.front();
        queue.pop_front();
        auto [begin, end] = graph.neighbors_of(u);
        for (const std::uint32_t* it = begin; it != end; ++it) {
            if (dist[*it] == kUnreachable) {
                dist[*it] = dist[u] + 1;
                queue.push_back(*it);
            }
        }
    }
    return dist;
}

} // namespace relief
