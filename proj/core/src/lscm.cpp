#include "reliefkit/lscm.hpp"

#include "reliefkit/adjacency.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <complex>
#include <deque>
#include <limits>
#include <map>
#include <unordered_map>

namespace relief {
namespace {

struct PatchTopology {
    std::vector<std::uint32_t> vertices;                       // ascending mesh ids
    std::unordered_map<std::uint32_t, std::uint32_t> local;    // mesh id -> local index
    std::vector<std::array<std::uint32_t, 3>> faces;           // local indices
    std::vector<char> on_boundary;                             // per local vertex
    std::vector<std::vector<std::uint32_t>> vertex_adj;        // local vertex graph
};

PatchTopology analyze_patch(const TriangleMesh& mesh,
                            const std::vector<std::uint32_t>& patch_faces) {
    if (patch_faces.empty()) throw Error("non-disk patch");
    PatchTopology topo;

    for (std::uint32_t f : patch_faces) {
        if (f >= mesh.faces.size()) throw Error("lscm: face id out of range");
        for (std::uint32_t v : mesh.faces[f]) topo.vertices.push_back(v);
    }
    std::sort(topo.vertices.begin(), topo.vertices.end());
    topo.vertices.erase(std::unique(topo.vertices.begin(), topo.vertices.end()),
                        topo.vertices.end());
    for (std::uint32_t i = 0; i < topo.vertices.size(); ++i) topo.local[topo.vertices[i]] = i;

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edge_count;
    for (std::uint32_t f : patch_faces) {
        std::array<std::uint32_t, 3> local{};
        for (int k = 0; k < 3; ++k) local[k] = topo.local[mesh.faces[f][k]];
        topo.faces.push_back(local);
        for (int k = 0; k < 3; ++k) {
            std::uint32_t a = local[k], b = local[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }

    const std::size_t V = topo.vertices.size();
    const std::size_t E = edge_count.size();
    const std::size_t F = topo.faces.size();
    topo.on_boundary.assign(V, 0);
    topo.vertex_adj.assign(V, {});
    for (const auto& [edge, count] : edge_count) {
        if (count > 2) throw Error("non-disk patch");
        if (count == 1) {
            topo.on_boundary[edge.first] = 1;
            topo.on_boundary[edge.second] = 1;
        }
        topo.vertex_adj[edge.first].push_back(edge.second);
        topo.vertex_adj[edge.second].push_back(edge.first);
    }

    // Edge-connectivity over faces.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> edge_faces;
    for (std::uint32_t fi = 0; fi < F; ++fi) {
        const auto& local = topo.faces[fi];
        for (int k = 0; k < 3; ++k) {
            std::uint32_t a = local[k], b = local[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_faces[{a, b}].push_back(fi);
        }
    }
    std::vector<char> visited(F, 0);
    std::deque<std::uint32_t> queue{0};
    visited[0] = 1;
    std::size_t reached = 1;
    std::vector<std::vector<std::uint32_t>> face_adj(F);
    for (const auto& [edge, fs] : edge_faces) {
        if (fs.size() == 2) {
            face_adj[fs[0]].push_back(fs[1]);
            face_adj[fs[1]].push_back(fs[0]);
        }
    }
    while (!queue.empty()) {
        std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t w : face_adj[u]) {
            if (!visited[w]) {
                visited[w] = 1;
                ++reached;
                queue.push_back(w);
            }
        }
    }
    if (reached != F) throw Error("non-disk patch");
    if (static_cast<long long>(V) - static_cast<long long>(E) + static_cast<long long>(F) != 1)
        throw Error("non-disk patch");
    return topo;
}

std::vector<std::uint32_t> local_bfs(const PatchTopology& topo, std::uint32_t start) {
    std::vector<std::uint32_t> dist(topo.vertices.size(), kUnreachable);
    std::deque<std::uint32_t> queue{start};
    dist[start] = 0;
    while (!queue.empty()) {
        std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t w : topo.vertex_adj[u]) {
            if (dist[w] == kUnreachable) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

// Farthest boundary pair by hop distance over the patch graph; deterministic
// tie-break: lexicographically smallest (first, second) local pair.
std::array<std::uint32_t, 2> pick_pins(const PatchTopology& topo) {
    std::vector<std::uint32_t> boundary;
    for (std::uint32_t v = 0; v < topo.vertices.size(); ++v)
        if (topo.on_boundary[v]) boundary.push_back(v);
    if (boundary.size() < 2) throw Error("non-disk patch");

    std::array<std::uint32_t, 2> best{boundary[0], boundary[1]};
    std::uint32_t best_dist = 0;
    bool have = false;
    for (std::uint32_t b : boundary) {
        std::vector<std::uint32_t> dist = local_bfs(topo, b);
        for (std::uint32_t c : boundary) {
            if (c <= b || dist[c] == kUnreachable) continue;
            if (!have || dist[c] > best_dist) {
                best = {b, c};
                best_dist = dist[c];
                have = true;
            }
        }
    }
    if (!have) throw Error("non-disk patch");
    return best;
}

// Local orthonormal 2D frame per triangle; returns the three corners as
// complex numbers and the triangle area.
struct TriangleFrame {
    std::complex<double> q[3];
    double area;
};

TriangleFrame triangle_frame(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    Vec3 e1 = p1 - p0;
    Vec3 e2 = p2 - p0;
    double x1 = e1.norm();
    Vec3 ex = x1 > 0 ? e1 / x1 : Vec3{1, 0, 0};
    double x2 = e2.dot(ex);
    Vec3 ey_vec = e2 - ex * x2;
    double y2 = ey_vec.norm();
    TriangleFrame frame;
    frame.q[0] = {0.0, 0.0};
    frame.q[1] = {x1, 0.0};
    frame.q[2] = {x2, y2};
    frame.area = 0.5 * x1 * y2;
    return frame;
}

} // namespace

double conformal_energy(const TriangleMesh& mesh, const std::vector<std::uint32_t>& patch_faces,
                        const std::vector<std::array<double, 2>>& uv) {
    std::vector<std::uint32_t> vertices;
    for (std::uint32_t f : patch_faces)
        for (std::uint32_t v : mesh.faces[f]) vertices.push_back(v);
    std::sort(vertices.begin(), vertices.end());
    vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    for (std::uint32_t i = 0; i < vertices.size(); ++i) local[vertices[i]] = i;

    double energy = 0.0;
    for (std::uint32_t f : patch_faces) {
        const FaceIndices& face = mesh.faces[f];
        TriangleFrame frame =
            triangle_frame(mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]);
        if (frame.area <= 0) continue;
        std::complex<double> sum{0.0, 0.0};
        for (int k = 0; k < 3; ++k) {
            // e_k: local-frame edge opposite corner k (as a complex number).
            std::complex<double> e = frame.q[(k + 2) % 3] - frame.q[(k + 1) % 3];
            const auto& w = uv[local[face[k]]];
            sum += e * std::complex<double>(w[0], w[1]);
        }
        energy += std::norm(sum) / (4.0 * frame.area);
    }
    return energy;
}

LscmResult lscm_flatten(const TriangleMesh& mesh, const std::vector<std::uint32_t>& patch_faces) {
    PatchTopology topo = analyze_patch(mesh, patch_faces);
    const std::uint32_t V = static_cast<std::uint32_t>(topo.vertices.size());
    const std::uint32_t F = static_cast<std::uint32_t>(topo.faces.size());

    std::array<std::uint32_t, 2> pins = pick_pins(topo);

    // Unknown layout: free vertices keep their local order; each contributes
    // (u, v). Pins are moved to the right-hand side.
    std::vector<std::int64_t> unknown_of(V, -1);
    std::uint32_t free_count = 0;
    for (std::uint32_t v = 0; v < V; ++v) {
        if (v == pins[0] || v == pins[1]) continue;
        unknown_of[v] = free_count++;
    }
    const std::array<std::array<double, 2>, 2> pin_uv = {{{0.0, 0.0}, {1.0, 0.0}}};

    auto pin_value = [&](std::uint32_t v) -> std::array<double, 2> {
        return v == pins[0] ? pin_uv[0] : pin_uv[1];
    };

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * F);

    for (std::uint32_t fi = 0; fi < F; ++fi) {
        const auto& local = topo.faces[fi];
        const Vec3& p0 = mesh.vertices[topo.vertices[local[0]]];
        const Vec3& p1 = mesh.vertices[topo.vertices[local[1]]];
        const Vec3& p2 = mesh.vertices[topo.vertices[local[2]]];
        TriangleFrame frame = triangle_frame(p0, p1, p2);
        double scale = frame.area > 0 ? 1.0 / (2.0 * std::sqrt(frame.area)) : 0.0;
        for (int k = 0; k < 3; ++k) {
            std::complex<double> e =
                (frame.q[(k + 2) % 3] - frame.q[(k + 1) % 3]) * scale;
            const double a = e.real(), b = e.imag();
            std::uint32_t v = local[k];
            if (unknown_of[v] >= 0) {
                std::int64_t col = 2 * unknown_of[v];
                // complex product (a+ib)(u+iv): real row then imaginary row
                triplets.emplace_back(2 * fi, col, a);
                triplets.emplace_back(2 * fi, col + 1, -b);
                triplets.emplace_back(2 * fi + 1, col, b);
                triplets.emplace_back(2 * fi + 1, col + 1, a);
            } else {
                auto uvp = pin_value(v);
                rhs[2 * fi] -= a * uvp[0] - b * uvp[1];
                rhs[2 * fi + 1] -= b * uvp[0] + a * uvp[1];
            }
        }
    }

    LscmResult result;
    result.patch_vertices = topo.vertices;
    result.pinned = {topo.vertices[pins[0]], topo.vertices[pins[1]]};
    result.uvs.assign(V, {0.0, 0.0});

    Eigen::VectorXd solution;
    if (free_count > 0) {
        Eigen::SparseMatrix<double> A(2 * F, 2 * free_count);
        A.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseMatrix<double> AtA = (Eigen::SparseMatrix<double>(A.transpose()) * A)
                                              .pruned();
        Eigen::VectorXd Atb = A.transpose() * rhs;

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(AtA);
        if (solver.info() != Eigen::Success) throw Error("lscm: factorization failed");
        solution = solver.solve(Atb);
        if (solver.info() != Eigen::Success) throw Error("lscm: solve failed");

        double denom = Atb.norm();
        result.relative_residual = denom > 0 ? (AtA * solution - Atb).norm() / denom : 0.0;
        if (!(result.relative_residual < 1e-8))
            throw Error("lscm: solver did not reach the required residual");
    }

    for (std::uint32_t v = 0; v < V; ++v) {
        if (unknown_of[v] >= 0) {
            result.uvs[v] = {solution[2 * unknown_of[v]], solution[2 * unknown_of[v] + 1]};
        } else {
            result.uvs[v] = pin_value(v);
        }
    }

    for (const auto& local : topo.faces) {
        const auto& a = result.uvs[local[0]];
        const auto& b = result.uvs[local[1]];
        const auto& c = result.uvs[local[2]];
        double signed_area =
            (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if (signed_area < 0) ++result.flipped_faces;
    }

    result.energy = conformal_energy(mesh, patch_faces, result.uvs);

    // Reference energy: best-fit-plane projection, similarity-aligned to the
    // pin constraints (a feasible point of the same constrained problem).
    {
        Eigen::MatrixXd P(V, 3);
        for (std::uint32_t v = 0; v < V; ++v) {
            const Vec3& p = mesh.vertices[topo.vertices[v]];
            P.row(v) << p.x, p.y, p.z;
        }
        Eigen::RowVector3d mean = P.colwise().mean();
        Eigen::MatrixXd centered = P.rowwise() - mean;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
        Eigen::MatrixXd plane = centered * svd.matrixV().leftCols(2);
        std::complex<double> g0(plane(pins[0], 0), plane(pins[0], 1));
        std::complex<double> g1(plane(pins[1], 0), plane(pins[1], 1));
        if (std::abs(g1 - g0) > 0) {
            std::complex<double> a = std::complex<double>(1.0, 0.0) / (g1 - g0);
            std::vector<std::array<double, 2>> guess(V);
            for (std::uint32_t v = 0; v < V; ++v) {
                std::complex<double> w = a * (std::complex<double>(plane(v, 0), plane(v, 1)) - g0);
                guess[v] = {w.real(), w.imag()};
            }
            result.initial_energy = conformal_energy(mesh, patch_faces, guess);
        } else {
            result.initial_energy = std::numeric_limits<double>::infinity();
        }
    }

    return result;
}

} // namespace relief
