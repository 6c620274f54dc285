#include "reliefkit/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace relief {
namespace {

constexpr double kPi = 3.14159265358979323846;

void finish(TriangleMesh& mesh) {
    validate_mesh(mesh);
    mesh.normals = compute_vertex_normals(mesh, compute_face_attributes(mesh));
}

// n x n vertices over [0,1]^2 with a height function; UV = (x, y).
template <typename HeightFn>
TriangleMesh make_sheet(std::uint32_t n, HeightFn&& height) {
    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(n) * n);
    mesh.uvs.reserve(static_cast<std::size_t>(n) * n);
    for (std::uint32_t j = 0; j < n; ++j) {
        for (std::uint32_t i = 0; i < n; ++i) {
            double u = static_cast<double>(i) / (n - 1);
            double v = static_cast<double>(j) / (n - 1);
            mesh.vertices.push_back(height(u, v));
            mesh.uvs.push_back({u, v});
        }
    }
    for (std::uint32_t j = 0; j + 1 < n; ++j) {
        for (std::uint32_t i = 0; i + 1 < n; ++i) {
            std::uint32_t a = j * n + i, b = j * n + i + 1;
            std::uint32_t c = (j + 1) * n + i, d = (j + 1) * n + i + 1;
            mesh.faces.push_back({a, b, d});
            mesh.faces.push_back({a, d, c});
        }
    }
    return mesh;
}

// nu columns wrapped around, nv rows open; UV = (i/nu, j/(nv-1)).
template <typename PointFn>
TriangleMesh make_tube(std::uint32_t nu, std::uint32_t nv, bool wrap_v, PointFn&& point) {
    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(nu) * nv);
    for (std::uint32_t j = 0; j < nv; ++j) {
        for (std::uint32_t i = 0; i < nu; ++i) {
            double u = static_cast<double>(i) / nu;
            double v = wrap_v ? static_cast<double>(j) / nv : static_cast<double>(j) / (nv - 1);
            mesh.vertices.push_back(point(u, v));
            mesh.uvs.push_back({u, v});
        }
    }
    const std::uint32_t jmax = wrap_v ? nv : nv - 1;
    for (std::uint32_t j = 0; j < jmax; ++j) {
        std::uint32_t j1 = wrap_v ? (j + 1) % nv : j + 1;
        for (std::uint32_t i = 0; i < nu; ++i) {
            std::uint32_t i1 = (i + 1) % nu;
            std::uint32_t a = j * nu + i, b = j * nu + i1;
            std::uint32_t c = j1 * nu + i, d = j1 * nu + i1;
            mesh.faces.push_back({a, b, d});
            mesh.faces.push_back({a, d, c});
        }
    }
    return mesh;
}

std::uint32_t sheet_side(std::uint32_t resolution) {
    return std::max<std::uint32_t>(3, static_cast<std::uint32_t>(
                                          std::lround(std::sqrt(static_cast<double>(resolution)))));
}

TriangleMesh icosahedron(double radius) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> raw = {
        {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1},
    };
    TriangleMesh mesh;
    for (const Vec3& v : raw) mesh.vertices.push_back(v.normalized() * radius);
    mesh.faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return mesh;
}

} // namespace

TriangleMesh make_icosphere(std::uint32_t level, double radius) {
    TriangleMesh mesh = icosahedron(radius);
    for (std::uint32_t iter = 0; iter < level; ++iter) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            std::pair<std::uint32_t, std::uint32_t> key{std::min(a, b), std::max(a, b)};
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            Vec3 m = ((mesh.vertices[a] + mesh.vertices[b]) * 0.5).normalized() * radius;
            mesh.vertices.push_back(m);
            std::uint32_t idx = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<FaceIndices> next;
        next.reserve(mesh.faces.size() * 4);
        for (const FaceIndices& f : mesh.faces) {
            std::uint32_t ab = midpoint(f[0], f[1]);
            std::uint32_t bc = midpoint(f[1], f[2]);
            std::uint32_t ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(next);
    }
    // Spherical UVs (seam at u = 0/1 left as-is; the sphere base is used for
    // rendering and area checks, not seam-sensitive displacement).
    mesh.uvs.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        double u = std::atan2(p.y, p.x) / (2.0 * kPi) + 0.5;
        double v = std::acos(std::clamp(p.z / radius, -1.0, 1.0)) / kPi;
        mesh.uvs[i] = {u, v};
    }
    finish(mesh);
    return mesh;
}

TriangleMesh make_base_surface(const std::string& kind, std::uint32_t resolution) {
    if (resolution < 9) throw Error("base surface: resolution must be at least 9");
    TriangleMesh mesh;
    if (kind == "grid") {
        mesh = make_sheet(sheet_side(resolution),
                          [](double u, double v) { return Vec3{u, v, 0.0}; });
    } else if (kind == "wavy-grid") {
        mesh = make_sheet(sheet_side(resolution), [](double u, double v) {
            return Vec3{u, v, 0.08 * std::sin(2.0 * kPi * u) * std::cos(2.0 * kPi * v)};
        });
    } else if (kind == "cylinder") {
        // Open tube, radius 0.25, height 1. Columns ~ circumference/height balanced.
        std::uint32_t nu = std::max<std::uint32_t>(
            8, static_cast<std::uint32_t>(std::lround(std::sqrt(resolution * 1.5708))));
        std::uint32_t nv = std::max<std::uint32_t>(
            2, static_cast<std::uint32_t>(std::lround(static_cast<double>(resolution) / nu)));
        mesh = make_tube(nu, nv, false, [](double u, double v) {
            double th = 2.0 * kPi * u;
            return Vec3{0.25 * std::cos(th), 0.25 * std::sin(th), v};
        });
    } else if (kind == "torus") {
        std::uint32_t nu = std::max<std::uint32_t>(
            8, static_cast<std::uint32_t>(std::lround(std::sqrt(resolution * 2.0))));
        std::uint32_t nv = std::max<std::uint32_t>(
            8, static_cast<std::uint32_t>(std::lround(static_cast<double>(resolution) / nu)));
        const double R = 0.35, r = 0.15;
        mesh = make_tube(nu, nv, true, [=](double u, double v) {
            double th = 2.0 * kPi * u, ph = 2.0 * kPi * v;
            double w = R + r * std::cos(ph);
            return Vec3{w * std::cos(th), w * std::sin(th), r * std::sin(ph)};
        });
    } else if (kind == "sphere") {
        // Pick the subdivision level whose vertex count is closest to target.
        std::uint32_t best_level = 0;
        double best_diff = 1e18;
        for (std::uint32_t level = 0; level <= 8; ++level) {
            double count = 10.0 * std::pow(4.0, level) + 2.0;
            double diff = std::fabs(count - static_cast<double>(resolution));
            if (diff < best_diff) {
                best_diff = diff;
                best_level = level;
            }
        }
        return make_icosphere(best_level, 0.5);
    } else if (kind == "folded-sheet") {
        // Unit square folded into a half-pipe: developable, disk topology.
        mesh = make_sheet(sheet_side(resolution), [](double u, double v) {
            double th = kPi * u;
            return Vec3{0.5 * std::cos(th), v, 0.5 * std::sin(th)};
        });
    } else {
        throw Error("base surface: unknown kind '" + kind + "'");
    }
    finish(mesh);
    return mesh;
}

const std::vector<std::string>& base_surface_kinds() {
    static const std::vector<std::string> kinds = {"grid",  "wavy-grid", "cylinder",
                                                   "torus", "sphere",    "folded-sheet"};
    return kinds;
}

} // namespace relief
