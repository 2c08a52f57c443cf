#include "pdmesh/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "pdmesh/geometry.hpp"

namespace pdmesh::shapes {

Mesh tetrahedron() {
    Mesh m;
    m.name = "tetrahedron";
    m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return m;
}

Mesh cube(int n) {
    if (n < 1) throw std::invalid_argument("cube subdivision must be >= 1");
    Mesh m;
    m.name = "cube";
    std::map<std::array<int, 3>, int> grid;
    auto vertex = [&](int x, int y, int z) {
        auto it = grid.find({x, y, z});
        if (it != grid.end()) return it->second;
        int id = m.n_vertices();
        grid[{x, y, z}] = id;
        const double s = 1.0 / n;
        m.vertices.push_back({x * s, y * s, z * s});
        return id;
    };
    // Each side is a lattice of quads; corner order picked so normals face out.
    auto side = [&](Vec3, std::array<int, 3> origin, std::array<int, 3> du,
                    std::array<int, 3> dv) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                auto at = [&](int a, int b) {
                    return vertex(origin[0] + a * du[0] + b * dv[0],
                                  origin[1] + a * du[1] + b * dv[1],
                                  origin[2] + a * du[2] + b * dv[2]);
                };
                int v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1),
                    v11 = at(i + 1, j + 1);
                m.faces.push_back({v00, v10, v11});
                m.faces.push_back({v00, v11, v01});
            }
        }
    };
    side({0, 0, -1}, {0, 0, 0}, {0, 1, 0}, {1, 0, 0});  // z = 0
    side({0, 0, 1}, {0, 0, n}, {1, 0, 0}, {0, 1, 0});   // z = 1
    side({0, -1, 0}, {0, 0, 0}, {1, 0, 0}, {0, 0, 1});  // y = 0
    side({0, 1, 0}, {0, n, 0}, {0, 0, 1}, {1, 0, 0});   // y = 1
    side({-1, 0, 0}, {0, 0, 0}, {0, 0, 1}, {0, 1, 0});  // x = 0
    side({1, 0, 0}, {n, 0, 0}, {0, 1, 0}, {0, 0, 1});   // x = 1
    return m;
}

Mesh octahedron() {
    Mesh m;
    m.name = "octahedron";
    m.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
               {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    return m;
}

Mesh icosahedron() {
    Mesh m;
    m.name = "icosahedron";
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::vector<Vec3> raw = {
        {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    for (const auto& v : raw) m.vertices.push_back(normalized(v));
    m.faces = {{0, 11, 5}, {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return m;
}

Mesh icosphere(int level) {
    Mesh m = icosahedron();
    m.name = "icosphere" + std::to_string(level);
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int id = m.n_vertices();
            midpoint[key] = id;
            m.vertices.push_back(normalized((m.vertices[a] + m.vertices[b]) * 0.5));
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

Mesh torus(int nu, int nv, double major, double minor) {
    if (nu < 3 || nv < 3) throw std::invalid_argument("torus grid must be >= 3x3");
    Mesh m;
    m.name = "torus";
    for (int i = 0; i < nu; ++i) {
        const double u = 2.0 * kPi * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = 2.0 * kPi * j / nv;
            const double r = major + minor * std::cos(v);
            m.vertices.push_back({r * std::cos(u), r * std::sin(u), minor * std::sin(v)});
        }
    }
    auto at = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
    for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
            int v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
            m.faces.push_back({v00, v10, v11});
            m.faces.push_back({v00, v11, v01});
        }
    }
    return m;
}

Mesh single_triangle() {
    Mesh m;
    m.name = "triangle";
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

Mesh closed_fan(int n) {
    if (n < 3) throw std::invalid_argument("closed fan needs >= 3 faces");
    Mesh m;
    m.name = "fan" + std::to_string(n);
    m.vertices.push_back({0, 0, 0.5});  // apex
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * kPi * i / n;
        m.vertices.push_back({std::cos(a), std::sin(a), 0.0});
    }
    for (int i = 0; i < n; ++i) {
        m.faces.push_back({0, 1 + i, 1 + (i + 1) % n});
    }
    return m;
}

Mesh strip(int n) {
    if (n < 1) throw std::invalid_argument("strip needs >= 1 face");
    Mesh m;
    m.name = "strip" + std::to_string(n);
    // Two rows of vertices; faces zig-zag between them.
    const int cols = n / 2 + 2;
    for (int c = 0; c < cols; ++c) m.vertices.push_back({static_cast<double>(c), 0.0, 0.0});
    for (int c = 0; c < cols; ++c) m.vertices.push_back({c + 0.5, 1.0, 0.0});
    auto bottom = [&](int c) { return c; };
    auto top = [&](int c) { return cols + c; };
    for (int i = 0; i < n; ++i) {
        const int c = i / 2;
        if (i % 2 == 0) {
            m.faces.push_back({bottom(c), bottom(c + 1), top(c)});
        } else {
            m.faces.push_back({bottom(c + 1), top(c + 1), top(c)});
        }
    }
    return m;
}

Mesh three_fans_on_edge() {
    Mesh m;
    m.name = "nonmanifold-edge";
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, -1, 0.5}, {0.5, -1, -0.5}};
    m.faces = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
    return m;
}

Mesh random_convex_hull(int n, Rng& rng) {
    if (n < 4) throw std::invalid_argument("hull needs >= 4 points");
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        // Uniform direction via normalized gaussian-free rejection sampling.
        while (true) {
            Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const double d = dot(p, p);
            if (d > 1e-6 && d <= 1.0) {
                pts.push_back(normalized(p));
                break;
            }
        }
    }
    Mesh m;
    m.name = "hull" + std::to_string(n);
    m.vertices = pts;
    Vec3 centroid{0, 0, 0};
    for (const auto& p : pts) centroid = centroid + p;
    centroid = centroid / n;
    // Brute force: a triple is a hull face iff all other points lie strictly
    // on one side of its plane. Points on a sphere are in general position.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int k = j + 1; k < n; ++k) {
                const Vec3 nrm = cross(pts[j] - pts[i], pts[k] - pts[i]);
                bool pos = false, neg = false;
                for (int t = 0; t < n && !(pos && neg); ++t) {
                    if (t == i || t == j || t == k) continue;
                    const double s = dot(nrm, pts[t] - pts[i]);
                    (s > 0 ? pos : neg) = true;
                }
                if (pos && neg) continue;
                // orient outward w.r.t. centroid
                if (dot(nrm, pts[i] - centroid) > 0) {
                    m.faces.push_back({i, j, k});
                } else {
                    m.faces.push_back({i, k, j});
                }
            }
        }
    }
    return m;
}

Mesh jitter_along_edges(const Mesh& mesh, Rng& rng, double amount) {
    std::vector<std::set<int>> nbrs(mesh.vertices.size());
    for (const auto& f : mesh.faces) {
        for (int k = 0; k < 3; ++k) {
            nbrs[f[k]].insert(f[(k + 1) % 3]);
            nbrs[f[k]].insert(f[(k + 2) % 3]);
        }
    }
    Mesh out = mesh;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (nbrs[v].empty()) continue;
        std::vector<int> ns(nbrs[v].begin(), nbrs[v].end());
        const int pick = ns[rng.uniform_int(static_cast<int>(ns.size()))];
        const double t = rng.uniform(0.0, amount);
        out.vertices[v] = mesh.vertices[v] + (mesh.vertices[pick] - mesh.vertices[v]) * t;
    }
    return out;
}

}  // namespace pdmesh::shapes
