#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pdmesh/graph.hpp"
#include "pdmesh/shapes.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace pdmesh;

namespace {

std::vector<int> in_degrees(const DualGraph& dual) {
    std::vector<int> deg(dual.n_nodes(), 0);
    for (const auto& [s, d] : dual.arcs) {
        (void)s;
        ++deg[d];
    }
    return deg;
}

std::vector<int> out_degrees(const DualGraph& dual) {
    std::vector<int> deg(dual.n_nodes(), 0);
    for (const auto& [s, d] : dual.arcs) {
        (void)d;
        ++deg[s];
    }
    return deg;
}

}  // namespace

TEST_CASE("build_primal") {
    SUBCASE("tetrahedron is K4") {
        const Mesh mesh = shapes::tetrahedron();
        const PrimalGraph g = build_primal(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 4);
        CHECK(g.n_edges() == 6);
        for (const auto& nbrs : g.adj) CHECK(nbrs.size() == 3);
    }
    SUBCASE("single triangle: one node, no edges") {
        const Mesh mesh = shapes::single_triangle();
        const PrimalGraph g = build_primal(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 1);
        CHECK(g.n_edges() == 0);
    }
    SUBCASE("icosahedron: 20 nodes, 30 edges, 3-regular") {
        const Mesh mesh = shapes::icosahedron();
        const PrimalGraph g = build_primal(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 20);
        CHECK(g.n_edges() == 30);
        for (const auto& nbrs : g.adj) CHECK(nbrs.size() == 3);
    }
    SUBCASE("3-regularity and |dual| = 3|F|/2 across watertight test meshes") {
        Rng rng(17);
        for (const Mesh& mesh : {shapes::octahedron(), shapes::icosphere(1),
                                 shapes::cube(2), shapes::random_convex_hull(30, rng)}) {
            const MeshTopology topo = build_topology(mesh);
            const PrimalGraph g = build_primal(mesh, topo);
            for (const auto& nbrs : g.adj) CHECK(nbrs.size() == 3);
            CHECK(g.n_edges() == 3 * mesh.n_faces() / 2);
            const DualGraph d = build_dual(mesh, topo, DualConfig::A);
            CHECK(d.n_nodes() == g.n_edges());
        }
    }
}

TEST_CASE("build_dual configuration A") {
    const Mesh mesh = shapes::tetrahedron();
    const MeshTopology topo = build_topology(mesh);
    const DualGraph dual = build_dual(mesh, topo, DualConfig::A);
    CHECK(dual.n_nodes() == 6);
    CHECK(dual.arcs.size() == 24);  // 12 undirected line-graph edges
    for (int deg : in_degrees(dual)) CHECK(deg == 4);

    // exact match with the brute-force line graph of K4 (config A dual node
    // ids coincide with primal edge indices)
    const PrimalGraph primal = build_primal(mesh, topo);
    CHECK(oracles::dual_undirected_edges(dual) ==
          oracles::brute_force_line_graph_edges(primal));
}

TEST_CASE("build_dual configuration B") {
    const Mesh mesh = shapes::tetrahedron();
    const MeshTopology topo = build_topology(mesh);
    const DualGraph dual = build_dual(mesh, topo, DualConfig::B);
    CHECK(dual.n_nodes() == 12);
    for (int deg : in_degrees(dual)) CHECK(deg == 4);
    for (int deg : out_degrees(dual)) CHECK(deg == 4);

    // independent check of the adjacency rule: target u->v receives from
    // m->u (m adjacent to u, m != v) and from v->n (n adjacent to v, n != u)
    const PrimalGraph primal = build_primal(mesh, topo);
    std::map<std::pair<int, int>, int> node_of;
    for (int j = 0; j < dual.n_nodes(); ++j) {
        node_of[{dual.node_keys[j][0], dual.node_keys[j][1]}] = j;
    }
    std::set<std::array<int, 2>> expected;
    for (int j = 0; j < dual.n_nodes(); ++j) {
        const int u = dual.node_keys[j][0], v = dual.node_keys[j][1];
        for (int m : primal.adj[u]) {
            if (m != v) expected.insert({node_of.at({m, u}), j});
        }
        for (int n : primal.adj[v]) {
            if (n != u) expected.insert({node_of.at({v, n}), j});
        }
    }
    std::set<std::array<int, 2>> actual(dual.arcs.begin(), dual.arcs.end());
    CHECK(actual == expected);
}

TEST_CASE("build_dual configuration C is strictly directed") {
    const Mesh mesh = shapes::tetrahedron();
    const MeshTopology topo = build_topology(mesh);
    const DualGraph dual = build_dual(mesh, topo, DualConfig::C);
    CHECK(dual.n_nodes() == 12);
    for (int deg : in_degrees(dual)) CHECK(deg == 2);  // N_A minus B on a tetrahedron
    std::set<std::array<int, 2>> arcs(dual.arcs.begin(), dual.arcs.end());
    for (const auto& [s, d] : arcs) {
        CHECK(arcs.find({d, s}) == arcs.end());  // no reverse arc
    }
}

TEST_CASE("single triangle has no dual nodes") {
    const Mesh mesh = shapes::single_triangle();
    const DualGraph dual = build_dual(mesh, build_topology(mesh), DualConfig::A);
    CHECK(dual.n_nodes() == 0);
}

TEST_CASE("build_dual rejects non-manifold meshes") {
    const Mesh mesh = shapes::three_fans_on_edge();
    CHECK_THROWS_WITH_AS(
        (void)build_dual(mesh, build_topology(mesh), DualConfig::A),
        doctest::Contains("extension point"), std::runtime_error);
}

TEST_CASE("compute_primal_features") {
    SUBCASE("icosahedron: every face 0.05") {
        const Matrix f = compute_primal_features(shapes::icosahedron());
        for (std::size_t r = 0; r < f.rows; ++r) {
            CHECK(f(r, 0) == doctest::Approx(0.05).epsilon(1e-12));
        }
    }
    SUBCASE("areas 1 and 3 give 0.25 and 0.75") {
        const Matrix f = compute_primal_features(fixtures::two_face_areas_1_3());
        CHECK(f(0, 0) == doctest::Approx(0.25));
        CHECK(f(1, 0) == doctest::Approx(0.75));
    }
    SUBCASE("features sum to 1") {
        Rng rng(23);
        const Mesh mesh = shapes::random_convex_hull(50, rng);
        const Matrix f = compute_primal_features(mesh);
        double sum = 0.0;
        for (double v : f.data) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    SUBCASE("zero total area is an error") {
        Mesh degenerate;
        degenerate.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
        degenerate.faces = {{0, 1, 2}};
        CHECK_THROWS(compute_primal_features(degenerate));
    }
}

TEST_CASE("compute_dual_features") {
    SUBCASE("regular tetrahedron, config A: identical known rows") {
        const Mesh mesh = shapes::tetrahedron();
        const MeshTopology topo = build_topology(mesh);
        const Matrix f = compute_dual_features(edge_geometry(mesh, topo), topo, DualConfig::A);
        REQUIRE(f.rows == 6);
        REQUIRE(f.cols == 7);
        for (std::size_t r = 0; r < f.rows; ++r) {
            CHECK(f(r, 0) == doctest::Approx(std::acos(1.0 / 3.0)));
            CHECK(f(r, 1) == doctest::Approx(2.0 / std::sqrt(3.0)));
            CHECK(f(r, 2) == doctest::Approx(2.0 / std::sqrt(3.0)));
            for (int k = 3; k < 7; ++k) CHECK(f(r, k) == doctest::Approx(1.0));
        }
    }
    SUBCASE("config A rows are invariant to face relabeling") {
        const Mesh mesh = fixtures::scalene_pair();
        const MeshTopology topo = build_topology(mesh);
        const Matrix f = compute_dual_features(edge_geometry(mesh, topo), topo, DualConfig::A);

        Mesh swapped = mesh;
        std::swap(swapped.faces[0], swapped.faces[1]);
        const MeshTopology topo2 = build_topology(swapped);
        const Matrix g = compute_dual_features(edge_geometry(swapped, topo2), topo2,
                                               DualConfig::A);
        REQUIRE(f.rows == g.rows);
        for (std::size_t k = 0; k < f.size(); ++k) {
            CHECK(f.data[k] == doctest::Approx(g.data[k]).epsilon(1e-12));
        }
    }
    SUBCASE("config B: paired rows share theta and carry per-face ratios") {
        const Mesh mesh = fixtures::scalene_pair();
        const MeshTopology topo = build_topology(mesh);
        const Matrix f = compute_dual_features(edge_geometry(mesh, topo), topo, DualConfig::B);
        const int e = topo.edge_id(0, 1);
        REQUIRE(e >= 0);
        // rows 2e (face0 -> face1) and 2e+1 (face1 -> face0)
        CHECK(f(2 * e, 0) == f(2 * e + 1, 0));
        // hand-computed ratios for face 0 = (0,1,2): ||ab||=2, ad=|v2-v0|, bd=|v2-v1|
        const double ab = 2.0;
        const double ad = norm(Vec3{0.3, 1.4, 0});
        const double bd = norm(Vec3{0.3 - 2, 1.4, 0});
        CHECK(f(2 * e, 2) == doctest::Approx(ab / ad));
        CHECK(f(2 * e, 3) == doctest::Approx(ab / bd));
        // the two directed rows differ in their ratio block
        CHECK(f(2 * e, 1) != doctest::Approx(f(2 * e + 1, 1)));
    }
    SUBCASE("no NaN/Inf on non-degenerate meshes") {
        Rng rng(29);
        for (DualConfig config : {DualConfig::A, DualConfig::B, DualConfig::C}) {
            const Mesh mesh = shapes::random_convex_hull(40, rng);
            const MeshTopology topo = build_topology(mesh);
            const Matrix f = compute_dual_features(edge_geometry(mesh, topo), topo, config);
            for (double v : f.data) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("medial graph") {
    SUBCASE("tetrahedron: 6 nodes, 12 edges") {
        const Mesh mesh = shapes::tetrahedron();
        const SimpleGraph g = medial_graph(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 6);
        CHECK(g.edges.size() == 12);
    }
    SUBCASE("single triangle: 3 nodes, 3 edges") {
        const Mesh mesh = shapes::single_triangle();
        const SimpleGraph g = medial_graph(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 3);
        CHECK(g.edges.size() == 3);
    }
    SUBCASE("icosahedron: 30 nodes, 60 edges, 4-regular") {
        const Mesh mesh = shapes::icosahedron();
        const SimpleGraph g = medial_graph(mesh, build_topology(mesh));
        CHECK(g.n_nodes == 30);
        CHECK(g.edges.size() == 60);
        std::vector<int> deg(g.n_nodes, 0);
        for (const auto& [a, b] : g.edges) {
            ++deg[a];
            ++deg[b];
        }
        for (int d : deg) CHECK(d == 4);
    }
}

TEST_CASE("medial/line equivalence verifier") {
    SUBCASE("passes on genus-0 manifold meshes") {
        Rng rng(31);
        for (const Mesh& mesh : {shapes::tetrahedron(), shapes::icosphere(2),
                                 shapes::random_convex_hull(100, rng)}) {
            const auto report = verify_medial_line_equivalence(mesh, build_topology(mesh));
            CHECK(report.precondition_ok);
            CHECK(report.pass);
        }
    }
    SUBCASE("torus reports a precondition violation, not a failure") {
        const Mesh mesh = shapes::torus(8, 6);
        const auto report = verify_medial_line_equivalence(mesh, build_topology(mesh));
        CHECK_FALSE(report.precondition_ok);
        CHECK_FALSE(report.pass);
        CHECK(report.detail.find("precondition") != std::string::npos);
    }
    SUBCASE("open mesh reports a precondition violation") {
        const auto report = verify_medial_line_equivalence(
            shapes::single_triangle(), build_topology(shapes::single_triangle()));
        CHECK_FALSE(report.precondition_ok);
    }
}

TEST_CASE("graph construction is stable under face reordering") {
    const Mesh mesh = shapes::icosphere(1);
    const MeshTopology topo = build_topology(mesh);
    const PrimalGraph g = build_primal(mesh, topo);

    // reverse the face order; node i of the reordered graph is face perm[i]
    Mesh reordered = mesh;
    std::reverse(reordered.faces.begin(), reordered.faces.end());
    const int n = mesh.n_faces();
    const MeshTopology topo2 = build_topology(reordered);
    const PrimalGraph h = build_primal(reordered, topo2);

    auto canon = [n](const PrimalGraph& graph, bool reversed) {
        std::set<std::array<int, 2>> edges;
        for (const auto& e : graph.edges) {
            const int a = reversed ? n - 1 - e[0] : e[0];
            const int b = reversed ? n - 1 - e[1] : e[1];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
        return edges;
    };
    CHECK(canon(g, false) == canon(h, true));
}

TEST_CASE("graph pair JSON dump") {
    const Mesh mesh = shapes::tetrahedron();
    const MeshTopology topo = build_topology(mesh);
    const GraphPair pair = build_graph_pair(mesh, topo, DualConfig::A);
    const std::string json = graph_pair_to_json(pair);
    CHECK(json.find("\"primal\"") != std::string::npos);
    CHECK(json.find("\"dual\"") != std::string::npos);
    CHECK(json.find("\"config\": \"A\"") != std::string::npos);
}
