#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "pdmesh/edge_geometry.hpp"
#include "pdmesh/mesh.hpp"
#include "pdmesh/rng.hpp"
#include "pdmesh/shapes.hpp"
#include "pdmesh/topology.hpp"
#include "support/fixtures.hpp"

using namespace pdmesh;

TEST_CASE("load_obj reads a tetrahedron") {
    const std::string path = fixtures::write_temp_obj(shapes::tetrahedron(), "tetra");
    const Mesh mesh = load_obj(path);
    CHECK(mesh.n_vertices() == 4);
    CHECK(mesh.n_faces() == 4);
    // vertex order preserved
    CHECK(mesh.vertices[0].x == doctest::Approx(1.0));
}

TEST_CASE("load_obj rejects quad faces") {
    const std::string path = "/tmp/pdmesh_test_quad.obj";
    std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
    CHECK_THROWS_WITH_AS(load_obj(path), doctest::Contains("non-triangular"),
                         std::runtime_error);
}

TEST_CASE("load_obj rejects empty and malformed input") {
    const std::string path = "/tmp/pdmesh_test_empty.obj";
    std::ofstream(path) << "# nothing here\n";
    CHECK_THROWS(load_obj(path));
    std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n";
    CHECK_THROWS(load_obj(path));
}

TEST_CASE("load_obj handles slash face records and ignores other tags") {
    const std::string path = "/tmp/pdmesh_test_slash.obj";
    std::ofstream(path) << "vn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1//1 2/1/1 3\n";
    const Mesh mesh = load_obj(path);
    CHECK(mesh.n_faces() == 1);
}

TEST_CASE("a 500-face closed mesh has 750 edges") {
    const Mesh mesh = shapes::torus(25, 10);
    const std::string path = fixtures::write_temp_obj(mesh, "torus500");
    const Mesh loaded = load_obj(path);
    CHECK(loaded.n_faces() == 500);
    CHECK(build_topology(loaded).n_edges() == 750);
}

TEST_CASE("build_topology counts") {
    SUBCASE("tetrahedron: 6 interior edges") {
        const Mesh mesh = shapes::tetrahedron();
        const MeshTopology topo = build_topology(mesh);
        CHECK(topo.n_edges() == 6);
        for (int e = 0; e < 6; ++e) CHECK(topo.edge_faces[e].size() == 2);
    }
    SUBCASE("single triangle: 3 boundary edges") {
        const MeshTopology topo = build_topology(shapes::single_triangle());
        CHECK(topo.n_edges() == 3);
        for (int e = 0; e < 3; ++e) CHECK(topo.boundary_edge[e]);
    }
    SUBCASE("icosahedron satisfies the Euler formula") {
        const Mesh mesh = shapes::icosahedron();
        const MeshTopology topo = build_topology(mesh);
        CHECK(mesh.n_vertices() == 12);
        CHECK(topo.n_edges() == 30);
        CHECK(mesh.n_faces() == 20);
        CHECK(euler_characteristic(mesh, topo) == 2);
    }
    SUBCASE("every watertight genus-0 generator satisfies the Euler formula") {
        Rng rng(11);
        for (const Mesh& mesh :
             {shapes::tetrahedron(), shapes::cube(3), shapes::octahedron(),
              shapes::icosphere(1), shapes::random_convex_hull(40, rng)}) {
            CHECK(euler_characteristic(mesh, build_topology(mesh)) == 2);
        }
    }
}

TEST_CASE("edge ids are deterministic for identical input bytes") {
    const std::string path = fixtures::write_temp_obj(shapes::icosphere(1), "det");
    const Mesh a = load_obj(path), b = load_obj(path);
    const MeshTopology ta = build_topology(a), tb = build_topology(b);
    REQUIRE(ta.n_edges() == tb.n_edges());
    CHECK(ta.edge_vertices == tb.edge_vertices);
}

TEST_CASE("check_edge_manifold") {
    SUBCASE("icosahedron: pass, watertight") {
        const auto report = check_edge_manifold(build_topology(shapes::icosahedron()));
        CHECK(report.pass());
        CHECK(report.watertight);
    }
    SUBCASE("three triangles on one edge: fail, edge listed") {
        const Mesh mesh = shapes::three_fans_on_edge();
        const MeshTopology topo = build_topology(mesh);
        const auto report = check_edge_manifold(topo);
        CHECK_FALSE(report.pass());
        REQUIRE(report.offending_edges.size() == 1);
        const int e = report.offending_edges[0];
        CHECK(topo.edge_vertices[e] == std::array<int, 2>{0, 1});
        CHECK(topo.edge_faces[e].size() == 3);
    }
    SUBCASE("single triangle: pass, not watertight") {
        const auto report = check_edge_manifold(build_topology(shapes::single_triangle()));
        CHECK(report.pass());
        CHECK_FALSE(report.watertight);
    }
}

TEST_CASE("face_areas") {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    CHECK(face_areas(m)[0] == doctest::Approx(0.5));

    Mesh eq;
    eq.vertices = {{0, 0, 0}, {2, 0, 0}, {1, std::sqrt(3.0), 0}};
    eq.faces = {{0, 1, 2}};
    CHECK(face_areas(eq)[0] == doctest::Approx(std::sqrt(3.0)));

    Mesh sliver;
    sliver.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 5, 0}};
    sliver.faces = {{0, 1, 3}, {0, 1, 2}};
    const auto areas = face_areas(sliver);
    CHECK(areas[1] == 0.0);
    const auto flags = degenerate_faces(sliver, areas);
    CHECK(flags[1]);
    CHECK_FALSE(flags[0]);

    double total = 0.0;
    for (double a : face_areas(shapes::icosphere(1))) total += a;
    CHECK(total > 0.0);
}

TEST_CASE("dihedral angles") {
    SUBCASE("coplanar pair gives pi") {
        const Mesh mesh = fixtures::coplanar_pair();
        const MeshTopology topo = build_topology(mesh);
        const auto angles = dihedral_angles(mesh, topo);
        const int e = topo.edge_id(0, 1);
        CHECK(angles[e] == doctest::Approx(kPi).epsilon(1e-12));
    }
    SUBCASE("cube corner gives pi/2") {
        const Mesh mesh = fixtures::cube_corner_pair();
        const MeshTopology topo = build_topology(mesh);
        const int e = topo.edge_id(0, 1);
        CHECK(dihedral_angles(mesh, topo)[e] == doctest::Approx(kPi / 2).epsilon(1e-12));
    }
    SUBCASE("triangulated cube: interior edges are pi/2 or pi") {
        const Mesh mesh = shapes::cube(1);
        const MeshTopology topo = build_topology(mesh);
        const auto angles = dihedral_angles(mesh, topo);
        int right = 0, flat = 0;
        for (int e = 0; e < topo.n_edges(); ++e) {
            if (std::abs(angles[e] - kPi / 2) < 1e-12) ++right;
            if (std::abs(angles[e] - kPi) < 1e-12) ++flat;
        }
        CHECK(right == 12);  // cube edges
        CHECK(flat == 6);    // face diagonals
    }
    SUBCASE("regular tetrahedron gives arccos(1/3)") {
        const Mesh mesh = shapes::tetrahedron();
        const MeshTopology topo = build_topology(mesh);
        const auto angles = dihedral_angles(mesh, topo);
        for (int e = 0; e < topo.n_edges(); ++e) {
            CHECK(angles[e] == doctest::Approx(std::acos(1.0 / 3.0)).epsilon(1e-12));
        }
    }
    SUBCASE("mirroring leaves dihedral angles invariant") {
        Mesh mesh = shapes::icosphere(1);
        const MeshTopology topo = build_topology(mesh);
        const auto before = dihedral_angles(mesh, topo);
        Mesh mirrored = mesh;
        for (auto& v : mirrored.vertices) v.x = -v.x;
        const MeshTopology mirrored_topo = build_topology(mirrored);
        const auto after = dihedral_angles(mirrored, mirrored_topo);
        for (int e = 0; e < topo.n_edges(); ++e) {
            CHECK(after[e] == doctest::Approx(before[e]).epsilon(1e-9));
        }
    }
    SUBCASE("degenerate neighbor gets pi and a flag") {
        Mesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {2, 0, 0}};
        m.faces = {{0, 1, 2}, {1, 0, 3}};  // second face is collinear
        const MeshTopology topo = build_topology(m);
        const auto geo = edge_geometry(m, topo);
        const int e = topo.edge_id(0, 1);
        CHECK(geo.edges[e].degenerate);
        CHECK(geo.edges[e].theta == doctest::Approx(kPi));
    }
}

TEST_CASE("winding repair and orientability") {
    SUBCASE("inconsistent winding is repaired before dihedral computation") {
        const Mesh mesh = shapes::icosphere(1);
        const auto reference = dihedral_angles(mesh, build_topology(mesh));
        Mesh scrambled = mesh;
        Rng rng(5);
        for (auto& f : scrambled.faces) {
            if (rng.uniform() < 0.5) std::swap(f[1], f[2]);
        }
        const MeshTopology topo = build_topology(scrambled);
        const auto angles = dihedral_angles(scrambled, topo);
        for (int e = 0; e < topo.n_edges(); ++e) {
            const int a = topo.edge_vertices[e][0], b = topo.edge_vertices[e][1];
            const int ref_edge = build_topology(mesh).edge_id(a, b);
            CHECK(angles[e] == doctest::Approx(reference[ref_edge]).epsilon(1e-9));
        }
    }
    SUBCASE("a Moebius band is a hard error") {
        Mesh m;  // classic 5-triangle Moebius triangulation
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0.5, 0}, {0.5, 1, 0.5}, {1.5, 1, 0.5}};
        m.faces = {{0, 1, 2}, {1, 3, 2}, {2, 3, 4}, {3, 0, 4}, {4, 0, 1}};
        const MeshTopology topo = build_topology(m);
        REQUIRE(check_edge_manifold(topo).pass());
        CHECK_THROWS_WITH_AS((void)orient_faces(m, topo), doctest::Contains("non-orientable"),
                             std::runtime_error);
    }
}

TEST_CASE("edge geometry ratios") {
    SUBCASE("equilateral pair") {
        const Mesh mesh = fixtures::equilateral_pair();
        const MeshTopology topo = build_topology(mesh);
        const auto geo = edge_geometry(mesh, topo);
        const int e = topo.edge_id(0, 1);
        REQUIRE(geo.edges[e].interior);
        CHECK(geo.edges[e].edge_height_ratio[0] == doctest::Approx(2.0 / std::sqrt(3.0)));
        CHECK(geo.edges[e].edge_height_ratio[1] == doctest::Approx(2.0 / std::sqrt(3.0)));
        for (int s = 0; s < 2; ++s) {
            CHECK(geo.edges[e].edge_edge_ratio[s][0] == doctest::Approx(1.0));
            CHECK(geo.edges[e].edge_edge_ratio[s][1] == doctest::Approx(1.0));
        }
        // law-of-cosines identity collapses to cos(gamma) = 1/2
        const double k1 = geo.edges[e].edge_edge_ratio[0][0];
        const double k2 = geo.edges[e].edge_edge_ratio[0][1];
        CHECK(0.5 * (k1 / k2 + k2 / k1 - k1 * k2) == doctest::Approx(0.5));
    }
    SUBCASE("law-of-cosines identity on 1000 random triangles") {
        Rng rng(3);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            Mesh m;
            auto rv = [&] { return Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                        rng.uniform(-1, 1)}; };
            m.vertices = {rv(), rv(), rv(), rv()};
            m.faces = {{0, 1, 2}, {1, 0, 3}};
            const auto areas = face_areas(m);
            if (areas[0] < 1e-3 || areas[1] < 1e-3) continue;  // skip near-degenerate draws
            const MeshTopology topo = build_topology(m);
            const auto geo = edge_geometry(m, topo);
            const int e = topo.edge_id(0, 1);
            // direct internal angle at the vertex opposite the shared edge
            for (int s = 0; s < 2; ++s) {
                const int f = topo.edge_faces[e][s];
                int d = -1;
                for (int v : m.faces[f]) {
                    if (v != 0 && v != 1) d = v;
                }
                const Vec3 da = m.vertices[0] - m.vertices[d];
                const Vec3 db = m.vertices[1] - m.vertices[d];
                const double direct = dot(da, db) / (norm(da) * norm(db));
                const double k1 = geo.edges[e].edge_edge_ratio[s][0];
                const double k2 = geo.edges[e].edge_edge_ratio[s][1];
                const double via_ratios = 0.5 * (k1 / k2 + k2 / k1 - k1 * k2);
                worst = std::max(worst, std::abs(direct - via_ratios));
            }
        }
        CHECK(worst < 1e-12);
    }
}
