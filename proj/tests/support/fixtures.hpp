#pragma once

#include <string>

#include "pdmesh/mesh.hpp"
#include "pdmesh/shapes.hpp"

namespace pdmesh::fixtures {

// Two triangles sharing edge (0, 1) in the z = 0 plane.
inline Mesh coplanar_pair() {
    Mesh m;
    m.name = "coplanar-pair";
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, -1, 0}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    return m;
}

// Two faces of a unit cube meeting at a right angle along edge (0, 1).
inline Mesh cube_corner_pair() {
    Mesh m;
    m.name = "cube-corner";
    m.vertices = {{1, 0, 1}, {1, 1, 1}, {0, 0, 1}, {1, 0, 0}};
    m.faces = {{0, 1, 2},   // top (z = 1), outward +z
               {1, 0, 3}};  // side (x = 1), outward +x
    return m;
}

// Two equilateral triangles folded along a shared unit edge.
inline Mesh equilateral_pair() {
    Mesh m;
    m.name = "equilateral-pair";
    const double h = std::sqrt(3.0) / 2.0;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {0.5, -h / 2, h * 0.866}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    return m;
}

// Scalene pair with distinct side lengths on both faces.
inline Mesh scalene_pair() {
    Mesh m;
    m.name = "scalene-pair";
    m.vertices = {{0, 0, 0}, {2, 0, 0}, {0.3, 1.4, 0}, {1.2, -0.9, 0.8}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    return m;
}

// Mesh with two faces of areas 1 and 3.
inline Mesh two_face_areas_1_3() {
    Mesh m;
    m.name = "areas-1-3";
    m.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, -3, 0}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    return m;
}

inline std::string write_temp_obj(const Mesh& mesh, const std::string& name) {
    const std::string path = "/tmp/pdmesh_test_" + name + ".obj";
    save_obj(mesh, path);
    return path;
}

}  // namespace pdmesh::fixtures
