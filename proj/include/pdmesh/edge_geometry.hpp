#pragma once

#include <array>
#include <vector>

#include "pdmesh/topology.hpp"

namespace pdmesh {

// Per-edge geometric quantities behind the dual-node features. Slot 0/1
// refer to the two incident faces in ascending face-id order, and the edge
// endpoints (a, b) are the canonical pair with a < b.
struct EdgeGeometry {
    struct PerEdge {
        double theta = kPi;     // dihedral angle, flat convention = pi
        double length = 0.0;
        std::array<double, 2> edge_height_ratio{0.0, 0.0};          // ||ab|| / h_face
        std::array<std::array<double, 2>, 2> edge_edge_ratio{};     // [face][{ad, bd} side]
        bool interior = false;  // exactly two incident faces
        bool degenerate = false;
    };
    std::vector<PerEdge> edges;
};

// Dihedral angle per edge: theta = pi - signed angle between the outward
// face normals around the shared edge, so coplanar faces give pi, convex
// folds < pi, concave folds > pi. Boundary/non-manifold entries are NaN.
// Edges touching a degenerate face get pi and are flagged in EdgeGeometry.
std::vector<double> dihedral_angles(const Mesh& mesh, const MeshTopology& topology);

EdgeGeometry edge_geometry(const Mesh& mesh, const MeshTopology& topology);

}  // namespace pdmesh
