#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdmesh/mesh.hpp"
#include "pdmesh/util.hpp"

namespace pdmesh {

// Edge-centric connectivity derived from a Mesh. Edge ids are assigned in
// first-encounter order scanning faces 0..F-1 and corners (v0v1, v1v2, v2v0),
// so identical input bytes always produce identical ids.
struct MeshTopology {
    std::vector<std::array<int, 2>> edge_vertices;  // canonical: smaller vertex id first
    std::vector<std::vector<int>> edge_faces;       // incident faces, ascending
    std::vector<std::array<int, 3>> face_edges;     // edge ids per face corner pair
    std::vector<std::vector<int>> face_neighbors;   // across interior manifold edges, ascending
    std::vector<bool> boundary_edge;                // exactly one incident face
    std::unordered_map<std::uint64_t, int> edge_ids;

    int n_edges() const { return static_cast<int>(edge_vertices.size()); }

    int edge_id(int a, int b) const {
        auto it = edge_ids.find(pack_pair(std::min(a, b), std::max(a, b)));
        return it == edge_ids.end() ? -1 : it->second;
    }

    bool is_interior(int e) const { return edge_faces[e].size() == 2; }

    int n_interior_edges() const {
        int n = 0;
        for (const auto& fs : edge_faces) n += (fs.size() == 2);
        return n;
    }
};

MeshTopology build_topology(const Mesh& mesh);

struct ManifoldReport {
    bool edge_manifold = true;  // every edge has <= 2 incident faces
    bool watertight = true;     // every edge has exactly 2
    std::vector<int> offending_edges;

    bool pass() const { return edge_manifold; }
};

ManifoldReport check_edge_manifold(const MeshTopology& topology);

std::string manifold_report_text(const ManifoldReport& report, const MeshTopology& topology);

// Euler characteristic V - E + F.
int euler_characteristic(const Mesh& mesh, const MeshTopology& topology);

// Globally consistent face orientation, found by breadth-first propagation
// across interior manifold edges. For watertight meshes the result is also
// flipped to make normals point outward (positive signed volume).
// Throws if the mesh is non-orientable.
struct FaceOrientation {
    std::vector<bool> flip;  // face winding should be reversed
};

FaceOrientation orient_faces(const Mesh& mesh, const MeshTopology& topology);

// Face normal with the orientation flip applied (unnormalized).
Vec3 oriented_face_normal(const Mesh& mesh, const FaceOrientation& orientation, int face);

}  // namespace pdmesh
