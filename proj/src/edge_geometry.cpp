#include "pdmesh/edge_geometry.hpp"

#include <cmath>
#include <limits>

namespace pdmesh {

namespace {

constexpr double kRatioCap = 1.0 / kDegenerateAreaEps;

double clamp_ratio(double r) {
    if (!std::isfinite(r) || r > kRatioCap) return kRatioCap;
    if (r < 1.0 / kRatioCap) return 1.0 / kRatioCap;
    return r;
}

// Third vertex of `face`, the one not on edge (a, b).
int opposite_vertex(const std::array<int, 3>& face, int a, int b) {
    for (int v : face) {
        if (v != a && v != b) return v;
    }
    return face[0];
}

double dihedral_for_edge(const Mesh& mesh, const MeshTopology& topo,
                         const FaceOrientation& orientation, int e,
                         const std::vector<bool>& degenerate) {
    const int fa = topo.edge_faces[e][0], fb = topo.edge_faces[e][1];
    if (degenerate[fa] || degenerate[fb]) return kPi;
    const int a = topo.edge_vertices[e][0], b = topo.edge_vertices[e][1];
    const Vec3 na = normalized(oriented_face_normal(mesh, orientation, fa));
    const Vec3 nb = normalized(oriented_face_normal(mesh, orientation, fb));
    // Edge direction as traversed by face fa (with its flip applied).
    Vec3 dir = normalized(mesh.vertices[b] - mesh.vertices[a]);
    const auto& face = mesh.faces[fa];
    bool forward = false;
    for (int k = 0; k < 3; ++k) {
        if (face[k] == a && face[(k + 1) % 3] == b) forward = !orientation.flip[fa];
        if (face[k] == b && face[(k + 1) % 3] == a) forward = orientation.flip[fa];
    }
    if (!forward) dir = -dir;
    const double psi = std::atan2(dot(cross(na, nb), dir), dot(na, nb));
    return kPi - psi;
}

}  // namespace

std::vector<double> dihedral_angles(const Mesh& mesh, const MeshTopology& topology) {
    const auto orientation = orient_faces(mesh, topology);
    const auto areas = face_areas(mesh);
    const auto degenerate = degenerate_faces(mesh, areas);
    std::vector<double> angles(topology.n_edges(), std::numeric_limits<double>::quiet_NaN());
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        angles[e] = dihedral_for_edge(mesh, topology, orientation, e, degenerate);
    }
    return angles;
}

EdgeGeometry edge_geometry(const Mesh& mesh, const MeshTopology& topology) {
    const auto orientation = orient_faces(mesh, topology);
    const auto areas = face_areas(mesh);
    const auto degenerate = degenerate_faces(mesh, areas);

    EdgeGeometry geo;
    geo.edges.resize(topology.n_edges());
    for (int e = 0; e < topology.n_edges(); ++e) {
        auto& out = geo.edges[e];
        const int a = topology.edge_vertices[e][0], b = topology.edge_vertices[e][1];
        out.length = norm(mesh.vertices[b] - mesh.vertices[a]);
        if (topology.edge_faces[e].size() != 2) continue;
        out.interior = true;

        const int faces[2] = {topology.edge_faces[e][0], topology.edge_faces[e][1]};
        out.degenerate = degenerate[faces[0]] || degenerate[faces[1]] || out.length <= 0.0;
        out.theta = dihedral_for_edge(mesh, topology, orientation, e, degenerate);
        for (int s = 0; s < 2; ++s) {
            const int f = faces[s];
            // h = 2*area/||ab||, so ||ab||/h = ||ab||^2 / (2*area)
            out.edge_height_ratio[s] = out.length * out.length / (2.0 * areas[f]);
            const int d = opposite_vertex(mesh.faces[f], a, b);
            out.edge_edge_ratio[s][0] = out.length / norm(mesh.vertices[d] - mesh.vertices[a]);
            out.edge_edge_ratio[s][1] = out.length / norm(mesh.vertices[d] - mesh.vertices[b]);
            if (out.degenerate) {
                out.edge_height_ratio[s] = clamp_ratio(out.edge_height_ratio[s]);
                out.edge_edge_ratio[s][0] = clamp_ratio(out.edge_edge_ratio[s][0]);
                out.edge_edge_ratio[s][1] = clamp_ratio(out.edge_edge_ratio[s][1]);
            }
        }
    }
    return geo;
}

}  // namespace pdmesh
