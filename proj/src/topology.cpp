#include "pdmesh/topology.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace pdmesh {

MeshTopology build_topology(const Mesh& mesh) {
    validate_mesh(mesh);
    MeshTopology topo;
    topo.face_edges.resize(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            const int a = face[k], b = face[(k + 1) % 3];
            const std::uint64_t key = pack_pair(std::min(a, b), std::max(a, b));
            auto it = topo.edge_ids.find(key);
            int e;
            if (it == topo.edge_ids.end()) {
                e = topo.n_edges();
                topo.edge_ids.emplace(key, e);
                topo.edge_vertices.push_back({std::min(a, b), std::max(a, b)});
                topo.edge_faces.emplace_back();
            } else {
                e = it->second;
            }
            topo.edge_faces[e].push_back(static_cast<int>(f));
            topo.face_edges[f][k] = e;
        }
    }
    topo.boundary_edge.resize(topo.n_edges());
    for (int e = 0; e < topo.n_edges(); ++e) {
        std::sort(topo.edge_faces[e].begin(), topo.edge_faces[e].end());
        topo.boundary_edge[e] = topo.edge_faces[e].size() == 1;
    }
    topo.face_neighbors.resize(mesh.faces.size());
    for (int e = 0; e < topo.n_edges(); ++e) {
        if (topo.edge_faces[e].size() != 2) continue;
        const int fa = topo.edge_faces[e][0], fb = topo.edge_faces[e][1];
        topo.face_neighbors[fa].push_back(fb);
        topo.face_neighbors[fb].push_back(fa);
    }
    for (auto& nbrs : topo.face_neighbors) std::sort(nbrs.begin(), nbrs.end());
    return topo;
}

ManifoldReport check_edge_manifold(const MeshTopology& topology) {
    ManifoldReport report;
    for (int e = 0; e < topology.n_edges(); ++e) {
        const std::size_t n = topology.edge_faces[e].size();
        if (n > 2) {
            report.edge_manifold = false;
            report.offending_edges.push_back(e);
        }
        if (n != 2) report.watertight = false;
    }
    return report;
}

std::string manifold_report_text(const ManifoldReport& report, const MeshTopology& topology) {
    std::ostringstream os;
    os << "edge-manifold: " << (report.edge_manifold ? "pass" : "fail")
       << ", watertight: " << (report.watertight ? "yes" : "no") << "\n";
    for (int e : report.offending_edges) {
        os << "edge " << e << " (" << topology.edge_vertices[e][0] << ", "
           << topology.edge_vertices[e][1] << ") has "
           << topology.edge_faces[e].size() << " incident faces\n";
    }
    return os.str();
}

int euler_characteristic(const Mesh& mesh, const MeshTopology& topology) {
    return mesh.n_vertices() - topology.n_edges() + mesh.n_faces();
}

namespace {

// True when face `f` traverses canonical edge (a, b) in the order a -> b,
// after applying its current flip state.
bool traverses_forward(const Mesh& mesh, int f, int a, int b, bool flipped) {
    const auto& face = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
        const int u = face[k], v = face[(k + 1) % 3];
        if (u == a && v == b) return !flipped;
        if (u == b && v == a) return flipped;
    }
    throw std::logic_error("edge not on face");
}

}  // namespace

FaceOrientation orient_faces(const Mesh& mesh, const MeshTopology& topology) {
    FaceOrientation orientation;
    orientation.flip.assign(mesh.faces.size(), false);
    std::vector<char> visited(mesh.faces.size(), 0);

    for (int seed = 0; seed < mesh.n_faces(); ++seed) {
        if (visited[seed]) continue;
        visited[seed] = 1;
        std::deque<int> queue{seed};
        while (!queue.empty()) {
            const int f = queue.front();
            queue.pop_front();
            for (int k = 0; k < 3; ++k) {
                const int e = topology.face_edges[f][k];
                if (topology.edge_faces[e].size() != 2) continue;
                const int g = topology.edge_faces[e][0] == f ? topology.edge_faces[e][1]
                                                             : topology.edge_faces[e][0];
                const int a = topology.edge_vertices[e][0], b = topology.edge_vertices[e][1];
                // Consistent orientation: the two faces traverse the shared
                // edge in opposite directions.
                const bool want_flip =
                    traverses_forward(mesh, f, a, b, orientation.flip[f]) ==
                    traverses_forward(mesh, g, a, b, orientation.flip[g]);
                if (!visited[g]) {
                    visited[g] = 1;
                    orientation.flip[g] = want_flip ? !orientation.flip[g] : orientation.flip[g];
                    queue.push_back(g);
                } else if (want_flip) {
                    throw std::runtime_error("mesh is non-orientable");
                }
            }
        }
    }

    // Outward fix for closed meshes: positive signed volume.
    bool watertight = true;
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) watertight = false;
    }
    if (watertight && !mesh.faces.empty()) {
        double volume6 = 0.0;
        for (int f = 0; f < mesh.n_faces(); ++f) {
            auto face = mesh.faces[f];
            if (orientation.flip[f]) std::swap(face[1], face[2]);
            volume6 += dot(mesh.vertices[face[0]],
                           cross(mesh.vertices[face[1]], mesh.vertices[face[2]]));
        }
        if (volume6 < 0.0) {
            for (std::size_t f = 0; f < orientation.flip.size(); ++f) {
                orientation.flip[f] = !orientation.flip[f];
            }
        }
    }
    return orientation;
}

Vec3 oriented_face_normal(const Mesh& mesh, const FaceOrientation& orientation, int face) {
    const Vec3 n = face_normal(mesh, face);
    return orientation.flip[face] ? -n : n;
}

}  // namespace pdmesh
