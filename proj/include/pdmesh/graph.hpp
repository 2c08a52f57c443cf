#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdmesh/edge_geometry.hpp"
#include "pdmesh/matrix.hpp"
#include "pdmesh/mesh.hpp"
#include "pdmesh/topology.hpp"

namespace pdmesh {

enum class DualConfig { A, B, C };

DualConfig dual_config_from_string(const std::string& s);
std::string to_string(DualConfig config);

// Number of input feature channels per dual node.
inline int dual_channels(DualConfig config) { return config == DualConfig::A ? 7 : 4; }

// Graph over mesh faces (or face clusters after pooling). Simple undirected
// graph: one canonical entry per node pair, never self-loops.
struct PrimalGraph {
    int n_nodes = 0;
    std::vector<std::array<int, 2>> edges;     // canonical u < v, sorted lexicographically
    std::vector<std::vector<int>> adj;         // sorted neighbor lists
    std::vector<std::vector<int>> clusters;    // node -> original face ids
    std::vector<int> face_to_node;             // original face id -> node
    std::vector<int> edge_mesh_edge;           // mesh edge id per graph edge (-1 post-pooling)
    Matrix features;                           // n_nodes x channels

    int n_edges() const { return static_cast<int>(edges.size()); }
    int edge_index(int u, int v) const;

    std::unordered_map<std::uint64_t, int> edge_lookup;  // packed canonical pair -> edge index
    void rebuild_lookup();
};

// Graph over mesh edges. Config A keys one node per primal edge by the
// unordered face pair; configs B and C key two nodes per primal edge by the
// ordered pair. `arcs` lists directed aggregation edges (src feeds dst);
// config A and B arcs come in both directions, config C arcs are one-way.
struct DualGraph {
    DualConfig config = DualConfig::A;
    std::vector<std::array<int, 2>> node_keys;       // face/cluster pair per node
    std::vector<std::array<int, 2>> arcs;            // (src, dst)
    std::vector<std::vector<int>> node_mesh_edges;   // constituent mesh edges (may be empty post-pooling)
    Matrix features;

    int n_nodes() const { return static_cast<int>(node_keys.size()); }
    int nodes_per_primal_edge() const { return config == DualConfig::A ? 1 : 2; }

    // Dual node ids for primal edge index e: config A has {e}, configs B/C
    // have {2e (u->v), 2e+1 (v->u)} where (u, v) is the canonical edge pair.
    std::array<int, 2> nodes_of_primal_edge(int e) const {
        if (config == DualConfig::A) return {e, -1};
        return {2 * e, 2 * e + 1};
    }
};

struct GraphPair {
    PrimalGraph primal;
    DualGraph dual;
    // Disjoint-union bookkeeping; single graphs use one zero-filled block.
    int n_graphs = 1;
    std::vector<int> primal_node_graph;
    std::vector<int> dual_node_graph;
};

PrimalGraph build_primal(const Mesh& mesh, const MeshTopology& topology);

// Throws on non-manifold edges; single-node dual variants over non-manifold
// edges are a documented extension point, not implemented.
DualGraph build_dual(const Mesh& mesh, const MeshTopology& topology, DualConfig config);

// f_A = area(A) / sum of areas. Throws when the total area is zero.
Matrix compute_primal_features(const Mesh& mesh);

// Config A rows: [theta, sorted edge-to-height pair, sorted edge-to-edge
// quadruple]; configs B/C rows per node u->v: [theta, ||ab||/h_u, u's two
// edge-to-edge ratios]. Row order matches dual node order.
Matrix compute_dual_features(const EdgeGeometry& geometry, const MeshTopology& topology,
                             DualConfig config);

GraphPair build_graph_pair(const Mesh& mesh, const MeshTopology& topology, DualConfig config);

// Recomputes directed dual arcs for the given primal connectivity; used both
// at construction and after pooling.
std::vector<std::array<int, 2>> dual_arcs_for_primal(const PrimalGraph& primal,
                                                     DualConfig config);

// Plain undirected graph keyed by mesh edge ids, for the structural checks.
struct SimpleGraph {
    int n_nodes = 0;
    std::vector<std::array<int, 2>> edges;  // canonical, sorted, deduplicated
};

// Medial graph of the mesh vertex graph: one node per mesh edge, an edge
// between two mesh edges exactly when they are consecutive on a face.
SimpleGraph medial_graph(const Mesh& mesh, const MeshTopology& topology);

// Line graph of the primal graph, with nodes keyed back to mesh edge ids.
SimpleGraph line_graph_of_primal(const PrimalGraph& primal);

struct EquivalenceReport {
    bool precondition_ok = false;  // connected, edge-manifold, watertight, V-E+F == 2
    bool pass = false;
    std::string detail;
};

EquivalenceReport verify_medial_line_equivalence(const Mesh& mesh, const MeshTopology& topology);

// JSON dump of a graph pair (node lists, edge lists, features) for the CLI
// and golden files.
std::string graph_pair_to_json(const GraphPair& pair);

}  // namespace pdmesh
