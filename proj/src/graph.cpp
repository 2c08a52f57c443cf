#include "pdmesh/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pdmesh {

DualConfig dual_config_from_string(const std::string& s) {
    if (s == "A" || s == "a") return DualConfig::A;
    if (s == "B" || s == "b") return DualConfig::B;
    if (s == "C" || s == "c") return DualConfig::C;
    throw std::invalid_argument("unknown dual configuration '" + s + "' (expected A, B or C)");
}

std::string to_string(DualConfig config) {
    switch (config) {
        case DualConfig::A: return "A";
        case DualConfig::B: return "B";
        case DualConfig::C: return "C";
    }
    return "?";
}

int PrimalGraph::edge_index(int u, int v) const {
    auto it = edge_lookup.find(pack_pair(std::min(u, v), std::max(u, v)));
    return it == edge_lookup.end() ? -1 : it->second;
}

void PrimalGraph::rebuild_lookup() {
    edge_lookup.clear();
    edge_lookup.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edge_lookup.emplace(pack_pair(edges[i][0], edges[i][1]), static_cast<int>(i));
    }
    adj.assign(n_nodes, {});
    for (const auto& e : edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
}

PrimalGraph build_primal(const Mesh& mesh, const MeshTopology& topology) {
    PrimalGraph g;
    g.n_nodes = mesh.n_faces();
    g.clusters.resize(g.n_nodes);
    g.face_to_node.resize(g.n_nodes);
    for (int f = 0; f < g.n_nodes; ++f) {
        g.clusters[f] = {f};
        g.face_to_node[f] = f;
    }
    // One graph edge per interior mesh edge; two faces share at most one
    // mesh edge in a valid mesh, so no duplicates arise.
    std::vector<std::pair<std::array<int, 2>, int>> edges;
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        const int fa = topology.edge_faces[e][0], fb = topology.edge_faces[e][1];
        edges.push_back({{std::min(fa, fb), std::max(fa, fb)}, e});
    }
    std::sort(edges.begin(), edges.end());
    g.edges.reserve(edges.size());
    g.edge_mesh_edge.reserve(edges.size());
    for (const auto& [pair, mesh_edge] : edges) {
        g.edges.push_back(pair);
        g.edge_mesh_edge.push_back(mesh_edge);
    }
    g.rebuild_lookup();
    g.features = compute_primal_features(mesh);
    return g;
}

std::vector<std::array<int, 2>> dual_arcs_for_primal(const PrimalGraph& primal,
                                                     DualConfig config) {
    std::vector<std::array<int, 2>> arcs;
    const auto node_of_ordered = [&](int from, int to) {
        const int e = primal.edge_index(from, to);
        if (config == DualConfig::A) return e;
        return from < to ? 2 * e : 2 * e + 1;
    };
    if (config == DualConfig::A) {
        // Target {u, v} receives from {u, M}, M in N_u \ {v} and {v, N}.
        for (int e = 0; e < primal.n_edges(); ++e) {
            const int u = primal.edges[e][0], v = primal.edges[e][1];
            for (int m : primal.adj[u]) {
                if (m != v) arcs.push_back({primal.edge_index(u, m), e});
            }
            for (int n : primal.adj[v]) {
                if (n != u) arcs.push_back({primal.edge_index(v, n), e});
            }
        }
        return arcs;
    }
    // Configs B/C: targets are ordered nodes u->v. Incoming sources are
    // M->u for M in N_u \ {v}, plus (config B only) v->N for N in N_v \ {u}.
    for (int e = 0; e < primal.n_edges(); ++e) {
        const int u = primal.edges[e][0], v = primal.edges[e][1];
        const std::array<std::array<int, 2>, 2> directed = {{{u, v}, {v, u}}};
        for (const auto& [from, to] : directed) {
            const int target = node_of_ordered(from, to);
            for (int m : primal.adj[from]) {
                if (m != to) arcs.push_back({node_of_ordered(m, from), target});
            }
            if (config == DualConfig::B) {
                for (int n : primal.adj[to]) {
                    if (n != from) arcs.push_back({node_of_ordered(to, n), target});
                }
            }
        }
    }
    return arcs;
}

DualGraph build_dual(const Mesh& mesh, const MeshTopology& topology, DualConfig config) {
    const auto report = check_edge_manifold(topology);
    if (!report.edge_manifold) {
        throw std::runtime_error(
            "mesh has non-manifold edges; dual-graph variants for non-manifold edges are a "
            "documented extension point and are not implemented");
    }
    PrimalGraph primal = build_primal(mesh, topology);

    DualGraph d;
    d.config = config;
    for (int e = 0; e < primal.n_edges(); ++e) {
        const int u = primal.edges[e][0], v = primal.edges[e][1];
        if (config == DualConfig::A) {
            d.node_keys.push_back({u, v});
            d.node_mesh_edges.push_back({primal.edge_mesh_edge[e]});
        } else {
            d.node_keys.push_back({u, v});
            d.node_keys.push_back({v, u});
            d.node_mesh_edges.push_back({primal.edge_mesh_edge[e]});
            d.node_mesh_edges.push_back({primal.edge_mesh_edge[e]});
        }
    }
    d.arcs = dual_arcs_for_primal(primal, config);
    d.features = compute_dual_features(edge_geometry(mesh, topology), topology, config);
    return d;
}

Matrix compute_primal_features(const Mesh& mesh) {
    const auto areas = face_areas(mesh);
    double total = 0.0;
    for (double a : areas) total += a;
    if (total <= 0.0) throw std::runtime_error("mesh has zero total area");
    Matrix features(areas.size(), 1);
    for (std::size_t f = 0; f < areas.size(); ++f) {
        features(f, 0) = areas[f] / total;
    }
    return features;
}

Matrix compute_dual_features(const EdgeGeometry& geometry, const MeshTopology& topology,
                             DualConfig config) {
    // Interior edges in primal-edge order: sorted by canonical face pair.
    std::vector<std::pair<std::array<int, 2>, int>> interior;
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        const int fa = topology.edge_faces[e][0], fb = topology.edge_faces[e][1];
        interior.push_back({{fa, fb}, e});
    }
    std::sort(interior.begin(), interior.end());

    if (config == DualConfig::A) {
        Matrix f(interior.size(), 7);
        for (std::size_t i = 0; i < interior.size(); ++i) {
            const auto& g = geometry.edges[interior[i].second];
            std::array<double, 2> heights = g.edge_height_ratio;
            std::sort(heights.begin(), heights.end());
            std::array<double, 4> ratios = {g.edge_edge_ratio[0][0], g.edge_edge_ratio[0][1],
                                            g.edge_edge_ratio[1][0], g.edge_edge_ratio[1][1]};
            std::stable_sort(ratios.begin(), ratios.end());
            f(i, 0) = g.theta;
            f(i, 1) = heights[0];
            f(i, 2) = heights[1];
            for (int k = 0; k < 4; ++k) f(i, 3 + k) = ratios[k];
        }
        return f;
    }

    Matrix f(2 * interior.size(), 4);
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const auto& g = geometry.edges[interior[i].second];
        // Node 2i is u->v with u the smaller face id, i.e. geometry slot 0.
        for (int s = 0; s < 2; ++s) {
            const std::size_t row = 2 * i + s;
            f(row, 0) = g.theta;
            f(row, 1) = g.edge_height_ratio[s];
            f(row, 2) = g.edge_edge_ratio[s][0];
            f(row, 3) = g.edge_edge_ratio[s][1];
        }
    }
    return f;
}

GraphPair build_graph_pair(const Mesh& mesh, const MeshTopology& topology, DualConfig config) {
    GraphPair pair;
    pair.primal = build_primal(mesh, topology);
    pair.dual = build_dual(mesh, topology, config);
    pair.n_graphs = 1;
    pair.primal_node_graph.assign(pair.primal.n_nodes, 0);
    pair.dual_node_graph.assign(pair.dual.n_nodes(), 0);
    return pair;
}

namespace {

SimpleGraph finish_simple_graph(int n_nodes, std::set<std::array<int, 2>>& edge_set) {
    SimpleGraph g;
    g.n_nodes = n_nodes;
    g.edges.assign(edge_set.begin(), edge_set.end());
    return g;
}

}  // namespace

SimpleGraph medial_graph(const Mesh& mesh, const MeshTopology& topology) {
    std::set<std::array<int, 2>> edge_set;
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& es = topology.face_edges[f];
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                edge_set.insert({std::min(es[i], es[j]), std::max(es[i], es[j])});
            }
        }
    }
    return finish_simple_graph(topology.n_edges(), edge_set);
}

SimpleGraph line_graph_of_primal(const PrimalGraph& primal) {
    // Two primal edges are adjacent in the line graph iff they share a node;
    // enumerate per node over its incident edges.
    std::vector<std::vector<int>> incident(primal.n_nodes);
    for (int e = 0; e < primal.n_edges(); ++e) {
        incident[primal.edges[e][0]].push_back(e);
        incident[primal.edges[e][1]].push_back(e);
    }
    std::set<std::array<int, 2>> edge_set;
    for (const auto& inc : incident) {
        for (std::size_t i = 0; i < inc.size(); ++i) {
            for (std::size_t j = i + 1; j < inc.size(); ++j) {
                const int a = primal.edge_mesh_edge.empty() ? inc[i] : primal.edge_mesh_edge[inc[i]];
                const int b = primal.edge_mesh_edge.empty() ? inc[j] : primal.edge_mesh_edge[inc[j]];
                edge_set.insert({std::min(a, b), std::max(a, b)});
            }
        }
    }
    SimpleGraph g;
    g.n_nodes = primal.n_edges();
    g.edges.assign(edge_set.begin(), edge_set.end());
    return g;
}

EquivalenceReport verify_medial_line_equivalence(const Mesh& mesh,
                                                 const MeshTopology& topology) {
    EquivalenceReport report;
    const auto manifold = check_edge_manifold(topology);
    if (!manifold.edge_manifold || !manifold.watertight) {
        report.detail = "precondition violated: mesh is not closed edge-manifold";
        return report;
    }
    if (euler_characteristic(mesh, topology) != 2) {
        report.detail = "precondition violated: Euler characteristic V-E+F = " +
                        std::to_string(euler_characteristic(mesh, topology)) +
                        " (genus-0 requires 2)";
        return report;
    }
    report.precondition_ok = true;

    const SimpleGraph medial = medial_graph(mesh, topology);
    const SimpleGraph line = line_graph_of_primal(build_primal(mesh, topology));
    if (medial.n_nodes != line.n_nodes) {
        report.detail = "node counts differ";
        return report;
    }
    if (medial.edges == line.edges) {
        report.pass = true;
        report.detail = "medial and line graphs coincide on " +
                        std::to_string(medial.edges.size()) + " edges";
    } else {
        report.detail = "edge sets differ";
    }
    return report;
}

std::string graph_pair_to_json(const GraphPair& pair) {
    nlohmann::json j;
    j["primal"]["n_nodes"] = pair.primal.n_nodes;
    j["primal"]["edges"] = pair.primal.edges;
    j["primal"]["clusters"] = pair.primal.clusters;
    j["primal"]["features"] = nlohmann::json::array();
    for (std::size_t r = 0; r < pair.primal.features.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < pair.primal.features.cols; ++c) {
            row.push_back(pair.primal.features(r, c));
        }
        j["primal"]["features"].push_back(row);
    }
    j["dual"]["config"] = to_string(pair.dual.config);
    j["dual"]["n_nodes"] = pair.dual.n_nodes();
    j["dual"]["node_keys"] = pair.dual.node_keys;
    j["dual"]["arcs"] = pair.dual.arcs;
    j["dual"]["features"] = nlohmann::json::array();
    for (std::size_t r = 0; r < pair.dual.features.rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < pair.dual.features.cols; ++c) {
            row.push_back(pair.dual.features(r, c));
        }
        j["dual"]["features"].push_back(row);
    }
    return j.dump(2);
}

}  // namespace pdmesh
