#include "pdmesh/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace pdmesh {

PoolAggregation pool_aggregation_from_string(const std::string& s) {
    if (s == "sum" || s == "add") return PoolAggregation::Sum;
    if (s == "mean") return PoolAggregation::Mean;
    throw std::invalid_argument("unknown pooling aggregation '" + s + "' (expected sum or mean)");
}

std::string to_string(PoolAggregation agg) {
    return agg == PoolAggregation::Sum ? "sum" : "mean";
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::vector<double> score_edges(const AttentionRecord& attention, const GraphPair& pair) {
    if (!attention.index) throw std::runtime_error("attention record has no index");
    const ConvIndex& idx = *attention.index;
    if (idx.n_primal != pair.primal.n_nodes) {
        throw std::runtime_error("attention record does not match the primal graph");
    }
    const std::size_t heads = attention.primal_alpha.size();
    if (heads == 0) throw std::runtime_error("attention record has no heads");

    const int n_edges = pair.primal.n_edges();
    std::vector<double> scores(n_edges, 0.0);
    std::vector<int> covered(n_edges, 0);
    for (std::size_t h = 0; h < heads; ++h) {
        const auto& alpha = attention.primal_alpha[h];
        if (alpha.size() != idx.primal_src.size()) {
            throw std::runtime_error("attention coefficients do not match arc count");
        }
        for (std::size_t arc = 0; arc < alpha.size(); ++arc) {
            const int e = pair.primal.edge_index(idx.primal_src[arc], idx.primal_dst[arc]);
            if (e < 0) throw std::runtime_error("attention arc missing from primal graph");
            scores[e] += alpha[arc];
            if (h == 0) ++covered[e];
        }
    }
    for (int e = 0; e < n_edges; ++e) {
        if (covered[e] != 2) {
            throw std::runtime_error("missing attention for primal edge " + std::to_string(e) +
                                     " (layer wiring bug)");
        }
    }
    for (double& s : scores) s /= static_cast<double>(heads);
    return scores;
}

std::vector<int> select_and_close_fans(const std::vector<double>& scores,
                                       const PoolingConfig& config, const GraphPair& pair) {
    const auto& primal = pair.primal;
    if (scores.size() != static_cast<std::size_t>(primal.n_edges())) {
        throw std::invalid_argument("score count does not match edge count");
    }
    // Budgets are resolved per batch graph so that batched pooling matches
    // the per-graph runs exactly.
    std::vector<std::vector<int>> graph_edges(pair.n_graphs);
    for (int e = 0; e < primal.n_edges(); ++e) {
        graph_edges[pair.primal_node_graph[primal.edges[e][0]]].push_back(e);
    }
    std::vector<int> graph_nodes(pair.n_graphs, 0);
    for (int gid : pair.primal_node_graph) ++graph_nodes[gid];

    std::vector<char> selected(primal.n_edges(), 0);
    for (int g = 0; g < pair.n_graphs; ++g) {
        auto& edges = graph_edges[g];
        long k;
        if (config.absolute_k >= 0) {
            k = config.absolute_k;
        } else {
            const double base = config.fraction_of_nodes
                                    ? static_cast<double>(graph_nodes[g])
                                    : static_cast<double>(edges.size());
            k = static_cast<long>(std::floor(config.fraction * base));
        }
        k = std::min<long>(k, static_cast<long>(edges.size()));
        if (k <= 0) continue;
        std::sort(edges.begin(), edges.end(), [&](int a, int b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return primal.edges[a] < primal.edges[b];  // lower canonical key wins
        });
        for (long i = 0; i < k; ++i) selected[edges[i]] = 1;
    }

    // Closure: contracting the selection must not leave an edge whose two
    // endpoints land in the same cluster (it would become a self-loop);
    // such edges are exactly the single missing edges of closed fans.
    UnionFind uf(primal.n_nodes);
    for (int e = 0; e < primal.n_edges(); ++e) {
        if (selected[e]) uf.unite(primal.edges[e][0], primal.edges[e][1]);
    }
    std::vector<int> result;
    for (int e = 0; e < primal.n_edges(); ++e) {
        if (!selected[e] && uf.find(primal.edges[e][0]) == uf.find(primal.edges[e][1])) {
            selected[e] = 1;  // within one component already, no re-union needed
        }
        if (selected[e]) result.push_back(e);
    }
    return result;
}

ContractionResult contract_primal(const GraphPair& pair, const std::vector<int>& edge_set) {
    const auto& primal = pair.primal;
    UnionFind uf(primal.n_nodes);
    for (int e : edge_set) {
        if (e < 0 || e >= primal.n_edges()) throw std::invalid_argument("edge index out of range");
        uf.unite(primal.edges[e][0], primal.edges[e][1]);
    }
    // Cluster ids ordered by smallest member node id.
    ContractionResult res;
    res.node_cluster.assign(primal.n_nodes, -1);
    int next = 0;
    for (int v = 0; v < primal.n_nodes; ++v) {
        const int root = uf.find(v);
        if (res.node_cluster[root] < 0) res.node_cluster[root] = next++;
        res.node_cluster[v] = res.node_cluster[root];
    }

    PrimalGraph& g = res.primal;
    g.n_nodes = next;
    g.clusters.resize(next);
    res.primal_graph_id.assign(next, 0);
    for (int v = 0; v < primal.n_nodes; ++v) {
        const int c = res.node_cluster[v];
        for (int face : primal.clusters[v]) g.clusters[c].push_back(face);
        res.primal_graph_id[c] = pair.primal_node_graph[v];
    }
    for (auto& members : g.clusters) std::sort(members.begin(), members.end());

    g.face_to_node.assign(primal.face_to_node.size(), -1);
    for (std::size_t f = 0; f < primal.face_to_node.size(); ++f) {
        g.face_to_node[f] = res.node_cluster[primal.face_to_node[f]];
    }
    res.assignment.face_cluster = g.face_to_node;
    res.assignment.members = g.clusters;

    std::vector<std::array<int, 2>> edges;
    for (int e = 0; e < primal.n_edges(); ++e) {
        const int cu = res.node_cluster[primal.edges[e][0]];
        const int cv = res.node_cluster[primal.edges[e][1]];
        if (cu == cv) continue;
        edges.push_back({std::min(cu, cv), std::max(cu, cv)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.edge_mesh_edge.assign(g.edges.size(), -1);
    g.rebuild_lookup();
    return res;
}

DualRebuild rebuild_dual(const GraphPair& old_pair, const PrimalGraph& new_primal,
                         const std::vector<int>& node_cluster) {
    const DualGraph& old_dual = old_pair.dual;
    DualRebuild res;
    res.dual.config = old_dual.config;

    // New dual nodes keyed from the new primal edges.
    for (int e = 0; e < new_primal.n_edges(); ++e) {
        const int u = new_primal.edges[e][0], v = new_primal.edges[e][1];
        if (old_dual.config == DualConfig::A) {
            res.dual.node_keys.push_back({u, v});
        } else {
            res.dual.node_keys.push_back({u, v});
            res.dual.node_keys.push_back({v, u});
        }
    }
    res.dual.node_mesh_edges.assign(res.dual.n_nodes(), {});

    auto new_node_of_ordered = [&](int from, int to) {
        const int e = new_primal.edge_index(from, to);
        if (e < 0) return -1;
        if (old_dual.config == DualConfig::A) return e;
        return from < to ? 2 * e : 2 * e + 1;
    };

    std::vector<int> group_size(res.dual.n_nodes(), 0);
    res.dual_node_map.assign(old_dual.n_nodes(), -1);
    for (int j = 0; j < old_dual.n_nodes(); ++j) {
        const int cu = node_cluster[old_dual.node_keys[j][0]];
        const int cv = node_cluster[old_dual.node_keys[j][1]];
        if (cu == cv) {
            ++res.removed;  // primal edge contracted away
            continue;
        }
        const int target = new_node_of_ordered(cu, cv);
        if (target < 0) {
            throw std::logic_error("dual rebuild: surviving edge missing from new primal");
        }
        res.dual_node_map[j] = target;
        ++group_size[target];
        for (int me : old_dual.node_mesh_edges[j]) {
            res.dual.node_mesh_edges[target].push_back(me);
        }
    }
    for (int t = 0; t < res.dual.n_nodes(); ++t) {
        if (group_size[t] == 0) {
            throw std::logic_error("dual rebuild: new dual node with no constituents");
        }
        if (group_size[t] > 1) ++res.merged_groups;
    }
    res.merged_groups /= old_dual.nodes_per_primal_edge();

    res.dual.arcs = dual_arcs_for_primal(new_primal, old_dual.config);
    return res;
}

PoolResult pool(const GraphPair& pair, const Tensor& primal_x, const Tensor& dual_x,
                const AttentionRecord& attention, const PoolingConfig& config) {
    const auto scores = score_edges(attention, pair);
    const auto edge_set = select_and_close_fans(scores, config, pair);
    auto contraction = contract_primal(pair, edge_set);
    auto rebuild = rebuild_dual(pair, contraction.primal, contraction.node_cluster);

    PoolResult res;
    res.trace.before = std::make_shared<GraphPair>(pair);
    res.trace.node_cluster = contraction.node_cluster;
    res.trace.dual_node_map = rebuild.dual_node_map;
    res.trace.removed_dual_nodes = rebuild.removed;
    res.trace.merged_dual_groups = rebuild.merged_groups;
    res.assignment = std::move(contraction.assignment);

    // Primal features: aggregate constituents per cluster.
    res.primal_x = segment_sum(primal_x, contraction.node_cluster, contraction.primal.n_nodes);
    if (config.aggregation == PoolAggregation::Mean) {
        Matrix inv(contraction.primal.n_nodes, 1);
        std::vector<int> sizes(contraction.primal.n_nodes, 0);
        for (int c : contraction.node_cluster) ++sizes[c];
        for (int i = 0; i < contraction.primal.n_nodes; ++i) {
            inv(i, 0) = 1.0 / static_cast<double>(sizes[i]);
        }
        res.primal_x = row_scale(res.primal_x, Tensor::constant(std::move(inv)));
    }

    // Dual features: merged groups always sum; removed nodes drop out.
    std::vector<int> survivors, survivor_targets;
    for (int j = 0; j < pair.dual.n_nodes(); ++j) {
        if (rebuild.dual_node_map[j] >= 0) {
            survivors.push_back(j);
            survivor_targets.push_back(rebuild.dual_node_map[j]);
        }
    }
    res.dual_x = segment_sum(gather_rows(dual_x, survivors), survivor_targets,
                             rebuild.dual.n_nodes());

    res.pair.primal = std::move(contraction.primal);
    res.pair.dual = std::move(rebuild.dual);
    res.pair.n_graphs = pair.n_graphs;
    res.pair.primal_node_graph = std::move(contraction.primal_graph_id);
    res.pair.dual_node_graph.assign(res.pair.dual.n_nodes(), 0);
    for (int e = 0; e < res.pair.primal.n_edges(); ++e) {
        const int gid = res.pair.primal_node_graph[res.pair.primal.edges[e][0]];
        for (int s = 0; s < res.pair.dual.nodes_per_primal_edge(); ++s) {
            res.pair.dual_node_graph[res.pair.dual.nodes_of_primal_edge(e)[s]] = gid;
        }
    }
    return res;
}

UnpoolResult unpool(const GraphPair& pooled, const Tensor& primal_x, const Tensor& dual_x,
                    const PoolingTrace& trace, const Tensor& filler) {
    if (!trace.before) throw std::invalid_argument("pooling trace has no stored connectivity");
    if (static_cast<int>(primal_x.rows()) != pooled.primal.n_nodes ||
        static_cast<int>(dual_x.rows()) != pooled.dual.n_nodes()) {
        throw std::invalid_argument("feature row counts do not match the pooled pair");
    }
    for (int c : trace.node_cluster) {
        if (c < 0 || c >= pooled.primal.n_nodes) {
            throw std::invalid_argument("pooling trace does not match the pooled pair");
        }
    }
    if (filler.rows() != 1 || filler.cols() != dual_x.cols()) {
        throw std::invalid_argument("filler must be 1 x " + std::to_string(dual_x.cols()) +
                                    ", got " + shape_str(filler.rows(), filler.cols()));
    }

    UnpoolResult res;
    res.pair = *trace.before;
    res.primal_x = gather_rows(primal_x, trace.node_cluster);
    // Removed dual nodes index the filler row appended past the current dual rows.
    Tensor extended = concat_rows(dual_x, filler);
    std::vector<int> dual_rows(trace.dual_node_map.size());
    for (std::size_t j = 0; j < trace.dual_node_map.size(); ++j) {
        dual_rows[j] = trace.dual_node_map[j] >= 0 ? trace.dual_node_map[j]
                                                   : static_cast<int>(dual_x.rows());
    }
    res.dual_x = gather_rows(extended, dual_rows);
    return res;
}

void write_cluster_table(const ClusterAssignment& assignment, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cluster table: " + path);
    for (int c : assignment.face_cluster) out << c << "\n";
}

}  // namespace pdmesh
