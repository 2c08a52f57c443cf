#pragma once

#include <memory>
#include <vector>

#include "pdmesh/conv.hpp"
#include "pdmesh/graph.hpp"
#include "pdmesh/tensor.hpp"

namespace pdmesh {

enum class PoolAggregation { Sum, Mean };

PoolAggregation pool_aggregation_from_string(const std::string& s);
std::string to_string(PoolAggregation agg);

struct PoolingConfig {
    double fraction = 0.0;          // fraction of primal edges to contract
    int absolute_k = -1;            // used instead of fraction when >= 0
    bool fraction_of_nodes = false; // alternative semantics switch
    PoolAggregation aggregation = PoolAggregation::Sum;
};

// Partition of the original mesh faces into clusters.
struct ClusterAssignment {
    std::vector<int> face_cluster;          // original face id -> cluster id
    std::vector<std::vector<int>> members;  // cluster id -> original face ids
};

// Everything needed to restore the pre-pooling connectivity exactly.
struct PoolingTrace {
    std::shared_ptr<const GraphPair> before;
    std::vector<int> node_cluster;   // old primal node -> new primal node
    std::vector<int> dual_node_map;  // old dual node -> new dual node, -1 if removed
    int removed_dual_nodes = 0;
    int merged_dual_groups = 0;
};

// Edge score per primal edge (edge-list order): mean over heads of the two
// directed attention coefficients. Throws when the record does not cover
// every edge of the pair in both directions.
std::vector<double> score_edges(const AttentionRecord& attention, const GraphPair& pair);

// Top-K selection with deterministic tie-breaking on the canonical edge key,
// then closure: any unselected edge whose endpoints fall into one tentative
// cluster would become a self-loop (a closed fan missing one edge), so it is
// contracted as well, beyond the K budget. K is resolved per batch graph.
std::vector<int> select_and_close_fans(const std::vector<double>& scores,
                                       const PoolingConfig& config, const GraphPair& pair);

struct ContractionResult {
    PrimalGraph primal;                  // connectivity only; features left empty
    ClusterAssignment assignment;
    std::vector<int> node_cluster;       // old node -> new node
    std::vector<int> primal_graph_id;    // per new node
};

ContractionResult contract_primal(const GraphPair& pair, const std::vector<int>& edge_set);

struct DualRebuild {
    DualGraph dual;                 // connectivity only; features left empty
    std::vector<int> dual_node_map; // old dual node -> new dual node, -1 removed
    int removed = 0;
    int merged_groups = 0;
};

DualRebuild rebuild_dual(const GraphPair& old_pair, const PrimalGraph& new_primal,
                         const std::vector<int>& node_cluster);

struct PoolResult {
    GraphPair pair;
    Tensor primal_x;
    Tensor dual_x;
    PoolingTrace trace;
    ClusterAssignment assignment;
};

// Full pooling step: select, contract, rebuild, aggregate features. Primal
// cluster features follow the configured aggregation; merged dual nodes are
// always summed.
PoolResult pool(const GraphPair& pair, const Tensor& primal_x, const Tensor& dual_x,
                const AttentionRecord& attention, const PoolingConfig& config);

struct UnpoolResult {
    GraphPair pair;
    Tensor primal_x;
    Tensor dual_x;
};

// Restores the traced pre-pooling connectivity; every restored node takes its
// cluster's current feature, and dual nodes removed at pooling time take the
// learned filler row (1 x dual width).
UnpoolResult unpool(const GraphPair& pooled, const Tensor& primal_x, const Tensor& dual_x,
                    const PoolingTrace& trace, const Tensor& filler);

void write_cluster_table(const ClusterAssignment& assignment, const std::string& path);

}  // namespace pdmesh
