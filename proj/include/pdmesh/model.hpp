#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdmesh/conv.hpp"
#include "pdmesh/pooling.hpp"

namespace pdmesh {

enum class Task { Classification, Segmentation, Superpixel };

Task task_from_string(const std::string& s);
std::string to_string(Task task);

// Everything needed to rebuild a model skeleton: widths chain, heads,
// pooling fractions and task wiring.
struct ArchitectureSpec {
    Task task = Task::Classification;
    int classes = 2;
    int heads = 3;
    int base_width = 64;                 // per-head width of the first block
    std::vector<double> pool_fractions;  // one entry per pooling layer
    PoolAggregation pool_agg = PoolAggregation::Sum;
    DualConfig dual_config = DualConfig::A;
    bool self_loops = false;
    bool pool_fraction_of_nodes = false;
    AttentionInit attn_init = AttentionInit::Zeros;

    // Fills pool_fractions with the task default when empty:
    // classification 2 x 0.2, segmentation 3 x 0.3, superpixel 5 x 0.1.
    void apply_defaults();

    std::string serialize() const;
    static ArchitectureSpec deserialize(const std::string& text);
};

// Channel-wise mean over all dual nodes of one graph. Throws on zero rows
// (the graph was pooled away entirely).
Tensor global_average_pool_dual(const Tensor& dual_features);

// Per-graph variant for batched pairs; every graph must keep at least one
// dual node.
Tensor per_graph_average_dual(const Tensor& dual_features, const std::vector<int>& graph_ids,
                              int n_graphs);

struct ForwardArtifacts {
    std::vector<ClusterAssignment> assignments;  // per pooling layer, composed to faces
    GraphPair final_pair;                        // connectivity after the last pooling
};

class Net {
public:
    virtual ~Net() = default;

    // Classification: one logit row per batch graph. Segmentation and
    // superpixel: one logit row per original mesh face.
    virtual Tensor logits(const GraphPair& pair, bool training,
                          ForwardArtifacts* artifacts = nullptr) = 0;

    const ArchitectureSpec& spec() const { return spec_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    BufferStore& buffers() { return buffers_; }
    const BufferStore& buffers() const { return buffers_; }

protected:
    explicit Net(ArchitectureSpec spec) : spec_(std::move(spec)) { spec_.apply_defaults(); }

    void check_input(const GraphPair& pair) const;
    PoolingConfig pooling_config(int level) const;

    ArchitectureSpec spec_;
    ParamStore params_;
    BufferStore buffers_;
};

// Two residual blocks with pooling, dual global average pooling, then a
// two-layer perceptron head. Hidden width scales with base_width
// (100 at the reference width 64).
std::unique_ptr<Net> build_classification_net(const ArchitectureSpec& spec, std::uint64_t seed);

// U-Net: three residual encoder blocks (group norm) with pooling, a bridge
// conv with head averaging, and a mirrored decoder (batch norm, single head)
// with unpooling and encoder skip concatenation; final conv to C per-face
// logits.
std::unique_ptr<Net> build_segmentation_net(const ArchitectureSpec& spec, std::uint64_t seed);

// Encoder-only: five residual blocks each followed by pooling, one final
// residual block, and a linear classifier per cluster; per-face logits are
// looked up through the composed cluster assignment.
std::unique_ptr<Net> build_superpixel_net(const ArchitectureSpec& spec, std::uint64_t seed);

std::unique_ptr<Net> build_net(const ArchitectureSpec& spec, std::uint64_t seed);

}  // namespace pdmesh
