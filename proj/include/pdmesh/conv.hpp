#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmesh/graph.hpp"
#include "pdmesh/tensor.hpp"

namespace pdmesh {

constexpr double kAttentionLeakySlope = 0.2;

// Flattened aggregation indices for one connectivity snapshot. Arc order is
// deterministic: targets ascend, sources follow the sorted adjacency lists,
// self-loop arcs (dual only, optional) come last per target.
struct ConvIndex {
    int n_primal = 0;
    int n_dual = 0;
    bool self_loops = false;
    DualConfig config = DualConfig::A;
    std::vector<int> dual_src, dual_dst;
    std::vector<int> primal_src, primal_dst;  // arc M -> A per A, M in N_A
    std::vector<int> primal_arc_dual;         // dual node whose feature scores the arc

    static ConvIndex build(const GraphPair& pair, bool self_loops);
};

// Attention coefficients of one layer application, per head, parallel to the
// arc arrays of the index they were computed on.
struct AttentionRecord {
    std::shared_ptr<const ConvIndex> index;
    std::vector<std::vector<double>> dual_alpha;
    std::vector<std::vector<double>> primal_alpha;
};

enum class HeadCombine { Concat, Average };
enum class AttentionInit { Zeros, Uniform };

// Named non-parameter state (batch-norm running statistics). Shared
// ownership keeps checkpoint handles valid while layers move around.
class BufferStore {
public:
    std::shared_ptr<Matrix> add(const std::string& name, Matrix init);
    std::shared_ptr<Matrix> find(const std::string& name) const;
    const std::vector<std::pair<std::string, std::shared_ptr<Matrix>>>& items() const {
        return items_;
    }

private:
    std::vector<std::pair<std::string, std::shared_ptr<Matrix>>> items_;
};

// Construction context threaded through all layers of one model. Conv
// layers are numbered globally so their parameters serialize under the
// stable names layer{i}.{primal|dual}.{W|a}.head{h}.
struct LayerInit {
    Rng& rng;
    ParamStore& params;
    BufferStore& buffers;
    AttentionInit attn_init = AttentionInit::Zeros;
    int next_conv_layer = 0;
};

struct ConvLayerConfig {
    int in_primal = 0, in_dual = 0;
    int out_primal = 0, out_dual = 0;  // per head
    int heads = 1;
    HeadCombine combine = HeadCombine::Concat;
    DualConfig config = DualConfig::A;
};

// One primal-dual attention convolution: the dual pass aggregates dual
// features over the line-graph neighborhood, then the primal pass aggregates
// primal features with coefficients scored from the fresh dual features.
class ConvLayer {
public:
    ConvLayer() = default;
    ConvLayer(const ConvLayerConfig& cfg, LayerInit& init);

    struct Output {
        Tensor primal;                   // combined across heads
        Tensor dual;
        std::vector<Tensor> dual_heads;  // per-head dual outputs
        AttentionRecord attention;
    };

    Output forward(const std::shared_ptr<const ConvIndex>& index, const Tensor& primal_x,
                   const Tensor& dual_x) const;

    int out_width_primal() const;
    int out_width_dual() const;
    const ConvLayerConfig& config() const { return cfg_; }

private:
    ConvLayerConfig cfg_;
    std::vector<Tensor> dual_weight_, dual_attn_, primal_weight_, primal_attn_;
};

Tensor combine_heads(const std::vector<Tensor>& heads, HeadCombine mode);

// Mean over the H equal column blocks of a concatenated multi-head feature.
Tensor average_head_blocks(const Tensor& x, int heads);

// Glorot-uniform matrix in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

enum class NormKind { Group, Batch };

// Normalization layer with learned affine; the group variant is stateless,
// the batch variant keeps running statistics for inference.
class NormLayer {
public:
    NormLayer() = default;
    NormLayer(NormKind kind, int channels, LayerInit& init, const std::string& prefix);

    Tensor forward(const Tensor& x, bool training);

    NormKind kind() const { return kind_; }

    // Group count rule: min(4, C) when it divides C, otherwise 1.
    static int groups_for(int channels);

private:
    NormKind kind_ = NormKind::Group;
    int channels_ = 0;
    Tensor gain_, bias_;
    std::shared_ptr<Matrix> running_mean_, running_var_;
    double momentum_ = 0.5;
};

class LinearMap {
public:
    LinearMap() = default;
    LinearMap(int in, int out, bool with_bias, LayerInit& init, const std::string& prefix);

    Tensor forward(const Tensor& x) const;

private:
    Tensor weight_, bias_;
    bool with_bias_ = false;
};

// Residual block: conv -> norm -> ReLU -> conv -> norm, plus a skip from the
// block input (identity, or a learned projection when widths change),
// followed by a final ReLU. Applied to primal and dual features alike.
class ResidualConvBlock {
public:
    ResidualConvBlock() = default;
    ResidualConvBlock(const ConvLayerConfig& cfg, NormKind norm, LayerInit& init,
                      const std::string& prefix);

    struct Output {
        Tensor primal;
        Tensor dual;
        AttentionRecord attention;  // from the block's last convolution
    };

    Output forward(const std::shared_ptr<const ConvIndex>& index, const Tensor& primal_x,
                   const Tensor& dual_x, bool training);

    int out_width_primal() const { return conv2_.out_width_primal(); }
    int out_width_dual() const { return conv2_.out_width_dual(); }

private:
    ConvLayer conv1_, conv2_;
    NormLayer norm1p_, norm1d_, norm2p_, norm2d_;
    std::optional<LinearMap> skip_primal_, skip_dual_;
};

// Single conv followed by normalization and optional ReLU (decoder rows).
class ConvUnit {
public:
    ConvUnit() = default;
    ConvUnit(const ConvLayerConfig& cfg, NormKind norm, bool final_relu, LayerInit& init,
             const std::string& prefix);

    ConvLayer::Output forward(const std::shared_ptr<const ConvIndex>& index,
                              const Tensor& primal_x, const Tensor& dual_x, bool training);

    int out_width_primal() const { return conv_.out_width_primal(); }
    int out_width_dual() const { return conv_.out_width_dual(); }

private:
    ConvLayer conv_;
    NormLayer norm_p_, norm_d_;
    bool final_relu_ = true;
};

}  // namespace pdmesh
