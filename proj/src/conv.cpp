#include "pdmesh/conv.hpp"

#include <cmath>
#include <stdexcept>

namespace pdmesh {

ConvIndex ConvIndex::build(const GraphPair& pair, bool self_loops) {
    ConvIndex idx;
    idx.n_primal = pair.primal.n_nodes;
    idx.n_dual = pair.dual.n_nodes();
    idx.self_loops = self_loops;
    idx.config = pair.dual.config;

    std::vector<std::array<int, 2>> arcs = pair.dual.arcs;
    if (self_loops) {
        for (int i = 0; i < idx.n_dual; ++i) arcs.push_back({i, i});
    }
    // Group by target; self-loop arcs land last within their target group.
    std::vector<std::vector<int>> incoming(idx.n_dual);
    for (const auto& [src, dst] : arcs) incoming[dst].push_back(src);
    for (int t = 0; t < idx.n_dual; ++t) {
        for (int src : incoming[t]) {
            idx.dual_src.push_back(src);
            idx.dual_dst.push_back(t);
        }
    }

    for (int a = 0; a < pair.primal.n_nodes; ++a) {
        for (int m : pair.primal.adj[a]) {
            const int e = pair.primal.edge_index(m, a);
            int dual_node;
            if (pair.dual.config == DualConfig::A) {
                dual_node = e;
            } else {
                dual_node = m < a ? 2 * e : 2 * e + 1;  // ordered node m -> a
            }
            idx.primal_src.push_back(m);
            idx.primal_dst.push_back(a);
            idx.primal_arc_dual.push_back(dual_node);
        }
    }
    return idx;
}

std::shared_ptr<Matrix> BufferStore::add(const std::string& name, Matrix init) {
    for (const auto& [existing, _] : items_) {
        if (existing == name) throw std::logic_error("duplicate buffer name: " + name);
    }
    auto ptr = std::make_shared<Matrix>(std::move(init));
    items_.emplace_back(name, ptr);
    return ptr;
}

std::shared_ptr<Matrix> BufferStore::find(const std::string& name) const {
    for (const auto& [n, ptr] : items_) {
        if (n == name) return ptr;
    }
    return nullptr;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : m.data) v = rng.uniform(-bound, bound);
    return m;
}

ConvLayer::ConvLayer(const ConvLayerConfig& cfg, LayerInit& init) : cfg_(cfg) {
    const std::string prefix = "layer" + std::to_string(init.next_conv_layer++);
    for (int h = 0; h < cfg.heads; ++h) {
        const std::string hs = ".head" + std::to_string(h);
        Matrix wd = glorot_uniform(cfg.in_dual, cfg.out_dual, init.rng);
        Matrix wp = glorot_uniform(cfg.in_primal, cfg.out_primal, init.rng);
        Matrix ad = init.attn_init == AttentionInit::Uniform
                        ? glorot_uniform(2 * cfg.out_dual, 1, init.rng)
                        : Matrix(2 * cfg.out_dual, 1);
        Matrix ap = init.attn_init == AttentionInit::Uniform
                        ? glorot_uniform(cfg.out_dual, 1, init.rng)
                        : Matrix(cfg.out_dual, 1);
        dual_weight_.push_back(init.params.add(prefix + ".dual.W" + hs, Tensor::parameter(wd)));
        dual_attn_.push_back(init.params.add(prefix + ".dual.a" + hs, Tensor::parameter(ad)));
        primal_weight_.push_back(
            init.params.add(prefix + ".primal.W" + hs, Tensor::parameter(wp)));
        primal_attn_.push_back(
            init.params.add(prefix + ".primal.a" + hs, Tensor::parameter(ap)));
    }
}

int ConvLayer::out_width_primal() const {
    return cfg_.combine == HeadCombine::Concat ? cfg_.out_primal * cfg_.heads : cfg_.out_primal;
}

int ConvLayer::out_width_dual() const {
    return cfg_.combine == HeadCombine::Concat ? cfg_.out_dual * cfg_.heads : cfg_.out_dual;
}

ConvLayer::Output ConvLayer::forward(const std::shared_ptr<const ConvIndex>& index,
                                     const Tensor& primal_x, const Tensor& dual_x) const {
    if (static_cast<int>(dual_x.cols()) != cfg_.in_dual) {
        throw std::runtime_error("dual feature width " + std::to_string(dual_x.cols()) +
                                 " does not match layer input width " +
                                 std::to_string(cfg_.in_dual));
    }
    if (static_cast<int>(primal_x.cols()) != cfg_.in_primal) {
        throw std::runtime_error("primal feature width " + std::to_string(primal_x.cols()) +
                                 " does not match layer input width " +
                                 std::to_string(cfg_.in_primal));
    }

    Output out;
    out.attention.index = index;
    std::vector<Tensor> primal_heads;
    for (int h = 0; h < cfg_.heads; ++h) {
        // Dual pass: softmax-scored aggregation over incoming dual arcs.
        Tensor fw = matmul(dual_x, dual_weight_[h]);
        Tensor dual_out;
        if (index->dual_src.empty()) {
            dual_out = relu(matmul(Tensor::zeros(index->n_dual, cfg_.in_dual),
                                   dual_weight_[h]));
            out.attention.dual_alpha.emplace_back();
        } else {
            Tensor src_f = gather_rows(fw, index->dual_src);
            Tensor dst_f = gather_rows(fw, index->dual_dst);
            Tensor scores = leaky_relu(matmul(concat_cols(src_f, dst_f), dual_attn_[h]),
                                       kAttentionLeakySlope);
            Tensor alpha = segment_softmax(scores, index->dual_dst, index->n_dual);
            out.attention.dual_alpha.push_back(alpha.value().data);
            dual_out =
                relu(segment_sum(row_scale(src_f, alpha), index->dual_dst, index->n_dual));
        }
        out.dual_heads.push_back(dual_out);

        // Primal pass: coefficients scored from this head's new dual features.
        Tensor pw = matmul(primal_x, primal_weight_[h]);
        if (index->primal_src.empty()) {
            primal_heads.push_back(relu(
                matmul(Tensor::zeros(index->n_primal, cfg_.in_primal), primal_weight_[h])));
            out.attention.primal_alpha.emplace_back();
        } else {
            Tensor arc_scores = leaky_relu(
                matmul(gather_rows(dual_out, index->primal_arc_dual), primal_attn_[h]),
                kAttentionLeakySlope);
            Tensor alpha = segment_softmax(arc_scores, index->primal_dst, index->n_primal);
            out.attention.primal_alpha.push_back(alpha.value().data);
            Tensor msg = row_scale(gather_rows(pw, index->primal_src), alpha);
            primal_heads.push_back(relu(segment_sum(msg, index->primal_dst, index->n_primal)));
        }
    }
    out.primal = combine_heads(primal_heads, cfg_.combine);
    out.dual = combine_heads(out.dual_heads, cfg_.combine);
    return out;
}

Tensor combine_heads(const std::vector<Tensor>& heads, HeadCombine mode) {
    if (heads.empty()) throw std::invalid_argument("combine_heads needs at least one head");
    Tensor out = heads[0];
    if (mode == HeadCombine::Concat) {
        for (std::size_t h = 1; h < heads.size(); ++h) out = concat_cols(out, heads[h]);
        return out;
    }
    for (std::size_t h = 1; h < heads.size(); ++h) out = add(out, heads[h]);
    return heads.size() > 1 ? scale(out, 1.0 / static_cast<double>(heads.size())) : out;
}

Tensor average_head_blocks(const Tensor& x, int heads) {
    if (heads <= 1) return x;
    if (x.cols() % static_cast<std::size_t>(heads) != 0) {
        throw std::invalid_argument("feature width " + std::to_string(x.cols()) +
                                    " is not a multiple of " + std::to_string(heads) + " heads");
    }
    const std::size_t w = x.cols() / static_cast<std::size_t>(heads);
    Tensor out = slice_cols(x, 0, w);
    for (int h = 1; h < heads; ++h) {
        out = add(out, slice_cols(x, h * w, (h + 1) * w));
    }
    return scale(out, 1.0 / static_cast<double>(heads));
}

int NormLayer::groups_for(int channels) {
    const int g = std::min(4, channels);
    return (g >= 1 && channels % g == 0) ? g : 1;
}

NormLayer::NormLayer(NormKind kind, int channels, LayerInit& init, const std::string& prefix)
    : kind_(kind), channels_(channels) {
    gain_ = init.params.add(prefix + ".gain", Tensor::parameter(Matrix(1, channels, 1.0)));
    bias_ = init.params.add(prefix + ".bias", Tensor::parameter(Matrix(1, channels)));
    if (kind_ == NormKind::Batch) {
        running_mean_ = init.buffers.add(prefix + ".running_mean", Matrix(1, channels, 0.0));
        running_var_ = init.buffers.add(prefix + ".running_var", Matrix(1, channels, 1.0));
    }
}

Tensor NormLayer::forward(const Tensor& x, bool training) {
    if (kind_ == NormKind::Group) {
        return group_normalize(x, groups_for(channels_), gain_, bias_);
    }
    return batch_norm(x, gain_, bias_, *running_mean_, *running_var_, momentum_, training);
}

LinearMap::LinearMap(int in, int out, bool with_bias, LayerInit& init,
                     const std::string& prefix)
    : with_bias_(with_bias) {
    weight_ = init.params.add(prefix + ".W", Tensor::parameter(glorot_uniform(in, out, init.rng)));
    if (with_bias_) {
        bias_ = init.params.add(prefix + ".b", Tensor::parameter(Matrix(1, out)));
    }
}

Tensor LinearMap::forward(const Tensor& x) const {
    Tensor out = matmul(x, weight_);
    return with_bias_ ? add_row_broadcast(out, bias_) : out;
}

ResidualConvBlock::ResidualConvBlock(const ConvLayerConfig& cfg, NormKind norm, LayerInit& init,
                                     const std::string& prefix) {
    conv1_ = ConvLayer(cfg, init);
    ConvLayerConfig cfg2 = cfg;
    cfg2.in_primal = conv1_.out_width_primal();
    cfg2.in_dual = conv1_.out_width_dual();
    conv2_ = ConvLayer(cfg2, init);

    const int wp = conv1_.out_width_primal();
    const int wd = conv1_.out_width_dual();
    norm1p_ = NormLayer(norm, wp, init, prefix + ".norm1.primal");
    norm1d_ = NormLayer(norm, wd, init, prefix + ".norm1.dual");
    norm2p_ = NormLayer(norm, wp, init, prefix + ".norm2.primal");
    norm2d_ = NormLayer(norm, wd, init, prefix + ".norm2.dual");
    if (cfg.in_primal != wp) {
        skip_primal_ = LinearMap(cfg.in_primal, wp, false, init, prefix + ".skip.primal");
    }
    if (cfg.in_dual != wd) {
        skip_dual_ = LinearMap(cfg.in_dual, wd, false, init, prefix + ".skip.dual");
    }
}

ResidualConvBlock::Output ResidualConvBlock::forward(
    const std::shared_ptr<const ConvIndex>& index, const Tensor& primal_x, const Tensor& dual_x,
    bool training) {
    auto mid = conv1_.forward(index, primal_x, dual_x);
    Tensor p = relu(norm1p_.forward(mid.primal, training));
    Tensor d = relu(norm1d_.forward(mid.dual, training));
    auto last = conv2_.forward(index, p, d);
    Tensor p2 = norm2p_.forward(last.primal, training);
    Tensor d2 = norm2d_.forward(last.dual, training);
    Tensor sp = skip_primal_ ? skip_primal_->forward(primal_x) : primal_x;
    Tensor sd = skip_dual_ ? skip_dual_->forward(dual_x) : dual_x;

    Output out;
    out.primal = relu(add(p2, sp));
    out.dual = relu(add(d2, sd));
    out.attention = std::move(last.attention);
    return out;
}

ConvUnit::ConvUnit(const ConvLayerConfig& cfg, NormKind norm, bool final_relu, LayerInit& init,
                   const std::string& prefix)
    : final_relu_(final_relu) {
    conv_ = ConvLayer(cfg, init);
    norm_p_ = NormLayer(norm, conv_.out_width_primal(), init, prefix + ".norm.primal");
    norm_d_ = NormLayer(norm, conv_.out_width_dual(), init, prefix + ".norm.dual");
}

ConvLayer::Output ConvUnit::forward(const std::shared_ptr<const ConvIndex>& index,
                                    const Tensor& primal_x, const Tensor& dual_x,
                                    bool training) {
    auto out = conv_.forward(index, primal_x, dual_x);
    out.primal = norm_p_.forward(out.primal, training);
    out.dual = norm_d_.forward(out.dual, training);
    if (final_relu_) {
        out.primal = relu(out.primal);
        out.dual = relu(out.dual);
    }
    return out;
}

}  // namespace pdmesh
