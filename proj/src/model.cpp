#include "pdmesh/model.hpp"

#include <sstream>
#include <stdexcept>

namespace pdmesh {

Task task_from_string(const std::string& s) {
    if (s == "classification") return Task::Classification;
    if (s == "segmentation") return Task::Segmentation;
    if (s == "superpixel") return Task::Superpixel;
    throw std::invalid_argument("unknown task '" + s + "'");
}

std::string to_string(Task task) {
    switch (task) {
        case Task::Classification: return "classification";
        case Task::Segmentation: return "segmentation";
        case Task::Superpixel: return "superpixel";
    }
    return "?";
}

void ArchitectureSpec::apply_defaults() {
    if (!pool_fractions.empty()) return;
    switch (task) {
        case Task::Classification: pool_fractions = {0.2, 0.2}; break;
        case Task::Segmentation: pool_fractions = {0.3, 0.3, 0.3}; break;
        case Task::Superpixel: pool_fractions = {0.1, 0.1, 0.1, 0.1, 0.1}; break;
    }
}

std::string ArchitectureSpec::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "task = " << to_string(task) << "\n";
    os << "classes = " << classes << "\n";
    os << "heads = " << heads << "\n";
    os << "base_width = " << base_width << "\n";
    os << "pool_fractions =";
    for (double f : pool_fractions) os << " " << f;
    os << "\n";
    os << "pool_agg = " << to_string(pool_agg) << "\n";
    os << "dual_config = " << to_string(dual_config) << "\n";
    os << "self_loops = " << (self_loops ? 1 : 0) << "\n";
    os << "pool_fraction_of_nodes = " << (pool_fraction_of_nodes ? 1 : 0) << "\n";
    os << "attn_init = " << (attn_init == AttentionInit::Uniform ? "uniform" : "zeros") << "\n";
    return os.str();
}

ArchitectureSpec ArchitectureSpec::deserialize(const std::string& text) {
    ArchitectureSpec spec;
    spec.pool_fractions.clear();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        if (!(ls >> key)) continue;
        ls >> eq;
        if (key == "task") {
            std::string v;
            ls >> v;
            spec.task = task_from_string(v);
        } else if (key == "classes") {
            ls >> spec.classes;
        } else if (key == "heads") {
            ls >> spec.heads;
        } else if (key == "base_width") {
            ls >> spec.base_width;
        } else if (key == "pool_fractions") {
            double f;
            while (ls >> f) spec.pool_fractions.push_back(f);
        } else if (key == "pool_agg") {
            std::string v;
            ls >> v;
            spec.pool_agg = pool_aggregation_from_string(v);
        } else if (key == "dual_config") {
            std::string v;
            ls >> v;
            spec.dual_config = dual_config_from_string(v);
        } else if (key == "self_loops") {
            int v = 0;
            ls >> v;
            spec.self_loops = v != 0;
        } else if (key == "pool_fraction_of_nodes") {
            int v = 0;
            ls >> v;
            spec.pool_fraction_of_nodes = v != 0;
        } else if (key == "attn_init") {
            std::string v;
            ls >> v;
            spec.attn_init = v == "uniform" ? AttentionInit::Uniform : AttentionInit::Zeros;
        } else {
            throw std::runtime_error("unknown architecture key '" + key + "'");
        }
    }
    spec.apply_defaults();
    return spec;
}

Tensor global_average_pool_dual(const Tensor& dual_features) {
    if (dual_features.rows() == 0) {
        throw std::runtime_error("global average pooling over zero dual nodes (over-pooled)");
    }
    return mean_rows(dual_features);
}

Tensor per_graph_average_dual(const Tensor& dual_features, const std::vector<int>& graph_ids,
                              int n_graphs) {
    std::vector<int> counts(n_graphs, 0);
    for (int g : graph_ids) ++counts[g];
    for (int g = 0; g < n_graphs; ++g) {
        if (counts[g] == 0) {
            throw std::runtime_error("graph " + std::to_string(g) +
                                     " has zero dual nodes (over-pooled)");
        }
    }
    Tensor sums = segment_sum(dual_features, graph_ids, n_graphs);
    Matrix inv(n_graphs, 1);
    for (int g = 0; g < n_graphs; ++g) inv(g, 0) = 1.0 / static_cast<double>(counts[g]);
    return row_scale(sums, Tensor::constant(std::move(inv)));
}

void Net::check_input(const GraphPair& pair) const {
    if (pair.dual.config != spec_.dual_config) {
        throw std::runtime_error("graph pair was built with dual configuration " +
                                 to_string(pair.dual.config) + " but the model expects " +
                                 to_string(spec_.dual_config));
    }
    if (static_cast<int>(pair.dual.features.cols) != dual_channels(spec_.dual_config)) {
        throw std::runtime_error("dual feature width mismatch");
    }
}

PoolingConfig Net::pooling_config(int level) const {
    PoolingConfig pc;
    pc.fraction = spec_.pool_fractions.at(level);
    pc.aggregation = spec_.pool_agg;
    pc.fraction_of_nodes = spec_.pool_fraction_of_nodes;
    return pc;
}

namespace {

// Scaled copy of the classifier's 100-unit hidden layer.
int classifier_hidden_width(int base_width) {
    return std::max(1, 100 * base_width / 64);
}

class ClassificationNet final : public Net {
public:
    ClassificationNet(ArchitectureSpec spec, std::uint64_t seed) : Net(std::move(spec)) {
        Rng rng(seed);
        LayerInit init{rng, params_, buffers_, spec_.attn_init};
        const int w = spec_.base_width;
        ConvLayerConfig c1;
        c1.in_primal = 1;
        c1.in_dual = dual_channels(spec_.dual_config);
        c1.out_primal = c1.out_dual = w;
        c1.heads = spec_.heads;
        c1.combine = HeadCombine::Concat;
        c1.config = spec_.dual_config;
        block1_ = ResidualConvBlock(c1, NormKind::Group, init, "block0");

        ConvLayerConfig c2 = c1;
        c2.in_primal = block1_.out_width_primal();
        c2.in_dual = block1_.out_width_dual();
        c2.out_primal = c2.out_dual = 2 * w;
        block2_ = ResidualConvBlock(c2, NormKind::Group, init, "block1");

        const int hidden = classifier_hidden_width(w);
        fc1_ = LinearMap(block2_.out_width_dual(), hidden, true, init, "fc0");
        fc2_ = LinearMap(hidden, spec_.classes, true, init, "fc1");
    }

    Tensor logits(const GraphPair& pair, bool training, ForwardArtifacts* artifacts) override {
        check_input(pair);
        GraphPair cur = pair;
        Tensor px = Tensor::constant(pair.primal.features);
        Tensor dx = Tensor::constant(pair.dual.features);

        for (int level = 0; level < 2; ++level) {
            auto index = std::make_shared<const ConvIndex>(
                ConvIndex::build(cur, spec_.self_loops));
            auto& block = level == 0 ? block1_ : block2_;
            auto out = block.forward(index, px, dx, training);
            auto pooled = pool(cur, out.primal, out.dual, out.attention, pooling_config(level));
            cur = std::move(pooled.pair);
            px = pooled.primal_x;
            dx = pooled.dual_x;
            if (artifacts) artifacts->assignments.push_back(std::move(pooled.assignment));
        }
        if (artifacts) artifacts->final_pair = cur;

        Tensor gap = per_graph_average_dual(dx, cur.dual_node_graph, cur.n_graphs);
        Tensor hidden = relu(fc1_.forward(gap));
        return fc2_.forward(hidden);
    }

private:
    ResidualConvBlock block1_, block2_;
    LinearMap fc1_, fc2_;
};

class SegmentationNet final : public Net {
public:
    SegmentationNet(ArchitectureSpec spec, std::uint64_t seed) : Net(std::move(spec)) {
        if (spec_.pool_fractions.size() != 3) {
            throw std::invalid_argument("segmentation expects 3 pooling fractions");
        }
        Rng rng(seed);
        LayerInit init{rng, params_, buffers_, spec_.attn_init};
        const int w = spec_.base_width;
        const int widths[3] = {w, 2 * w, 4 * w};

        int in_p = 1, in_d = dual_channels(spec_.dual_config);
        for (int level = 0; level < 3; ++level) {
            ConvLayerConfig c;
            c.in_primal = in_p;
            c.in_dual = in_d;
            c.out_primal = c.out_dual = widths[level];
            c.heads = spec_.heads;
            c.combine = HeadCombine::Concat;
            c.config = spec_.dual_config;
            encoder_[level] = ResidualConvBlock(c, NormKind::Group, init,
                                                "enc" + std::to_string(level));
            in_p = encoder_[level].out_width_primal();
            in_d = encoder_[level].out_width_dual();
        }

        // Bridge: one conv with head averaging down to 8w channels.
        ConvLayerConfig cb;
        cb.in_primal = in_p;
        cb.in_dual = in_d;
        cb.out_primal = cb.out_dual = 8 * w;
        cb.heads = spec_.heads;
        cb.combine = HeadCombine::Concat;
        cb.config = spec_.dual_config;
        bridge_ = ConvUnit(cb, NormKind::Batch, true, init, "bridge");

        int dec_in = 8 * w;
        for (int level = 2; level >= 0; --level) {
            ConvLayerConfig cd;
            cd.in_primal = cd.in_dual = dec_in;
            cd.out_primal = cd.out_dual = widths[level];
            cd.heads = 1;
            cd.combine = HeadCombine::Concat;
            cd.config = spec_.dual_config;
            dec_pre_[level] = ConvUnit(cd, NormKind::Batch, true, init,
                                       "dec" + std::to_string(level) + ".pre");
            unpool_filler_[level] = params_.add("unpool" + std::to_string(level) + ".filler",
                                                Tensor::parameter(Matrix(1, widths[level])));
            ConvLayerConfig cp = cd;
            cp.in_primal = cp.in_dual = 2 * widths[level];  // after the encoder skip concat
            dec_post_[level] = ConvUnit(cp, NormKind::Batch, true, init,
                                        "dec" + std::to_string(level) + ".post");
            dec_in = widths[level];
        }

        ConvLayerConfig cf;
        cf.in_primal = cf.in_dual = w;
        cf.out_primal = cf.out_dual = spec_.classes;
        cf.heads = 1;
        cf.combine = HeadCombine::Concat;
        cf.config = spec_.dual_config;
        final_conv_ = ConvLayer(cf, init);
        final_norm_ = NormLayer(NormKind::Batch, spec_.classes, init, "final.norm.primal");
    }

    Tensor logits(const GraphPair& pair, bool training, ForwardArtifacts* artifacts) override {
        check_input(pair);
        GraphPair cur = pair;
        Tensor px = Tensor::constant(pair.primal.features);
        Tensor dx = Tensor::constant(pair.dual.features);

        std::vector<PoolingTrace> traces(3);
        std::vector<Tensor> skip_p(3), skip_d(3);
        for (int level = 0; level < 3; ++level) {
            auto index = std::make_shared<const ConvIndex>(
                ConvIndex::build(cur, spec_.self_loops));
            auto out = encoder_[level].forward(index, px, dx, training);
            skip_p[level] = average_head_blocks(out.primal, spec_.heads);
            skip_d[level] = average_head_blocks(out.dual, spec_.heads);
            auto pooled = pool(cur, out.primal, out.dual, out.attention, pooling_config(level));
            cur = std::move(pooled.pair);
            px = pooled.primal_x;
            dx = pooled.dual_x;
            traces[level] = std::move(pooled.trace);
            if (artifacts) artifacts->assignments.push_back(std::move(pooled.assignment));
        }
        if (artifacts) artifacts->final_pair = cur;

        auto index = std::make_shared<const ConvIndex>(ConvIndex::build(cur, spec_.self_loops));
        auto bridged = bridge_.forward(index, px, dx, training);
        px = average_head_blocks(bridged.primal, spec_.heads);
        dx = average_head_blocks(bridged.dual, spec_.heads);

        for (int level = 2; level >= 0; --level) {
            auto pre = dec_pre_[level].forward(index, px, dx, training);
            auto restored = unpool(cur, pre.primal, pre.dual, traces[level],
                                   unpool_filler_[level]);
            cur = std::move(restored.pair);
            index = std::make_shared<const ConvIndex>(ConvIndex::build(cur, spec_.self_loops));
            px = concat_cols(restored.primal_x, skip_p[level]);
            dx = concat_cols(restored.dual_x, skip_d[level]);
            auto post = dec_post_[level].forward(index, px, dx, training);
            px = post.primal;
            dx = post.dual;
        }

        auto final_out = final_conv_.forward(index, px, dx);
        return final_norm_.forward(final_out.primal, training);
    }

private:
    ResidualConvBlock encoder_[3];
    ConvUnit bridge_;
    ConvUnit dec_pre_[3], dec_post_[3];
    Tensor unpool_filler_[3];
    ConvLayer final_conv_;
    NormLayer final_norm_;
};

class SuperpixelNet final : public Net {
public:
    SuperpixelNet(ArchitectureSpec spec, std::uint64_t seed) : Net(std::move(spec)) {
        if (spec_.pool_fractions.size() != 5) {
            throw std::invalid_argument("superpixel expects 5 pooling fractions");
        }
        Rng rng(seed);
        LayerInit init{rng, params_, buffers_, spec_.attn_init};
        const int w = spec_.base_width;
        const int widths[5] = {w, w, 2 * w, 2 * w, 4 * w};

        int in_p = 1, in_d = dual_channels(spec_.dual_config);
        for (int level = 0; level < 5; ++level) {
            ConvLayerConfig c;
            c.in_primal = in_p;
            c.in_dual = in_d;
            c.out_primal = c.out_dual = widths[level];
            c.heads = spec_.heads;
            c.combine = HeadCombine::Concat;
            c.config = spec_.dual_config;
            encoder_[level] = ResidualConvBlock(c, NormKind::Group, init,
                                                "enc" + std::to_string(level));
            in_p = encoder_[level].out_width_primal();
            in_d = encoder_[level].out_width_dual();
        }
        ConvLayerConfig cf;
        cf.in_primal = in_p;
        cf.in_dual = in_d;
        cf.out_primal = cf.out_dual = w;
        cf.heads = spec_.heads;
        cf.combine = HeadCombine::Concat;
        cf.config = spec_.dual_config;
        final_block_ = ResidualConvBlock(cf, NormKind::Group, init, "head");
        classifier_ = LinearMap(final_block_.out_width_primal(), spec_.classes, true, init,
                                "classifier");
    }

    Tensor logits(const GraphPair& pair, bool training, ForwardArtifacts* artifacts) override {
        check_input(pair);
        GraphPair cur = pair;
        Tensor px = Tensor::constant(pair.primal.features);
        Tensor dx = Tensor::constant(pair.dual.features);

        for (int level = 0; level < 5; ++level) {
            auto index = std::make_shared<const ConvIndex>(
                ConvIndex::build(cur, spec_.self_loops));
            auto out = encoder_[level].forward(index, px, dx, training);
            auto pooled = pool(cur, out.primal, out.dual, out.attention, pooling_config(level));
            cur = std::move(pooled.pair);
            px = pooled.primal_x;
            dx = pooled.dual_x;
            if (artifacts) artifacts->assignments.push_back(std::move(pooled.assignment));
        }
        if (artifacts) artifacts->final_pair = cur;

        auto index = std::make_shared<const ConvIndex>(ConvIndex::build(cur, spec_.self_loops));
        auto out = final_block_.forward(index, px, dx, training);
        Tensor cluster_logits = classifier_.forward(out.primal);
        // Per-face logits through the composed assignment.
        return gather_rows(cluster_logits, cur.primal.face_to_node);
    }

private:
    ResidualConvBlock encoder_[5];
    ResidualConvBlock final_block_;
    LinearMap classifier_;
};

}  // namespace

std::unique_ptr<Net> build_classification_net(const ArchitectureSpec& spec, std::uint64_t seed) {
    return std::make_unique<ClassificationNet>(spec, seed);
}

std::unique_ptr<Net> build_segmentation_net(const ArchitectureSpec& spec, std::uint64_t seed) {
    return std::make_unique<SegmentationNet>(spec, seed);
}

std::unique_ptr<Net> build_superpixel_net(const ArchitectureSpec& spec, std::uint64_t seed) {
    return std::make_unique<SuperpixelNet>(spec, seed);
}

std::unique_ptr<Net> build_net(const ArchitectureSpec& spec, std::uint64_t seed) {
    switch (spec.task) {
        case Task::Classification: return build_classification_net(spec, seed);
        case Task::Segmentation: return build_segmentation_net(spec, seed);
        case Task::Superpixel: return build_superpixel_net(spec, seed);
    }
    throw std::logic_error("unreachable");
}

}  // namespace pdmesh
