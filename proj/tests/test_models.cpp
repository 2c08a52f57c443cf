#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "pdmesh/model.hpp"
#include "pdmesh/shapes.hpp"

using namespace pdmesh;

namespace {

GraphPair pair_for(const Mesh& mesh, DualConfig config = DualConfig::A) {
    return build_graph_pair(mesh, build_topology(mesh), config);
}

ArchitectureSpec make_spec(Task task, int classes, int heads, int base_width) {
    ArchitectureSpec spec;
    spec.task = task;
    spec.classes = classes;
    spec.heads = heads;
    spec.base_width = base_width;
    spec.attn_init = AttentionInit::Uniform;
    spec.apply_defaults();
    return spec;
}

// Closed-form audit of the classification parameter count.
std::size_t classification_param_count(int classes, int heads, int w, int dual_in) {
    auto conv = [&](int in_p, int in_d, int out) {
        return static_cast<std::size_t>(heads) *
               (in_d * out + 2 * out      // dual W and attention pair
                + in_p * out + out);      // primal W and attention
    };
    auto block = [&](int in_p, int in_d, int out) {
        std::size_t n = conv(in_p, in_d, out) + conv(heads * out, heads * out, out);
        n += 4ull * 2 * heads * out;  // four norm layers, gain+bias each
        if (in_p != heads * out) n += static_cast<std::size_t>(in_p) * heads * out;
        if (in_d != heads * out) n += static_cast<std::size_t>(in_d) * heads * out;
        return n;
    };
    const int hidden = std::max(1, 100 * w / 64);
    std::size_t n = block(1, dual_in, w) + block(heads * w, heads * w, 2 * w);
    n += static_cast<std::size_t>(heads) * 2 * w * hidden + hidden;  // fc0
    n += static_cast<std::size_t>(hidden) * classes + classes;       // fc1
    return n;
}

}  // namespace

TEST_CASE("classification net shape contract") {
    const auto spec = make_spec(Task::Classification, 30, 3, 64);
    auto net = build_classification_net(spec, 1);

    SUBCASE("final linear widths at the reference configuration: 384 -> 100 -> 30") {
        const Tensor* fc0 = net->params().find("fc0.W");
        const Tensor* fc1 = net->params().find("fc1.W");
        REQUIRE(fc0 != nullptr);
        REQUIRE(fc1 != nullptr);
        CHECK(fc0->rows() == 384);  // 128 * 3 heads
        CHECK(fc0->cols() == 100);
        CHECK(fc1->rows() == 100);
        CHECK(fc1->cols() == 30);
    }
    SUBCASE("parameter count matches the closed-form audit") {
        CHECK(net->params().total_size() == classification_param_count(30, 3, 64, 7));
    }
}

TEST_CASE("segmentation and superpixel parameter counts are frozen") {
    // Audited by hand from the width chain (C=4, He=3, w=32):
    //   encoder convs 576192 + encoder norms/skips 190464
    // + bridge 592128 + 3072
    // + decoder convs 173376 + decoder norms 1792
    // + final conv 268 + final norm 8 + unpool fillers 224  = 1537524
    {
        ArchitectureSpec spec = make_spec(Task::Segmentation, 4, 3, 32);
        auto net = build_segmentation_net(spec, 1);
        CHECK(net->params().total_size() == 1537524);
        CHECK(net->buffers().items().size() == 30);  // 15 batch norms x mean/var
    }
    {
        ArchitectureSpec spec = make_spec(Task::Superpixel, 4, 3, 32);
        auto net = build_superpixel_net(spec, 1);
        CHECK(net->params().total_size() == 1122628);
    }
}

TEST_CASE("classification forward returns one logit row per graph") {
    const auto spec = make_spec(Task::Classification, 5, 2, 8);
    auto net = build_classification_net(spec, 2);
    const GraphPair pair = pair_for(shapes::tetrahedron());
    const Tensor logits = net->logits(pair, false);
    CHECK(logits.rows() == 1);
    CHECK(logits.cols() == 5);
    for (double v : logits.value().data) CHECK(std::isfinite(v));
}

TEST_CASE("classification logits are invariant to face reordering") {
    Rng rng(3);
    const Mesh mesh = shapes::jitter_along_edges(shapes::icosphere(1), rng, 0.2);
    Mesh reordered = mesh;
    std::reverse(reordered.faces.begin(), reordered.faces.end());

    const auto spec = make_spec(Task::Classification, 4, 2, 8);
    auto net = build_classification_net(spec, 4);
    const Tensor a = net->logits(pair_for(mesh), false);
    const Tensor b = net->logits(pair_for(reordered), false);
    REQUIRE(a.cols() == b.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
        CHECK(a.value()(0, c) == doctest::Approx(b.value()(0, c)).epsilon(1e-8));
    }
}

TEST_CASE("segmentation net restores full resolution") {
    Rng rng(5);
    const Mesh mesh = shapes::jitter_along_edges(shapes::icosphere(1), rng, 0.1);
    const auto spec = make_spec(Task::Segmentation, 3, 2, 4);
    auto net = build_segmentation_net(spec, 6);
    ForwardArtifacts artifacts;
    const Tensor logits = net->logits(pair_for(mesh), true, &artifacts);
    CHECK(logits.rows() == static_cast<std::size_t>(mesh.n_faces()));
    CHECK(logits.cols() == 3);
    CHECK(artifacts.assignments.size() == 3);
    for (double v : logits.value().data) CHECK(std::isfinite(v));
}

TEST_CASE("segmentation output is equivariant to face reordering") {
    Rng rng(7);
    const Mesh mesh = shapes::jitter_along_edges(shapes::octahedron(), rng, 0.2);
    Mesh reordered = mesh;
    std::reverse(reordered.faces.begin(), reordered.faces.end());
    const int n = mesh.n_faces();

    // width >= 8 keeps group-norm groups above one element; size-1 groups
    // normalize to the bias and tie all pooling scores, and tie-breaking is
    // deliberately keyed on node ids
    const auto spec = make_spec(Task::Segmentation, 2, 1, 8);
    auto net = build_segmentation_net(spec, 8);
    const Tensor a = net->logits(pair_for(mesh), false);
    const Tensor b = net->logits(pair_for(reordered), false);
    for (int f = 0; f < n; ++f) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            CHECK(a.value()(f, c) == doctest::Approx(b.value()(n - 1 - f, c)).epsilon(1e-8));
        }
    }
}

TEST_CASE("segmentation gradcheck end to end on a small mesh") {
    Rng rng(9);
    const Mesh mesh = shapes::jitter_along_edges(shapes::icosahedron(), rng, 0.2);
    const auto spec = make_spec(Task::Segmentation, 2, 1, 2);
    auto net = build_segmentation_net(spec, 10);
    // evaluate at a generic point in parameter space
    for (const auto& [name, tensor] : net->params().items()) {
        Tensor t = tensor;
        for (double& v : t.raw_value().data) v += rng.uniform(-0.3, 0.3);
    }
    const GraphPair pair = pair_for(mesh);
    std::vector<int> labels(mesh.n_faces());
    for (int f = 0; f < mesh.n_faces(); ++f) labels[f] = f % 2;
    auto params = net->params().tensors();
    auto forward = [&] { return cross_entropy(net->logits(pair, true), labels); };
    const auto result = finite_diff_gradcheck(forward, params, 1e-5, 200, &rng);
    CHECK(result.max_rel_err < 1e-4);
}

TEST_CASE("superpixel net maps cluster logits back to faces") {
    Rng rng(11);
    const Mesh mesh = shapes::jitter_along_edges(shapes::icosphere(1), rng, 0.15);
    auto spec = make_spec(Task::Superpixel, 4, 2, 4);
    spec.pool_fractions = {0.3, 0.3, 0.3, 0.3, 0.3};
    auto net = build_superpixel_net(spec, 12);
    ForwardArtifacts artifacts;
    const Tensor logits = net->logits(pair_for(mesh), true, &artifacts);
    CHECK(logits.rows() == static_cast<std::size_t>(mesh.n_faces()));

    SUBCASE("faces of one cluster share one logit row") {
        const auto& face_cluster = artifacts.final_pair.primal.face_to_node;
        for (int f = 0; f < mesh.n_faces(); ++f) {
            const int c = face_cluster[f];
            const int rep = artifacts.final_pair.primal.clusters[c][0];
            for (std::size_t k = 0; k < logits.cols(); ++k) {
                CHECK(logits.value()(f, k) == logits.value()(rep, k));
            }
        }
    }
    SUBCASE("composed assignment after 5 pools is a partition") {
        const auto& primal = artifacts.final_pair.primal;
        std::vector<int> counted(mesh.n_faces(), 0);
        for (const auto& members : primal.clusters) {
            for (int f : members) ++counted[f];
        }
        for (int c : counted) CHECK(c == 1);
        CHECK(primal.n_nodes < mesh.n_faces());
    }
    SUBCASE("cluster count tracks the edge-survival estimate") {
        // each 0.3-pooling leaves >= ~40% of nodes; after 5 layers the count
        // must sit between the full-collapse and no-collapse extremes
        const int clusters = artifacts.final_pair.primal.n_nodes;
        CHECK(clusters >= 1);
        CHECK(clusters <= mesh.n_faces() / 2);
    }
}

TEST_CASE("global average pooling over dual features") {
    Matrix rows(2, 1);
    rows.data = {0.0, 2.0};
    CHECK(global_average_pool_dual(Tensor::constant(rows)).value().data[0] ==
          doctest::Approx(1.0));

    Matrix same(3, 2);
    for (std::size_t r = 0; r < 3; ++r) {
        same(r, 0) = 4.0;
        same(r, 1) = -1.0;
    }
    const Tensor avg = global_average_pool_dual(Tensor::constant(same));
    CHECK(avg.value()(0, 0) == doctest::Approx(4.0));
    CHECK(avg.value()(0, 1) == doctest::Approx(-1.0));

    CHECK_THROWS_WITH_AS(global_average_pool_dual(Tensor::zeros(0, 3)),
                         doctest::Contains("over-pooled"), std::runtime_error);
}

TEST_CASE("architecture spec serialization round-trips") {
    auto spec = make_spec(Task::Segmentation, 8, 3, 32);
    spec.pool_agg = PoolAggregation::Mean;
    spec.dual_config = DualConfig::B;
    spec.self_loops = true;
    const ArchitectureSpec back = ArchitectureSpec::deserialize(spec.serialize());
    CHECK(back.task == spec.task);
    CHECK(back.classes == spec.classes);
    CHECK(back.heads == spec.heads);
    CHECK(back.base_width == spec.base_width);
    CHECK(back.pool_fractions == spec.pool_fractions);
    CHECK(back.pool_agg == spec.pool_agg);
    CHECK(back.dual_config == spec.dual_config);
    CHECK(back.self_loops == spec.self_loops);
    CHECK(back.attn_init == spec.attn_init);
}

TEST_CASE("model rejects a pair built with a different dual configuration") {
    const auto spec = make_spec(Task::Classification, 2, 1, 4);
    auto net = build_classification_net(spec, 13);
    const GraphPair pair = pair_for(shapes::tetrahedron(), DualConfig::B);
    CHECK_THROWS(net->logits(pair, false));
}

TEST_CASE("double-node configurations run end to end") {
    for (DualConfig config : {DualConfig::B, DualConfig::C}) {
        auto spec = make_spec(Task::Classification, 3, 2, 4);
        spec.dual_config = config;
        auto net = build_classification_net(spec, 14);
        const Tensor logits = net->logits(pair_for(shapes::icosphere(1), config), false);
        CHECK(logits.rows() == 1);
        CHECK(logits.cols() == 3);
        for (double v : logits.value().data) CHECK(std::isfinite(v));
    }
}

TEST_CASE("deterministic construction: same seed, same parameters") {
    const auto spec = make_spec(Task::Classification, 4, 2, 8);
    auto a = build_classification_net(spec, 99);
    auto b = build_classification_net(spec, 99);
    const auto& ia = a->params().items();
    const auto& ib = b->params().items();
    REQUIRE(ia.size() == ib.size());
    for (std::size_t i = 0; i < ia.size(); ++i) {
        CHECK(ia[i].first == ib[i].first);
        CHECK(ia[i].second.value().data == ib[i].second.value().data);
    }
}
