#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdmesh/checkpoint.hpp"
#include "pdmesh/cli.hpp"
#include "pdmesh/export.hpp"
#include "pdmesh/shapes.hpp"
#include "pdmesh/synth.hpp"

using namespace pdmesh;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ArchitectureSpec small_spec() {
    ArchitectureSpec spec;
    spec.task = Task::Classification;
    spec.classes = 2;
    spec.heads = 1;
    spec.base_width = 8;
    spec.attn_init = AttentionInit::Uniform;
    spec.apply_defaults();
    return spec;
}

PreparedDataset tiny_dataset(std::uint64_t seed) {
    return prepare_classification(synth::two_class_classification(2, seed), DualConfig::A);
}

}  // namespace

TEST_CASE("checkpoint round trip is byte identical") {
    auto net = build_net(small_spec(), 3);
    Adam opt(AdamParams{1e-3, 0.9, 0.999, 1e-8});
    Rng rng(5);
    PreparedDataset dataset = tiny_dataset(7);
    train_epoch(*net, dataset, opt, rng, 2);

    const std::string p1 = "/tmp/pdmesh_test_ck1.bin", p2 = "/tmp/pdmesh_test_ck2.bin";
    Checkpoint::capture(*net, &opt, &rng, "epochs = 1\n", 1).save(p1);
    Checkpoint loaded = Checkpoint::load(p1);
    loaded.save(p2);
    CHECK(read_file(p1) == read_file(p2));
}

TEST_CASE("loading a checkpoint reproduces identical metrics") {
    PreparedDataset dataset = tiny_dataset(11);
    auto net = build_net(small_spec(), 13);
    Adam opt(AdamParams{1e-3, 0.9, 0.999, 1e-8});
    Rng rng(17);
    for (int e = 0; e < 3; ++e) train_epoch(*net, dataset, opt, rng, 2);
    const auto before = evaluate(*net, dataset);

    const std::string path = "/tmp/pdmesh_test_ck3.bin";
    Checkpoint::capture(*net, &opt, &rng, "", 3).save(path);

    auto restored = build_net(small_spec(), 999);  // different seed, then overwritten
    Checkpoint::load(path).restore(*restored, nullptr, nullptr);
    const auto after = evaluate(*restored, dataset);
    CHECK(*before.classification_accuracy == *after.classification_accuracy);
}

TEST_CASE("resume continues the exact trajectory") {
    PreparedDataset dataset = tiny_dataset(19);

    // uninterrupted: 6 epochs
    auto full = build_net(small_spec(), 23);
    Adam full_opt(AdamParams{1e-3, 0.9, 0.999, 1e-8});
    Rng full_rng(29);
    for (int e = 0; e < 6; ++e) train_epoch(*full, dataset, full_opt, full_rng, 2);

    // interrupted: 3 epochs, checkpoint, restore, 3 more
    auto half = build_net(small_spec(), 23);
    Adam half_opt(AdamParams{1e-3, 0.9, 0.999, 1e-8});
    Rng half_rng(29);
    for (int e = 0; e < 3; ++e) train_epoch(*half, dataset, half_opt, half_rng, 2);
    const std::string path = "/tmp/pdmesh_test_ck4.bin";
    Checkpoint::capture(*half, &half_opt, &half_rng, "", 3).save(path);

    auto resumed = build_net(small_spec(), 23);
    Adam resumed_opt(AdamParams{1e-3, 0.9, 0.999, 1e-8});
    Rng resumed_rng(0);
    Checkpoint::load(path).restore(*resumed, &resumed_opt, &resumed_rng);
    for (int e = 0; e < 3; ++e) train_epoch(*resumed, dataset, resumed_opt, resumed_rng, 2);

    const auto& a = full->params().items();
    const auto& b = resumed->params().items();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].second.value().data == b[i].second.value().data);  // bitwise
    }
}

TEST_CASE("palette colors are deterministic") {
    CHECK(palette_color(7) == palette_color(7));
    CHECK(palette_color(7) != palette_color(8));
}

TEST_CASE("PLY export writes one color per face") {
    const Mesh mesh = shapes::tetrahedron();
    std::vector<std::array<std::uint8_t, 3>> colors(mesh.n_faces(), {10, 20, 30});
    const std::string path = "/tmp/pdmesh_test_mesh.ply";
    write_ply_face_colors(mesh, colors, path);
    const std::string content = read_file(path);
    CHECK(content.find("element vertex 4") != std::string::npos);
    CHECK(content.find("element face 4") != std::string::npos);
    CHECK(content.find("property uchar red") != std::string::npos);
}

TEST_CASE("cmd build-graph") {
    const std::string mesh_path = "/tmp/pdmesh_test_bg.obj";
    save_obj(shapes::tetrahedron(), mesh_path);

    SUBCASE("reports counts and passes the theorem check") {
        cli::BuildGraphOptions options;
        options.mesh_path = mesh_path;
        options.out_path = "/tmp/pdmesh_test_bg.json";
        options.verify_theorem = true;
        std::ostringstream out, err;
        CHECK(cli::cmd_build_graph(options, out, err) == cli::kExitOk);
        CHECK(out.str().find("primal 4/6, dual 6/12") != std::string::npos);
        CHECK(out.str().find("theorem: pass") != std::string::npos);
        CHECK(fs::exists(options.out_path));
    }
    SUBCASE("config C reports directed arcs") {
        cli::BuildGraphOptions options;
        options.mesh_path = mesh_path;
        options.config = "C";
        std::ostringstream out, err;
        CHECK(cli::cmd_build_graph(options, out, err) == cli::kExitOk);
        CHECK(out.str().find("dual 12/24 directed") != std::string::npos);
    }
    SUBCASE("non-manifold input exits with code 2 and lists the edge") {
        const std::string bad_path = "/tmp/pdmesh_test_nm.obj";
        save_obj(shapes::three_fans_on_edge(), bad_path);
        cli::BuildGraphOptions options;
        options.mesh_path = bad_path;
        std::ostringstream out, err;
        CHECK(cli::cmd_build_graph(options, out, err) == cli::kExitNonManifold);
        CHECK(out.str().find("fail") != std::string::npos);
        CHECK(out.str().find("3 incident faces") != std::string::npos);
    }
    SUBCASE("missing file exits with code 1") {
        cli::BuildGraphOptions options;
        options.mesh_path = "/tmp/does_not_exist.obj";
        std::ostringstream out, err;
        CHECK(cli::cmd_build_graph(options, out, err) == cli::kExitError);
    }
}

TEST_CASE("cmd train / eval round trip on a tiny dataset") {
    const std::string root = "/tmp/pdmesh_test_cli_ds";
    fs::remove_all(root);
    synth::write_classification_dataset(synth::two_class_classification(2, 31), root);

    cli::TrainOptions options;
    options.dataset_root = root;
    options.out_checkpoint = "/tmp/pdmesh_test_cli.ckpt";
    options.overrides = {{"task", "classification"}, {"epochs", "2"},
                         {"batch", "2"},            {"heads", "1"},
                         {"base_width", "8"},       {"seed", "5"},
                         {"attn_init", "uniform"}};
    std::ostringstream out, err;
    REQUIRE(cli::cmd_train(options, out, err) == cli::kExitOk);
    CHECK(out.str().find("epoch 1/2") != std::string::npos);
    CHECK(out.str().find("checkpoint saved") != std::string::npos);
    CHECK(out.str().find("train metrics") != std::string::npos);

    cli::EvalOptions eval_options;
    eval_options.checkpoint_path = options.out_checkpoint;
    eval_options.dataset_root = root;
    eval_options.json_out = "/tmp/pdmesh_test_cli_eval.json";
    std::ostringstream eval_out, eval_err;
    REQUIRE(cli::cmd_eval(eval_options, eval_out, eval_err) == cli::kExitOk);
    CHECK(eval_out.str().find("accuracy") != std::string::npos);
    CHECK(fs::exists(eval_options.json_out));

    SUBCASE("invalid config key exits with code 1 naming the key") {
        cli::TrainOptions bad = options;
        bad.overrides.push_back({"learning_rate", "0.1"});
        std::ostringstream bout, berr;
        CHECK(cli::cmd_train(bad, bout, berr) == cli::kExitError);
        CHECK(berr.str().find("learning_rate") != std::string::npos);
    }
    SUBCASE("empty dataset exits with code 1") {
        cli::EvalOptions bad = eval_options;
        bad.dataset_root = "/tmp/pdmesh_test_cli_empty";
        fs::remove_all(bad.dataset_root);
        fs::create_directories(bad.dataset_root);
        std::ostringstream bout, berr;
        CHECK(cli::cmd_eval(bad, bout, berr) == cli::kExitError);
    }
    SUBCASE("class count mismatch against the checkpoint exits with code 1") {
        const std::string other = "/tmp/pdmesh_test_cli_3class";
        fs::remove_all(other);
        synth::write_classification_dataset(synth::two_class_classification(1, 33), other);
        fs::create_directories(fs::path(other) / "extra");
        save_obj(shapes::tetrahedron(), (fs::path(other) / "extra" / "t.obj").string());
        cli::EvalOptions bad = eval_options;
        bad.dataset_root = other;
        std::ostringstream bout, berr;
        CHECK(cli::cmd_eval(bad, bout, berr) == cli::kExitError);
        CHECK(berr.str().find("classes") != std::string::npos);
    }
}

TEST_CASE("cmd export") {
    const std::string mesh_path = "/tmp/pdmesh_test_export.obj";
    save_obj(shapes::icosphere(1), mesh_path);

    SUBCASE("clusters mode writes a PLY and a cluster table") {
        cli::ExportOptions options;
        options.mesh_path = mesh_path;
        options.mode = "clusters";
        options.out_path = "/tmp/pdmesh_test_export.ply";
        options.overrides = {{"heads", "1"}, {"base_width", "8"}, {"seed", "3"}};
        std::ostringstream out, err;
        REQUIRE(cli::cmd_export(options, out, err) == cli::kExitOk);
        CHECK(fs::exists(options.out_path));
        CHECK(fs::exists(options.out_path + ".clusters.txt"));
        // one cluster id per face
        std::ifstream table(options.out_path + ".clusters.txt");
        int lines = 0, value;
        while (table >> value) ++lines;
        CHECK(lines == 80);

        // deterministic: second run produces identical bytes
        const std::string first = read_file(options.out_path);
        std::ostringstream out2, err2;
        REQUIRE(cli::cmd_export(options, out2, err2) == cli::kExitOk);
        CHECK(read_file(options.out_path) == first);
    }
    SUBCASE("segmentation mode writes class colors") {
        cli::ExportOptions options;
        options.mesh_path = mesh_path;
        options.mode = "segmentation";
        options.out_path = "/tmp/pdmesh_test_export_seg.ply";
        options.overrides = {{"task", "segmentation"}, {"heads", "1"},
                             {"base_width", "8"},      {"classes", "3"}};
        std::ostringstream out, err;
        REQUIRE(cli::cmd_export(options, out, err) == cli::kExitOk);
        CHECK(fs::exists(options.out_path));
    }
    SUBCASE("unknown mode exits with code 1") {
        cli::ExportOptions options;
        options.mesh_path = mesh_path;
        options.mode = "wireframe";
        options.out_path = "/tmp/pdmesh_test_export_bad.ply";
        std::ostringstream out, err;
        CHECK(cli::cmd_export(options, out, err) == cli::kExitError);
    }
}
