#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pdmesh/cli.hpp"

namespace {

// Shared model/training flags collected as config overrides.
struct CommonFlags {
    std::string config;
    int heads = -1;
    double pool_fraction = -1.0;
    std::string pool_agg;
    long long seed = -1;
    int epochs = -1;
    double lr = -1.0;
    int batch = -1;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "Dual-graph configuration: A, B or C");
        app->add_option("--heads", heads, "Number of attention heads");
        app->add_option("--pool-fraction", pool_fraction,
                        "Fraction of primal edges contracted per pooling layer");
        app->add_option("--pool-agg", pool_agg, "Pooling aggregation: sum or mean");
        app->add_option("--seed", seed, "Random seed");
        app->add_option("--epochs", epochs, "Training epochs");
        app->add_option("--lr", lr, "Learning rate");
        app->add_option("--batch", batch, "Batch size");
    }

    void collect(std::vector<std::pair<std::string, std::string>>& overrides,
                 int pool_layers) const {
        if (!config.empty()) overrides.emplace_back("dual_config", config);
        if (heads >= 0) overrides.emplace_back("heads", std::to_string(heads));
        if (pool_fraction >= 0.0) {
            std::string list;
            for (int i = 0; i < pool_layers; ++i) {
                list += (i ? "," : "") + std::to_string(pool_fraction);
            }
            overrides.emplace_back("pool_fractions", list);
        }
        if (!pool_agg.empty()) overrides.emplace_back("pool_agg", pool_agg);
        if (seed >= 0) overrides.emplace_back("seed", std::to_string(seed));
        if (epochs >= 0) overrides.emplace_back("epochs", std::to_string(epochs));
        if (lr >= 0.0) overrides.emplace_back("lr", std::to_string(lr));
        if (batch >= 0) overrides.emplace_back("batch", std::to_string(batch));
    }
};

int pool_layers_for_task(const std::string& task) {
    if (task == "segmentation") return 3;
    if (task == "superpixel") return 5;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Primal-dual graph networks on triangle meshes"};
    app.require_subcommand(1);

    // build-graph
    pdmesh::cli::BuildGraphOptions bg;
    auto* build = app.add_subcommand("build-graph", "Build the primal/dual graph pair");
    build->add_option("mesh", bg.mesh_path, "Input OBJ mesh")->required();
    build->add_option("--out", bg.out_path, "JSON dump path");
    build->add_option("--config", bg.config, "Dual-graph configuration: A, B or C");
    build->add_flag("--verify-theorem", bg.verify_theorem,
                    "Check medial-graph/line-graph equivalence");

    // train
    pdmesh::cli::TrainOptions tr;
    CommonFlags train_flags;
    std::string train_task;
    auto* train = app.add_subcommand("train", "Train a model");
    train->add_option("dataset", tr.dataset_root, "Dataset root directory")->required();
    train->add_option("--config-file", tr.config_path, "Key-value training config file");
    train->add_option("--out", tr.out_checkpoint, "Output checkpoint path");
    train->add_option("--resume", tr.resume_checkpoint, "Resume from checkpoint");
    train->add_option("--val", tr.val_root, "Validation dataset root");
    train->add_option("--task", train_task, "classification, segmentation or superpixel");
    train_flags.attach(train);

    // eval
    pdmesh::cli::EvalOptions ev;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("checkpoint", ev.checkpoint_path, "Checkpoint path")->required();
    eval->add_option("dataset", ev.dataset_root, "Dataset root directory")->required();
    eval->add_option("--json", ev.json_out, "Machine-readable metrics path");

    // export
    pdmesh::cli::ExportOptions ex;
    CommonFlags export_flags;
    auto* exp = app.add_subcommand("export", "Write a colored PLY for inspection");
    exp->add_option("mesh", ex.mesh_path, "Input OBJ mesh")->required();
    exp->add_option("out", ex.out_path, "Output PLY path")->required();
    exp->add_option("--checkpoint", ex.checkpoint_path, "Model checkpoint (optional)");
    exp->add_option("--mode", ex.mode, "clusters or segmentation");
    export_flags.attach(exp);

    CLI11_PARSE(app, argc, argv);

    if (build->parsed()) {
        return pdmesh::cli::cmd_build_graph(bg, std::cout, std::cerr);
    }
    if (train->parsed()) {
        if (!train_task.empty()) tr.overrides.emplace_back("task", train_task);
        train_flags.collect(tr.overrides, pool_layers_for_task(train_task));
        return pdmesh::cli::cmd_train(tr, std::cout, std::cerr);
    }
    if (eval->parsed()) {
        return pdmesh::cli::cmd_eval(ev, std::cout, std::cerr);
    }
    if (exp->parsed()) {
        export_flags.collect(ex.overrides, ex.mode == "clusters" ? 5 : 3);
        return pdmesh::cli::cmd_export(ex, std::cout, std::cerr);
    }
    return pdmesh::cli::kExitError;
}
