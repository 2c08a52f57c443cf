#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "pdmesh/train.hpp"

namespace pdmesh::cli {

// Exit codes: 0 success, 1 usage/config/data error, 2 non-manifold input.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNonManifold = 2;

struct BuildGraphOptions {
    std::string mesh_path;
    std::string out_path;  // JSON dump; empty = no dump
    std::string config = "A";
    bool verify_theorem = false;
};

int cmd_build_graph(const BuildGraphOptions& options, std::ostream& out, std::ostream& err);

struct TrainOptions {
    std::string dataset_root;
    std::string config_path;        // optional
    std::string out_checkpoint = "model.ckpt";
    std::string resume_checkpoint;  // optional
    std::string val_root;           // optional: enables best-checkpoint tracking
    int eval_every = 10;
    // CLI overrides applied after the config file, as (key, value) pairs.
    std::vector<std::pair<std::string, std::string>> overrides;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
    std::string checkpoint_path;
    std::string dataset_root;
    std::string json_out;  // optional machine-readable dump
};

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct ExportOptions {
    std::string checkpoint_path;  // optional: empty = freshly initialized model
    std::string mesh_path;
    std::string mode = "clusters";  // clusters | segmentation
    std::string out_path;
    // Used only when no checkpoint is given.
    std::vector<std::pair<std::string, std::string>> overrides;
};

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err);

}  // namespace pdmesh::cli
