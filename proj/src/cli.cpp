#include "pdmesh/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pdmesh/checkpoint.hpp"
#include "pdmesh/export.hpp"

namespace fs = std::filesystem;

namespace pdmesh::cli {

namespace {

nlohmann::json manifold_report_json(const ManifoldReport& report, const MeshTopology& topo) {
    nlohmann::json j;
    j["edge_manifold"] = report.edge_manifold;
    j["watertight"] = report.watertight;
    j["offending_edges"] = nlohmann::json::array();
    for (int e : report.offending_edges) {
        j["offending_edges"].push_back({{"edge", e},
                                        {"vertices", topo.edge_vertices[e]},
                                        {"incident_faces", topo.edge_faces[e]}});
    }
    return j;
}

PreparedDataset load_prepared(const std::string& root, Task task, DualConfig config,
                              int classes) {
    if (task == Task::Classification) {
        return prepare_classification(load_classification_dataset(root), config);
    }
    auto prepared = prepare_segmentation(load_segmentation_dataset(root), config, classes);
    prepared.task = task;
    return prepared;
}

double headline_metric(const EvalMetrics& m) {
    if (m.classification_accuracy) return *m.classification_accuracy;
    if (m.face_accuracy) return *m.face_accuracy;
    return 0.0;
}

}  // namespace

int cmd_build_graph(const BuildGraphOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Mesh mesh = load_obj(options.mesh_path);
        const MeshTopology topo = build_topology(mesh);
        const ManifoldReport report = check_edge_manifold(topo);
        out << manifold_report_text(report, topo);
        if (!report.edge_manifold) {
            if (!options.out_path.empty()) {
                std::ofstream jf(options.out_path);
                jf << manifold_report_json(report, topo).dump(2) << "\n";
            }
            return kExitNonManifold;
        }

        const DualConfig config = dual_config_from_string(options.config);
        const GraphPair pair = build_graph_pair(mesh, topo, config);
        const int dual_edges = config == DualConfig::C
                                   ? static_cast<int>(pair.dual.arcs.size())
                                   : static_cast<int>(pair.dual.arcs.size()) / 2;
        out << "primal " << pair.primal.n_nodes << "/" << pair.primal.n_edges() << ", dual "
            << pair.dual.n_nodes() << "/" << dual_edges
            << (config == DualConfig::C ? " directed" : "") << "\n";

        if (options.verify_theorem) {
            const auto theorem = verify_medial_line_equivalence(mesh, topo);
            if (!theorem.precondition_ok) {
                out << "theorem: skipped (" << theorem.detail << ")\n";
            } else {
                out << "theorem: " << (theorem.pass ? "pass" : "FAIL") << ", " << theorem.detail
                    << "\n";
                if (!theorem.pass) return kExitError;
            }
        }
        if (!options.out_path.empty()) {
            std::ofstream jf(options.out_path);
            if (!jf) throw std::runtime_error("cannot write " + options.out_path);
            nlohmann::json j = nlohmann::json::parse(graph_pair_to_json(pair));
            j["report"] = manifold_report_json(report, topo);
            jf << j.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
    try {
        TrainConfig config;
        if (!options.config_path.empty()) config = parse_train_config(options.config_path);
        for (const auto& [key, value] : options.overrides) {
            apply_config_override(config, key, value);
        }
        config.apply_defaults();

        std::string root = options.dataset_root;
        if (config.augment) {
            const std::string aug_root = options.out_checkpoint + ".aug";
            augment_dataset(root, aug_root, config.task, config.augment_copies,
                            config.augment_amount, config.seed ^ 0xa5a5a5a5ull);
            out << "augmented dataset written to " << aug_root << "\n";
            root = aug_root;
        }

        PreparedDataset dataset = load_prepared(root, config.task, config.dual_config,
                                                config.classes);
        if (config.classes == 0) config.classes = dataset.classes;
        if (config.classes != dataset.classes && dataset.task == Task::Classification) {
            throw std::runtime_error("config declares " + std::to_string(config.classes) +
                                     " classes but dataset has " +
                                     std::to_string(dataset.classes));
        }

        std::unique_ptr<Net> net;
        Adam optimizer(AdamParams{config.lr, 0.9, 0.999, 1e-8});
        Rng rng(config.seed);
        int start_epoch = 0;
        if (!options.resume_checkpoint.empty()) {
            const Checkpoint ck = Checkpoint::load(options.resume_checkpoint);
            net = build_net(ck.arch, config.seed);
            ck.restore(*net, &optimizer, &rng);
            start_epoch = ck.epochs_done;
            out << "resumed from " << options.resume_checkpoint << " at epoch " << start_epoch
                << "\n";
        } else {
            net = build_net(config.architecture(), config.seed);
        }

        std::optional<PreparedDataset> val;
        if (!options.val_root.empty()) {
            val = load_prepared(options.val_root, config.task, config.dual_config,
                                config.classes);
        }

        const std::string echo = train_config_echo(config);
        double best_metric = -1.0;
        for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
            const EpochStats stats = train_epoch(*net, dataset, optimizer, rng, config.batch);
            out << "epoch " << epoch + 1 << "/" << config.epochs << " loss " << stats.mean_loss
                << "\n";
            const bool last = epoch + 1 == config.epochs;
            if (val && ((epoch + 1) % options.eval_every == 0 || last)) {
                const EvalMetrics vm = evaluate(*net, *val);
                const double metric = headline_metric(vm);
                out << "  val " << metric << "\n";
                if (metric > best_metric) {
                    best_metric = metric;
                    Checkpoint::capture(*net, &optimizer, &rng, echo, epoch + 1)
                        .save(options.out_checkpoint + ".best");
                }
            }
        }
        Checkpoint::capture(*net, &optimizer, &rng, echo, config.epochs)
            .save(options.out_checkpoint);
        out << "checkpoint saved to " << options.out_checkpoint << "\n";

        const EvalMetrics train_metrics = evaluate(*net, dataset);
        out << "train metrics:\n" << train_metrics.to_text();
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Checkpoint ck = Checkpoint::load(options.checkpoint_path);
        auto net = build_net(ck.arch, /*seed=*/0);
        ck.restore(*net, nullptr, nullptr);

        PreparedDataset dataset = load_prepared(options.dataset_root, ck.arch.task,
                                                ck.arch.dual_config, ck.arch.classes);
        if (dataset.task == Task::Classification && dataset.classes != ck.arch.classes) {
            throw std::runtime_error("dataset has " + std::to_string(dataset.classes) +
                                     " classes but checkpoint expects " +
                                     std::to_string(ck.arch.classes));
        }
        const EvalMetrics metrics = evaluate(*net, dataset);
        out << metrics.to_text();
        if (!options.json_out.empty()) {
            nlohmann::json j;
            if (metrics.classification_accuracy) j["accuracy"] = *metrics.classification_accuracy;
            if (metrics.face_accuracy) j["face_accuracy"] = *metrics.face_accuracy;
            if (metrics.edge_accuracy_hard) j["edge_accuracy_hard"] = *metrics.edge_accuracy_hard;
            if (metrics.edge_accuracy_soft) j["edge_accuracy_soft"] = *metrics.edge_accuracy_soft;
            std::ofstream jf(options.json_out);
            if (!jf) throw std::runtime_error("cannot write " + options.json_out);
            jf << j.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_export(const ExportOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Mesh mesh = load_obj(options.mesh_path);
        const MeshTopology topo = build_topology(mesh);

        std::unique_ptr<Net> net;
        if (!options.checkpoint_path.empty()) {
            const Checkpoint ck = Checkpoint::load(options.checkpoint_path);
            net = build_net(ck.arch, 0);
            ck.restore(*net, nullptr, nullptr);
        } else {
            TrainConfig config;
            config.task = options.mode == "clusters" ? Task::Superpixel : Task::Segmentation;
            config.classes = 2;
            for (const auto& [key, value] : options.overrides) {
                apply_config_override(config, key, value);
            }
            config.apply_defaults();
            net = build_net(config.architecture(), config.seed);
        }

        const GraphPair pair = build_graph_pair(mesh, topo, net->spec().dual_config);
        ForwardArtifacts artifacts;
        const Tensor logits = net->logits(pair, /*training=*/false, &artifacts);

        std::vector<std::array<std::uint8_t, 3>> colors(mesh.n_faces());
        if (options.mode == "clusters") {
            const auto& face_cluster = artifacts.final_pair.primal.face_to_node;
            for (int f = 0; f < mesh.n_faces(); ++f) {
                colors[f] = palette_color(static_cast<std::uint64_t>(face_cluster[f]));
            }
            ClusterAssignment assignment;
            assignment.face_cluster = face_cluster;
            assignment.members = artifacts.final_pair.primal.clusters;
            write_cluster_table(assignment, options.out_path + ".clusters.txt");
            out << "clusters: " << artifacts.final_pair.primal.n_nodes << "\n";
        } else if (options.mode == "segmentation") {
            if (net->spec().task == Task::Classification) {
                throw std::runtime_error("segmentation export needs a per-face model");
            }
            for (int f = 0; f < mesh.n_faces(); ++f) {
                int best = 0;
                for (std::size_t c = 1; c < logits.cols(); ++c) {
                    if (logits.value()(f, c) > logits.value()(f, best)) {
                        best = static_cast<int>(c);
                    }
                }
                colors[f] = palette_color(static_cast<std::uint64_t>(best));
            }
        } else {
            throw std::runtime_error("unknown export mode '" + options.mode +
                                     "' (expected clusters or segmentation)");
        }
        write_ply_face_colors(mesh, colors, options.out_path);
        out << "wrote " << options.out_path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace pdmesh::cli
