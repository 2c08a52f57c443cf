#include "pdmesh/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pdmesh/shapes.hpp"

namespace fs = std::filesystem;

namespace pdmesh {

void TrainConfig::apply_defaults() {
    if (base_width == 0) base_width = task == Task::Classification ? 64 : 32;
    if (lr == 0.0) lr = task == Task::Classification ? 2e-4 : 1e-3;
}

ArchitectureSpec TrainConfig::architecture() const {
    ArchitectureSpec spec;
    spec.task = task;
    spec.classes = classes;
    spec.heads = heads;
    spec.base_width = base_width;
    spec.pool_fractions = pool_fractions;
    spec.pool_agg = pool_agg;
    spec.dual_config = dual_config;
    spec.self_loops = self_loops;
    spec.pool_fraction_of_nodes = pool_fraction_of_nodes;
    spec.attn_init = attn_init;
    spec.apply_defaults();
    return spec;
}

void apply_config_override(TrainConfig& config, const std::string& key,
                           const std::string& value) {
    std::istringstream vs(value);
    auto parse_double = [&](double& out) {
        if (!(vs >> out)) throw std::runtime_error("bad value for key '" + key + "'");
    };
    if (key == "task") {
        config.task = task_from_string(value);
    } else if (key == "classes") {
        config.classes = std::stoi(value);
    } else if (key == "heads") {
        config.heads = std::stoi(value);
    } else if (key == "base_width") {
        config.base_width = std::stoi(value);
    } else if (key == "lr") {
        parse_double(config.lr);
    } else if (key == "epochs") {
        config.epochs = std::stoi(value);
    } else if (key == "batch") {
        config.batch = std::stoi(value);
    } else if (key == "seed") {
        config.seed = std::stoull(value);
    } else if (key == "pool_agg") {
        config.pool_agg = pool_aggregation_from_string(value);
    } else if (key == "dual_config") {
        config.dual_config = dual_config_from_string(value);
    } else if (key == "self_loops") {
        config.self_loops = std::stoi(value) != 0;
    } else if (key == "pool_fractions") {
        config.pool_fractions.clear();
        std::istringstream ls(value);
        std::string tok;
        while (std::getline(ls, tok, ',')) {
            if (!tok.empty()) config.pool_fractions.push_back(std::stod(tok));
        }
    } else if (key == "pool_target") {
        if (value == "edges") {
            config.pool_fraction_of_nodes = false;
        } else if (value == "nodes") {
            config.pool_fraction_of_nodes = true;
        } else {
            throw std::runtime_error("pool_target must be 'edges' or 'nodes'");
        }
    } else if (key == "attn_init") {
        if (value == "zeros") {
            config.attn_init = AttentionInit::Zeros;
        } else if (value == "uniform") {
            config.attn_init = AttentionInit::Uniform;
        } else {
            throw std::runtime_error("attn_init must be 'zeros' or 'uniform'");
        }
    } else if (key == "augment") {
        config.augment = std::stoi(value) != 0;
    } else if (key == "augment_copies") {
        config.augment_copies = std::stoi(value);
    } else if (key == "augment_amount") {
        parse_double(config.augment_amount);
    } else {
        throw std::runtime_error("unknown config key '" + key + "'");
    }
}

TrainConfig parse_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    TrainConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string eq;
        ls >> eq;
        if (eq != "=") {
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected 'key = value'");
        }
        std::string value;
        std::getline(ls, value);
        const auto start = value.find_first_not_of(" \t");
        const auto end = value.find_last_not_of(" \t\r");
        value = start == std::string::npos ? "" : value.substr(start, end - start + 1);
        apply_config_override(config, key, value);
    }
    return config;
}

std::string train_config_echo(const TrainConfig& config) {
    std::ostringstream os;
    os.precision(17);
    os << "task = " << to_string(config.task) << "\n";
    os << "classes = " << config.classes << "\n";
    os << "heads = " << config.heads << "\n";
    os << "base_width = " << config.base_width << "\n";
    os << "lr = " << config.lr << "\n";
    os << "epochs = " << config.epochs << "\n";
    os << "batch = " << config.batch << "\n";
    os << "seed = " << config.seed << "\n";
    os << "pool_agg = " << to_string(config.pool_agg) << "\n";
    os << "dual_config = " << to_string(config.dual_config) << "\n";
    os << "self_loops = " << (config.self_loops ? 1 : 0) << "\n";
    os << "pool_fractions = ";
    for (std::size_t i = 0; i < config.pool_fractions.size(); ++i) {
        os << (i ? "," : "") << config.pool_fractions[i];
    }
    os << "\n";
    os << "pool_target = " << (config.pool_fraction_of_nodes ? "nodes" : "edges") << "\n";
    os << "attn_init = " << (config.attn_init == AttentionInit::Uniform ? "uniform" : "zeros")
       << "\n";
    os << "augment = " << (config.augment ? 1 : 0) << "\n";
    return os.str();
}

// --- datasets -----------------------------------------------------------------

namespace {

std::vector<fs::path> sorted_entries(const std::string& root, bool dirs) {
    std::vector<fs::path> out;
    if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root);
    for (const auto& entry : fs::directory_iterator(root)) {
        if (dirs && entry.is_directory()) out.push_back(entry.path());
        if (!dirs && entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> read_int_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    std::vector<int> out;
    int v;
    while (in >> v) out.push_back(v);
    return out;
}

std::vector<std::array<int, 2>> read_int_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    std::vector<std::array<int, 2>> out;
    int a, b;
    while (in >> a >> b) out.push_back({a, b});
    return out;
}

}  // namespace

ClassificationDataset load_classification_dataset(const std::string& root) {
    ClassificationDataset ds;
    for (const auto& class_dir : sorted_entries(root, true)) {
        const int label = static_cast<int>(ds.class_names.size());
        ds.class_names.push_back(class_dir.filename().string());
        for (const auto& file : sorted_entries(class_dir.string(), false)) {
            if (file.extension() != ".obj") continue;
            ds.meshes.push_back(load_obj(file.string()));
            ds.labels.push_back(label);
            ds.sample_names.push_back(file.stem().string());
        }
    }
    if (ds.meshes.empty()) throw std::runtime_error("empty dataset under " + root);
    return ds;
}

std::vector<SegmentationSample> load_segmentation_dataset(const std::string& root) {
    std::vector<SegmentationSample> samples;
    for (const auto& file : sorted_entries(root, false)) {
        if (file.extension() != ".obj") continue;
        SegmentationSample s;
        s.mesh = load_obj(file.string());
        s.name = file.stem().string();
        fs::path base = file;
        base.replace_extension();
        const std::string faces = base.string() + ".faces.txt";
        if (!fs::exists(faces)) {
            throw std::runtime_error("missing face label file: " + faces);
        }
        s.face_labels = read_int_lines(faces);
        if (s.face_labels.size() != static_cast<std::size_t>(s.mesh.n_faces())) {
            throw std::runtime_error("face label count mismatch for " + s.name);
        }
        const std::string edges = base.string() + ".edges.txt";
        if (fs::exists(edges)) s.edge_labels = read_int_lines(edges);
        const std::string soft = base.string() + ".soft.txt";
        if (fs::exists(soft)) s.soft_labels = read_int_pairs(soft);
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw std::runtime_error("empty dataset under " + root);
    return samples;
}

void augment_dataset(const std::string& root, const std::string& out_root, Task task,
                     int copies, double amount, std::uint64_t seed) {
    Rng rng(seed);
    fs::create_directories(out_root);
    auto emit = [&](const Mesh& mesh, const fs::path& rel_dir, const std::string& stem,
                    const fs::path& src_base) {
        fs::create_directories(fs::path(out_root) / rel_dir);
        for (int c = 0; c < copies; ++c) {
            Mesh jittered = shapes::jitter_along_edges(mesh, rng, amount);
            const std::string name = stem + "_aug" + std::to_string(c);
            save_obj(jittered, (fs::path(out_root) / rel_dir / (name + ".obj")).string());
            // Jitter moves vertices only, so label files carry over unchanged.
            for (const char* suffix : {".faces.txt", ".edges.txt", ".soft.txt"}) {
                const fs::path src = src_base.string() + suffix;
                if (fs::exists(src)) {
                    fs::copy_file(src,
                                  fs::path(out_root) / rel_dir / (name + suffix),
                                  fs::copy_options::overwrite_existing);
                }
            }
        }
    };
    if (task == Task::Classification) {
        for (const auto& class_dir : sorted_entries(root, true)) {
            for (const auto& file : sorted_entries(class_dir.string(), false)) {
                if (file.extension() != ".obj") continue;
                fs::path base = file;
                base.replace_extension();
                emit(load_obj(file.string()), class_dir.filename(), file.stem().string(), base);
            }
        }
    } else {
        for (const auto& file : sorted_entries(root, false)) {
            if (file.extension() != ".obj") continue;
            fs::path base = file;
            base.replace_extension();
            emit(load_obj(file.string()), ".", file.stem().string(), base);
        }
    }
}

// --- batching ------------------------------------------------------------------

GraphPair batch_graphs(const std::vector<const GraphPair*>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("cannot batch zero graphs");
    const auto& first = *pairs[0];
    GraphPair out;
    out.dual.config = first.dual.config;
    out.n_graphs = 0;
    const std::size_t pw = first.primal.features.cols;
    const std::size_t dw = first.dual.features.cols;

    int node_offset = 0, face_offset = 0, dual_offset = 0;
    std::vector<double> pfeat, dfeat;
    for (const GraphPair* gp : pairs) {
        const auto& p = *gp;
        if (p.primal.features.cols != pw || p.dual.features.cols != dw) {
            throw std::invalid_argument("feature width mismatch across batch");
        }
        if (p.dual.config != out.dual.config) {
            throw std::invalid_argument("dual configuration mismatch across batch");
        }
        const int gid = out.n_graphs++;
        for (int v = 0; v < p.primal.n_nodes; ++v) {
            out.primal.clusters.push_back(p.primal.clusters[v]);
            for (int& f : out.primal.clusters.back()) f += face_offset;
            out.primal_node_graph.push_back(gid);
        }
        for (int f : p.primal.face_to_node) out.primal.face_to_node.push_back(f + node_offset);
        for (const auto& e : p.primal.edges) {
            out.primal.edges.push_back({e[0] + node_offset, e[1] + node_offset});
            out.primal.edge_mesh_edge.push_back(-1);
        }
        for (int j = 0; j < p.dual.n_nodes(); ++j) {
            out.dual.node_keys.push_back({p.dual.node_keys[j][0] + node_offset,
                                          p.dual.node_keys[j][1] + node_offset});
            out.dual.node_mesh_edges.emplace_back();
            out.dual_node_graph.push_back(gid);
        }
        for (const auto& a : p.dual.arcs) {
            out.dual.arcs.push_back({a[0] + dual_offset, a[1] + dual_offset});
        }
        pfeat.insert(pfeat.end(), p.primal.features.data.begin(), p.primal.features.data.end());
        dfeat.insert(dfeat.end(), p.dual.features.data.begin(), p.dual.features.data.end());
        node_offset += p.primal.n_nodes;
        face_offset += static_cast<int>(p.primal.face_to_node.size());
        dual_offset += p.dual.n_nodes();
    }
    out.primal.n_nodes = node_offset;
    out.primal.rebuild_lookup();
    out.primal.features = Matrix(out.primal.n_nodes, pw);
    out.primal.features.data = std::move(pfeat);
    out.dual.features = Matrix(out.dual.n_nodes(), dw);
    out.dual.features.data = std::move(dfeat);
    return out;
}

// --- preparation -----------------------------------------------------------------

PreparedDataset prepare_classification(const ClassificationDataset& dataset,
                                       DualConfig config) {
    PreparedDataset prepared;
    prepared.task = Task::Classification;
    prepared.classes = static_cast<int>(dataset.class_names.size());
    for (std::size_t i = 0; i < dataset.meshes.size(); ++i) {
        const auto topo = build_topology(dataset.meshes[i]);
        prepared.pairs.push_back(build_graph_pair(dataset.meshes[i], topo, config));
        prepared.graph_labels.push_back(dataset.labels[i]);
    }
    return prepared;
}

PreparedDataset prepare_segmentation(const std::vector<SegmentationSample>& samples,
                                     DualConfig config, int classes) {
    PreparedDataset prepared;
    prepared.task = Task::Segmentation;
    int max_label = 0;
    for (const auto& s : samples) {
        auto topo = build_topology(s.mesh);
        prepared.pairs.push_back(build_graph_pair(s.mesh, topo, config));
        prepared.face_labels.push_back(s.face_labels);
        prepared.edge_labels.push_back(s.edge_labels);
        auto soft = s.soft_labels;
        if (soft.empty()) soft = face_to_soft_edge(s.face_labels, topo);
        prepared.soft_labels.push_back(std::move(soft));
        prepared.edge_lengths.push_back(interior_edge_lengths(s.mesh, topo));
        for (int l : s.face_labels) max_label = std::max(max_label, l);
        prepared.topologies.push_back(std::move(topo));
    }
    prepared.classes = classes > 0 ? classes : max_label + 1;
    return prepared;
}

// --- loops ------------------------------------------------------------------------

namespace {

std::vector<int> batched_labels(const PreparedDataset& ds, const std::vector<int>& order,
                                std::size_t from, std::size_t to) {
    std::vector<int> labels;
    for (std::size_t i = from; i < to; ++i) {
        const int s = order[i];
        if (ds.task == Task::Classification) {
            labels.push_back(ds.graph_labels[s]);
        } else {
            labels.insert(labels.end(), ds.face_labels[s].begin(), ds.face_labels[s].end());
        }
    }
    return labels;
}

}  // namespace

EpochStats train_epoch(Net& net, const PreparedDataset& dataset, Adam& optimizer, Rng& rng,
                       int batch_size) {
    if (dataset.size() == 0) throw std::invalid_argument("empty dataset");
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    const auto params = net.params().tensors();
    EpochStats stats;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
        const std::size_t stop =
            std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        std::vector<const GraphPair*> batch;
        for (std::size_t i = start; i < stop; ++i) batch.push_back(&dataset.pairs[order[i]]);
        const GraphPair pair = batch_graphs(batch);
        const std::vector<int> labels = batched_labels(dataset, order, start, stop);

        optimizer.zero_grad(params);
        Tensor logits = net.logits(pair, /*training=*/true);
        Tensor loss = cross_entropy(logits, labels);
        const double value = loss.item();
        if (!std::isfinite(value)) {
            throw std::runtime_error("non-finite loss at batch " +
                                     std::to_string(stats.batches) + "; aborting training");
        }
        loss.backward();
        optimizer.step(params);
        stats.mean_loss += value;
        ++stats.batches;
    }
    stats.mean_loss /= std::max(1, stats.batches);
    return stats;
}

EvalMetrics evaluate(Net& net, const PreparedDataset& dataset) {
    if (dataset.size() == 0) throw std::invalid_argument("empty dataset");
    EvalMetrics metrics;
    if (dataset.task == Task::Classification) {
        long correct = 0;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            Tensor logits = net.logits(dataset.pairs[i], /*training=*/false);
            int best = 0;
            for (std::size_t c = 1; c < logits.cols(); ++c) {
                if (logits.value()(0, c) > logits.value()(0, best)) best = static_cast<int>(c);
            }
            correct += best == dataset.graph_labels[i];
        }
        metrics.classification_accuracy =
            100.0 * static_cast<double>(correct) / static_cast<double>(dataset.size());
        return metrics;
    }

    long face_correct = 0, face_total = 0;
    double hard_sum = 0.0, soft_sum = 0.0;
    long hard_meshes = 0, soft_meshes = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Tensor logits = net.logits(dataset.pairs[i], /*training=*/false);
        std::vector<int> pred(logits.rows());
        for (std::size_t r = 0; r < logits.rows(); ++r) {
            int best = 0;
            for (std::size_t c = 1; c < logits.cols(); ++c) {
                if (logits.value()(r, c) > logits.value()(r, best)) best = static_cast<int>(c);
            }
            pred[r] = best;
        }
        for (std::size_t f = 0; f < pred.size(); ++f) {
            ++face_total;
            face_correct += pred[f] == dataset.face_labels[i][f];
        }
        if (!dataset.edge_labels[i].empty()) {
            hard_sum += edge_accuracy_hard_from_faces(pred, dataset.edge_labels[i],
                                                      dataset.topologies[i]);
            ++hard_meshes;
        }
        if (!dataset.soft_labels[i].empty()) {
            soft_sum += edge_accuracy_soft_from_faces(pred, dataset.soft_labels[i],
                                                      dataset.edge_lengths[i],
                                                      dataset.topologies[i]);
            ++soft_meshes;
        }
    }
    metrics.face_accuracy =
        100.0 * static_cast<double>(face_correct) / static_cast<double>(face_total);
    if (hard_meshes > 0) metrics.edge_accuracy_hard = hard_sum / hard_meshes;
    if (soft_meshes > 0) metrics.edge_accuracy_soft = soft_sum / soft_meshes;
    return metrics;
}

std::string EvalMetrics::to_text() const {
    std::ostringstream os;
    os.precision(6);
    if (classification_accuracy) os << "accuracy: " << *classification_accuracy << "\n";
    if (face_accuracy) os << "face-label accuracy: " << *face_accuracy << "\n";
    if (edge_accuracy_hard) os << "edge accuracy (hard gt): " << *edge_accuracy_hard << "\n";
    if (edge_accuracy_soft) os << "edge accuracy (soft gt): " << *edge_accuracy_soft << "\n";
    return os.str();
}

}  // namespace pdmesh
