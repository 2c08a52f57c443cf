#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pdmesh/metrics.hpp"
#include "pdmesh/model.hpp"

namespace pdmesh {

struct TrainConfig {
    Task task = Task::Classification;
    int classes = 0;  // 0: inferred from the dataset
    int heads = 3;
    int base_width = 0;  // 0: task default (64 classification, 32 otherwise)
    double lr = 0.0;     // 0: task default (2e-4 classification, 1e-3 otherwise)
    int epochs = 200;
    int batch = 16;
    std::uint64_t seed = 0;
    PoolAggregation pool_agg = PoolAggregation::Sum;
    DualConfig dual_config = DualConfig::A;
    bool self_loops = false;
    std::vector<double> pool_fractions;  // empty: task default
    bool pool_fraction_of_nodes = false;
    AttentionInit attn_init = AttentionInit::Zeros;
    bool augment = false;
    int augment_copies = 4;
    double augment_amount = 0.3;

    void apply_defaults();
    ArchitectureSpec architecture() const;
};

// Key-value config file: one `key = value` pair per line, `#` comments.
// Throws naming the key on unknown keys; same for apply_config_override.
TrainConfig parse_train_config(const std::string& path);
void apply_config_override(TrainConfig& config, const std::string& key,
                           const std::string& value);
std::string train_config_echo(const TrainConfig& config);

// --- datasets ---------------------------------------------------------------

struct ClassificationDataset {
    std::vector<Mesh> meshes;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::vector<std::string> sample_names;
};

// Layout: root/<class>/<sample>.obj, classes and samples in sorted order.
ClassificationDataset load_classification_dataset(const std::string& root);

struct SegmentationSample {
    Mesh mesh;
    std::vector<int> face_labels;                  // from <sample>.faces.txt
    std::vector<int> edge_labels;                  // optional <sample>.edges.txt
    std::vector<std::array<int, 2>> soft_labels;   // optional <sample>.soft.txt
    std::string name;
};

// Layout: root/<sample>.obj plus label files next to it.
std::vector<SegmentationSample> load_segmentation_dataset(const std::string& root);

// Writes `copies` jittered variants of each mesh (vertices shifted along
// edges) into out_root, preserving the dataset layout and label files.
void augment_dataset(const std::string& root, const std::string& out_root, Task task,
                     int copies, double amount, std::uint64_t seed);

// --- batching ----------------------------------------------------------------

// Disjoint union with offset relabeling; no cross-graph edges. Feature
// widths must agree.
GraphPair batch_graphs(const std::vector<const GraphPair*>& pairs);

// --- training loop -----------------------------------------------------------

struct PreparedDataset {
    Task task;
    std::vector<GraphPair> pairs;
    std::vector<MeshTopology> topologies;  // segmentation metrics need these
    std::vector<int> graph_labels;                        // classification
    std::vector<std::vector<int>> face_labels;            // segmentation/superpixel
    std::vector<std::vector<int>> edge_labels;            // optional, aligned or empty
    std::vector<std::vector<std::array<int, 2>>> soft_labels;
    std::vector<std::vector<double>> edge_lengths;
    int classes = 0;

    std::size_t size() const { return pairs.size(); }
};

PreparedDataset prepare_classification(const ClassificationDataset& dataset,
                                       DualConfig config);
PreparedDataset prepare_segmentation(const std::vector<SegmentationSample>& samples,
                                     DualConfig config, int classes);

struct EpochStats {
    double mean_loss = 0.0;
    int batches = 0;
};

// One pass with seeded shuffling and Adam updates. Aborts with a diagnostic
// when the loss turns non-finite.
EpochStats train_epoch(Net& net, const PreparedDataset& dataset, Adam& optimizer, Rng& rng,
                       int batch_size);

struct EvalMetrics {
    std::optional<double> classification_accuracy;
    std::optional<double> face_accuracy;
    std::optional<double> edge_accuracy_hard;  // needs ground-truth edge labels
    std::optional<double> edge_accuracy_soft;  // soft pairs, given or derived

    std::string to_text() const;
};

// Side-effect-free evaluation (inference mode, no parameter updates).
EvalMetrics evaluate(Net& net, const PreparedDataset& dataset);

}  // namespace pdmesh
