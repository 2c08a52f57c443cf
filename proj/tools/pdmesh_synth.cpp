#include <iostream>

#include <CLI11.hpp>

#include "pdmesh/synth.hpp"

// Generates the small synthetic datasets used by the README walkthrough and
// for augmentation preprocessing.
int main(int argc, char** argv) {
    CLI::App app{"Synthetic dataset generator"};
    app.require_subcommand(1);

    std::string out_root;
    int per_class = 8;
    long long seed = 7;

    auto* cls = app.add_subcommand("classification", "Two-class boxes-vs-spheres set");
    cls->add_option("out", out_root, "Output dataset root")->required();
    cls->add_option("--per-class", per_class, "Samples per class");
    cls->add_option("--seed", seed, "Random seed");

    auto* seg = app.add_subcommand("segmentation", "One 500-face two-region sample");
    seg->add_option("out", out_root, "Output dataset root")->required();
    seg->add_option("--seed", seed, "Random seed");

    std::string aug_in, aug_task = "classification";
    int copies = 4;
    double amount = 0.3;
    auto* aug = app.add_subcommand("augment", "Write jittered copies of a dataset");
    aug->add_option("in", aug_in, "Input dataset root")->required();
    aug->add_option("out", out_root, "Output dataset root")->required();
    aug->add_option("--task", aug_task, "classification or segmentation");
    aug->add_option("--copies", copies, "Copies per sample");
    aug->add_option("--amount", amount, "Maximum slide fraction along an edge");
    aug->add_option("--seed", seed, "Random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cls->parsed()) {
            const auto ds = pdmesh::synth::two_class_classification(
                per_class, static_cast<std::uint64_t>(seed));
            pdmesh::synth::write_classification_dataset(ds, out_root);
            std::cout << "wrote " << ds.meshes.size() << " samples to " << out_root << "\n";
        } else if (seg->parsed()) {
            const auto sample =
                pdmesh::synth::two_region_segmentation(static_cast<std::uint64_t>(seed));
            pdmesh::synth::write_segmentation_sample(sample, out_root);
            std::cout << "wrote sample '" << sample.name << "' to " << out_root << "\n";
        } else if (aug->parsed()) {
            pdmesh::augment_dataset(aug_in, out_root, pdmesh::task_from_string(aug_task),
                                    copies, amount, static_cast<std::uint64_t>(seed));
            std::cout << "augmented dataset written to " << out_root << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
