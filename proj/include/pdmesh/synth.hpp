#pragma once

#include <string>

#include "pdmesh/train.hpp"

namespace pdmesh::synth {

// Two-class set: jittered icospheres (~320 faces) vs jittered subdivided
// boxes (~300 faces), `per_class` samples each.
ClassificationDataset two_class_classification(int per_class, std::uint64_t seed);

// Balanced many-class set of small jittered icospheres; labels are the
// class block index.
ClassificationDataset balanced_classification(int classes, int per_class, std::uint64_t seed);

// One 500-face torus with two face-label regions split by the x = 0 plane,
// plus matching edge labels (by edge midpoint).
SegmentationSample two_region_segmentation(std::uint64_t seed);

// File-backed variants mirroring the training dataset layout.
void write_classification_dataset(const ClassificationDataset& dataset,
                                  const std::string& root);
void write_segmentation_sample(const SegmentationSample& sample, const std::string& root);

}  // namespace pdmesh::synth
