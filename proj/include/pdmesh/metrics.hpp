#pragma once

#include <array>
#include <vector>

#include "pdmesh/topology.hpp"

namespace pdmesh {

// Edge-level label vectors are indexed by mesh edge id; entries for boundary
// edges are ignored by every metric below.

enum class VoteTieMode {
    ExcludePrediction,  // 3-way ties mark the face excluded (prediction side)
    MinLabelGroundTruth // 3-way ties fall back to the smallest class id
};

struct FaceVote {
    std::vector<int> labels;
    std::vector<bool> excluded;
};

// Face label = modal label of the face's three edges.
FaceVote majority_vote_faces(const std::vector<int>& edge_labels, const MeshTopology& topology,
                             VoteTieMode tie_mode);

// Soft pair (l_A, l_B) per interior edge, in incident-face order; boundary
// edges get {-1, -1}.
std::vector<std::array<int, 2>> face_to_soft_edge(const std::vector<int>& face_labels,
                                                  const MeshTopology& topology);

// Percentage of correctly labelled faces among the unmasked ones.
double face_label_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                           const std::vector<bool>& excluded);

// Percentage of exact matches between two edge label lists.
double edge_accuracy_hard(const std::vector<int>& predicted, const std::vector<int>& truth);

// Hard edge ground truth scored from face predictions, each face side
// weighted 1/2, averaged over interior edges.
double edge_accuracy_hard_from_faces(const std::vector<int>& predicted_faces,
                                     const std::vector<int>& truth_edges,
                                     const MeshTopology& topology);

// Soft edge ground truth scored from face predictions. Each edge contributes
// its length-weighted half-matches against the soft pair; weights are
// normalized by the mean interior edge length, so uniform lengths reduce to
// the hard-from-faces metric and a perfect prediction scores exactly 100.
double edge_accuracy_soft_from_faces(const std::vector<int>& predicted_faces,
                                     const std::vector<std::array<int, 2>>& truth_soft,
                                     const std::vector<double>& edge_lengths,
                                     const MeshTopology& topology);

std::vector<double> interior_edge_lengths(const Mesh& mesh, const MeshTopology& topology);

}  // namespace pdmesh
