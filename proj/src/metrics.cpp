#include "pdmesh/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace pdmesh {

FaceVote majority_vote_faces(const std::vector<int>& edge_labels, const MeshTopology& topology,
                             VoteTieMode tie_mode) {
    if (edge_labels.size() != static_cast<std::size_t>(topology.n_edges())) {
        throw std::invalid_argument("edge label count " + std::to_string(edge_labels.size()) +
                                    " != edge count " + std::to_string(topology.n_edges()));
    }
    FaceVote vote;
    const std::size_t n_faces = topology.face_edges.size();
    vote.labels.assign(n_faces, -1);
    vote.excluded.assign(n_faces, false);
    for (std::size_t f = 0; f < n_faces; ++f) {
        std::array<int, 3> l;
        for (int k = 0; k < 3; ++k) {
            l[k] = edge_labels[topology.face_edges[f][k]];
            if (l[k] < 0) throw std::invalid_argument("missing edge label");
        }
        std::sort(l.begin(), l.end());
        if (l[0] == l[1] || l[1] == l[2]) {
            vote.labels[f] = l[1];  // the modal label after sorting
        } else if (tie_mode == VoteTieMode::ExcludePrediction) {
            vote.excluded[f] = true;
        } else {
            vote.labels[f] = l[0];
        }
    }
    return vote;
}

std::vector<std::array<int, 2>> face_to_soft_edge(const std::vector<int>& face_labels,
                                                  const MeshTopology& topology) {
    std::vector<std::array<int, 2>> soft(topology.n_edges(), {-1, -1});
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        soft[e] = {face_labels[topology.edge_faces[e][0]],
                   face_labels[topology.edge_faces[e][1]]};
    }
    return soft;
}

double face_label_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                           const std::vector<bool>& excluded) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("prediction/truth length mismatch");
    }
    long correct = 0, counted = 0;
    for (std::size_t f = 0; f < predicted.size(); ++f) {
        if (!excluded.empty() && excluded[f]) continue;
        ++counted;
        if (predicted[f] == truth[f]) ++correct;
    }
    if (counted == 0) throw std::runtime_error("no faces left to evaluate");
    return 100.0 * static_cast<double>(correct) / static_cast<double>(counted);
}

double edge_accuracy_hard(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("prediction/truth length mismatch");
    }
    if (predicted.empty()) throw std::runtime_error("empty edge set");
    long correct = 0;
    for (std::size_t e = 0; e < predicted.size(); ++e) correct += predicted[e] == truth[e];
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double edge_accuracy_hard_from_faces(const std::vector<int>& predicted_faces,
                                     const std::vector<int>& truth_edges,
                                     const MeshTopology& topology) {
    if (truth_edges.size() != static_cast<std::size_t>(topology.n_edges())) {
        throw std::invalid_argument("truth edge label count mismatch");
    }
    double sum = 0.0;
    long edges = 0;
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        ++edges;
        const int la = predicted_faces[topology.edge_faces[e][0]];
        const int lb = predicted_faces[topology.edge_faces[e][1]];
        sum += 0.5 * (la == truth_edges[e]) + 0.5 * (lb == truth_edges[e]);
    }
    if (edges == 0) throw std::runtime_error("mesh has no interior edges");
    return 100.0 * sum / static_cast<double>(edges);
}

double edge_accuracy_soft_from_faces(const std::vector<int>& predicted_faces,
                                     const std::vector<std::array<int, 2>>& truth_soft,
                                     const std::vector<double>& edge_lengths,
                                     const MeshTopology& topology) {
    if (truth_soft.size() != static_cast<std::size_t>(topology.n_edges()) ||
        edge_lengths.size() != static_cast<std::size_t>(topology.n_edges())) {
        throw std::invalid_argument("soft labels / lengths must cover every edge id");
    }
    // Soft half-match of one face label against the pair.
    auto soft_match = [](int l, const std::array<int, 2>& pair) {
        return 0.5 * (l == pair[0]) + 0.5 * (l == pair[1]);
    };
    double weighted = 0.0, total_length = 0.0;
    long edges = 0;
    for (int e = 0; e < topology.n_edges(); ++e) {
        if (topology.edge_faces[e].size() != 2) continue;
        ++edges;
        total_length += edge_lengths[e];
        const int la = predicted_faces[topology.edge_faces[e][0]];
        const int lb = predicted_faces[topology.edge_faces[e][1]];
        weighted += edge_lengths[e] *
                    (0.5 * soft_match(la, truth_soft[e]) + 0.5 * soft_match(lb, truth_soft[e]));
    }
    if (edges == 0) throw std::runtime_error("mesh has no interior edges");
    if (total_length <= 0.0) throw std::runtime_error("degenerate total edge length");
    return 100.0 * weighted / total_length;
}

std::vector<double> interior_edge_lengths(const Mesh& mesh, const MeshTopology& topology) {
    std::vector<double> lengths(topology.n_edges(), 0.0);
    for (int e = 0; e < topology.n_edges(); ++e) {
        lengths[e] = norm(mesh.vertices[topology.edge_vertices[e][1]] -
                          mesh.vertices[topology.edge_vertices[e][0]]);
    }
    return lengths;
}

}  // namespace pdmesh
