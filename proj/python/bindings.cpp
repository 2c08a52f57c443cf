#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pdmesh/checkpoint.hpp"
#include "pdmesh/edge_geometry.hpp"
#include "pdmesh/metrics.hpp"
#include "pdmesh/shapes.hpp"
#include "pdmesh/synth.hpp"
#include "pdmesh/train.hpp"

namespace py = pybind11;
using namespace pdmesh;

namespace {

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

Mesh mesh_from_arrays(const std::vector<std::array<double, 3>>& vertices,
                      const std::vector<std::array<int, 3>>& faces, const std::string& name) {
    Mesh mesh;
    mesh.name = name;
    for (const auto& v : vertices) mesh.vertices.push_back({v[0], v[1], v[2]});
    mesh.faces = faces;
    validate_mesh(mesh);
    return mesh;
}

py::dict manifold_report_dict(const Mesh& mesh) {
    const MeshTopology topo = build_topology(mesh);
    const ManifoldReport report = check_edge_manifold(topo);
    py::dict out;
    out["edge_manifold"] = report.edge_manifold;
    out["watertight"] = report.watertight;
    py::list offending;
    for (int e : report.offending_edges) {
        py::dict entry;
        entry["edge"] = e;
        entry["vertices"] = py::make_tuple(topo.edge_vertices[e][0], topo.edge_vertices[e][1]);
        entry["incident_faces"] = topo.edge_faces[e];
        offending.append(entry);
    }
    out["offending_edges"] = offending;
    return out;
}

py::dict verify_theorem_dict(const Mesh& mesh) {
    const auto report = verify_medial_line_equivalence(mesh, build_topology(mesh));
    py::dict out;
    out["precondition_ok"] = report.precondition_ok;
    out["pass"] = report.pass;
    out["detail"] = report.detail;
    return out;
}

TrainConfig config_from_kwargs(const py::kwargs& kwargs) {
    TrainConfig config;
    for (auto item : kwargs) {
        const std::string key = py::cast<std::string>(item.first);
        const std::string value = py::cast<std::string>(py::str(item.second));
        apply_config_override(config, key, value);
    }
    config.apply_defaults();
    return config;
}

py::dict metrics_dict(const EvalMetrics& metrics) {
    py::dict out;
    if (metrics.classification_accuracy) out["accuracy"] = *metrics.classification_accuracy;
    if (metrics.face_accuracy) out["face_accuracy"] = *metrics.face_accuracy;
    if (metrics.edge_accuracy_hard) out["edge_accuracy_hard"] = *metrics.edge_accuracy_hard;
    if (metrics.edge_accuracy_soft) out["edge_accuracy_soft"] = *metrics.edge_accuracy_soft;
    return out;
}

PreparedDataset prepare_any(const std::string& root, Task task, DualConfig config,
                            int classes) {
    if (task == Task::Classification) {
        return prepare_classification(load_classification_dataset(root), config);
    }
    auto prepared = prepare_segmentation(load_segmentation_dataset(root), config, classes);
    prepared.task = task;
    return prepared;
}

py::dict train_model(const std::string& dataset_root, const std::string& out_checkpoint,
                     const py::kwargs& kwargs) {
    TrainConfig config = config_from_kwargs(kwargs);
    PreparedDataset dataset =
        prepare_any(dataset_root, config.task, config.dual_config, config.classes);
    if (config.classes == 0) config.classes = dataset.classes;

    auto net = build_net(config.architecture(), config.seed);
    Adam optimizer(AdamParams{config.lr, 0.9, 0.999, 1e-8});
    Rng rng(config.seed);
    std::vector<double> losses;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        losses.push_back(train_epoch(*net, dataset, optimizer, rng, config.batch).mean_loss);
    }
    Checkpoint::capture(*net, &optimizer, &rng, train_config_echo(config), config.epochs)
        .save(out_checkpoint);

    py::dict out = metrics_dict(evaluate(*net, dataset));
    out["losses"] = losses;
    out["checkpoint"] = out_checkpoint;
    return out;
}

py::dict evaluate_checkpoint(const std::string& checkpoint_path,
                             const std::string& dataset_root) {
    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    auto net = build_net(ck.arch, 0);
    ck.restore(*net, nullptr, nullptr);
    PreparedDataset dataset =
        prepare_any(dataset_root, ck.arch.task, ck.arch.dual_config, ck.arch.classes);
    return metrics_dict(evaluate(*net, dataset));
}

}  // namespace

PYBIND11_MODULE(_pdmesh, m) {
    m.doc() = "Primal-dual graph networks on triangle meshes";

    py::class_<Mesh>(m, "Mesh")
        .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("faces"),
             py::arg("name") = "mesh")
        .def_property_readonly("n_vertices", &Mesh::n_vertices)
        .def_property_readonly("n_faces", &Mesh::n_faces)
        .def_readonly("name", &Mesh::name)
        .def_property_readonly("vertices",
                               [](const Mesh& mesh) {
                                   std::vector<std::array<double, 3>> out;
                                   for (const auto& v : mesh.vertices) {
                                       out.push_back({v.x, v.y, v.z});
                                   }
                                   return out;
                               })
        .def_readonly("faces", &Mesh::faces)
        .def("__repr__", [](const Mesh& mesh) {
            return "<Mesh '" + mesh.name + "' V=" + std::to_string(mesh.n_vertices()) +
                   " F=" + std::to_string(mesh.n_faces()) + ">";
        });

    m.def("load_obj", &load_obj, py::arg("path"));
    m.def("save_obj", &save_obj, py::arg("mesh"), py::arg("path"));
    m.def("manifold_report", &manifold_report_dict, py::arg("mesh"));
    m.def("verify_medial_line_equivalence", &verify_theorem_dict, py::arg("mesh"));
    m.def(
        "dihedral_angles",
        [](const Mesh& mesh) { return dihedral_angles(mesh, build_topology(mesh)); },
        py::arg("mesh"), "Per-edge dihedral angles (NaN on boundary edges)");
    m.def(
        "edge_count",
        [](const Mesh& mesh) { return build_topology(mesh).n_edges(); },
        py::arg("mesh"));

    py::class_<GraphPair>(m, "GraphPair")
        .def_property_readonly("primal_nodes",
                               [](const GraphPair& p) { return p.primal.n_nodes; })
        .def_property_readonly("primal_edges", [](const GraphPair& p) { return p.primal.edges; })
        .def_property_readonly("dual_nodes",
                               [](const GraphPair& p) { return p.dual.n_nodes(); })
        .def_property_readonly("dual_arcs", [](const GraphPair& p) { return p.dual.arcs; })
        .def_property_readonly("dual_node_keys",
                               [](const GraphPair& p) { return p.dual.node_keys; })
        .def_property_readonly(
            "primal_features",
            [](const GraphPair& p) { return matrix_to_numpy(p.primal.features); })
        .def_property_readonly(
            "dual_features",
            [](const GraphPair& p) { return matrix_to_numpy(p.dual.features); })
        .def_property_readonly("config",
                               [](const GraphPair& p) { return to_string(p.dual.config); })
        .def("to_json", &graph_pair_to_json);

    m.def(
        "build_graph_pair",
        [](const Mesh& mesh, const std::string& config) {
            return build_graph_pair(mesh, build_topology(mesh),
                                    dual_config_from_string(config));
        },
        py::arg("mesh"), py::arg("config") = "A");

    auto shapes_mod = m.def_submodule("shapes", "Procedural test meshes");
    shapes_mod.def("tetrahedron", &shapes::tetrahedron);
    shapes_mod.def("cube", &shapes::cube, py::arg("n") = 1);
    shapes_mod.def("octahedron", &shapes::octahedron);
    shapes_mod.def("icosahedron", &shapes::icosahedron);
    shapes_mod.def("icosphere", &shapes::icosphere, py::arg("level"));
    shapes_mod.def("torus", &shapes::torus, py::arg("nu"), py::arg("nv"),
                   py::arg("major") = 1.0, py::arg("minor") = 0.3);
    shapes_mod.def("closed_fan", &shapes::closed_fan, py::arg("n"));
    shapes_mod.def("strip", &shapes::strip, py::arg("n"));
    shapes_mod.def(
        "random_convex_hull",
        [](int n, std::uint64_t seed) {
            Rng rng(seed);
            return shapes::random_convex_hull(n, rng);
        },
        py::arg("n"), py::arg("seed") = 0);
    shapes_mod.def(
        "jitter",
        [](const Mesh& mesh, std::uint64_t seed, double amount) {
            Rng rng(seed);
            return shapes::jitter_along_edges(mesh, rng, amount);
        },
        py::arg("mesh"), py::arg("seed"), py::arg("amount") = 0.3);

    auto synth_mod = m.def_submodule("synth", "Synthetic dataset generators");
    synth_mod.def(
        "write_two_class_classification",
        [](const std::string& root, int per_class, std::uint64_t seed) {
            synth::write_classification_dataset(
                synth::two_class_classification(per_class, seed), root);
        },
        py::arg("root"), py::arg("per_class") = 8, py::arg("seed") = 7);
    synth_mod.def(
        "write_two_region_segmentation",
        [](const std::string& root, std::uint64_t seed) {
            synth::write_segmentation_sample(synth::two_region_segmentation(seed), root);
        },
        py::arg("root"), py::arg("seed") = 7);

    m.def("train", &train_model, py::arg("dataset_root"), py::arg("out_checkpoint"),
          "Train a model; keyword arguments mirror the training config keys "
          "(task, classes, heads, base_width, lr, epochs, batch, seed, ...)");
    m.def("evaluate", &evaluate_checkpoint, py::arg("checkpoint"), py::arg("dataset_root"));
}
