#include "pdmesh/synth.hpp"

#include <filesystem>
#include <fstream>

#include "pdmesh/shapes.hpp"

namespace fs = std::filesystem;

namespace pdmesh::synth {

ClassificationDataset two_class_classification(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    ClassificationDataset ds;
    ds.class_names = {"box", "sphere"};
    const Mesh sphere = shapes::icosphere(2);  // 320 faces
    const Mesh box = shapes::cube(5);          // 300 faces
    for (int i = 0; i < per_class; ++i) {
        ds.meshes.push_back(shapes::jitter_along_edges(box, rng, 0.25));
        ds.labels.push_back(0);
        ds.sample_names.push_back("box" + std::to_string(i));
    }
    for (int i = 0; i < per_class; ++i) {
        ds.meshes.push_back(shapes::jitter_along_edges(sphere, rng, 0.25));
        ds.labels.push_back(1);
        ds.sample_names.push_back("sphere" + std::to_string(i));
    }
    return ds;
}

ClassificationDataset balanced_classification(int classes, int per_class, std::uint64_t seed) {
    Rng rng(seed);
    ClassificationDataset ds;
    const Mesh base = shapes::icosphere(1);  // 80 faces
    for (int c = 0; c < classes; ++c) {
        ds.class_names.push_back("class" + std::to_string(c));
        for (int i = 0; i < per_class; ++i) {
            ds.meshes.push_back(shapes::jitter_along_edges(base, rng, 0.3));
            ds.labels.push_back(c);
            ds.sample_names.push_back("c" + std::to_string(c) + "s" + std::to_string(i));
        }
    }
    return ds;
}

SegmentationSample two_region_segmentation(std::uint64_t seed) {
    (void)seed;
    SegmentationSample s;
    const int nu = 25, nv = 10;
    s.mesh = shapes::torus(nu, nv);  // 500 faces, 750 edges
    s.name = "torus500";
    // Corrugate the vertex columns 1..11 radially. Region 1 is exactly the
    // band of faces touching a corrugated vertex (quad columns 0..11), so
    // the labels are recoverable from the local dihedral signature; a plain
    // half/half split of a symmetric mesh would not be.
    auto corrugated_column = [](int i) { return i >= 1 && i <= 11; };
    for (int i = 0; i < nu; ++i) {
        if (!corrugated_column(i)) continue;
        for (int j = 0; j < nv; ++j) {
            Vec3& p = s.mesh.vertices[i * nv + j];
            const Vec3 ring_center = normalized({p.x, p.y, 0.0});
            const Vec3 radial = normalized(p - ring_center);
            p = p + radial * (((i + j) % 2 == 0) ? 0.08 : -0.08);
        }
    }
    s.face_labels.resize(s.mesh.n_faces());
    for (int f = 0; f < s.mesh.n_faces(); ++f) {
        const int quad_column = f / (2 * nv);  // faces come two per grid quad
        s.face_labels[f] = quad_column <= 11 ? 1 : 0;
    }
    const MeshTopology topo = build_topology(s.mesh);
    s.edge_labels.resize(topo.n_edges());
    for (int e = 0; e < topo.n_edges(); ++e) {
        const int ca = topo.edge_vertices[e][0] / nv;
        const int cb = topo.edge_vertices[e][1] / nv;
        s.edge_labels[e] = corrugated_column(ca) || corrugated_column(cb) ? 1 : 0;
    }
    return s;
}

void write_classification_dataset(const ClassificationDataset& dataset,
                                  const std::string& root) {
    for (std::size_t i = 0; i < dataset.meshes.size(); ++i) {
        const fs::path dir = fs::path(root) / dataset.class_names[dataset.labels[i]];
        fs::create_directories(dir);
        save_obj(dataset.meshes[i], (dir / (dataset.sample_names[i] + ".obj")).string());
    }
}

void write_segmentation_sample(const SegmentationSample& sample, const std::string& root) {
    fs::create_directories(root);
    const fs::path base = fs::path(root) / sample.name;
    save_obj(sample.mesh, base.string() + ".obj");
    {
        std::ofstream f(base.string() + ".faces.txt");
        for (int l : sample.face_labels) f << l << "\n";
    }
    if (!sample.edge_labels.empty()) {
        std::ofstream f(base.string() + ".edges.txt");
        for (int l : sample.edge_labels) f << l << "\n";
    }
    if (!sample.soft_labels.empty()) {
        std::ofstream f(base.string() + ".soft.txt");
        for (const auto& p : sample.soft_labels) f << p[0] << " " << p[1] << "\n";
    }
}

}  // namespace pdmesh::synth
