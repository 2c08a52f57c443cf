#pragma once

#include <array>
#include <string>
#include <vector>

#include "pdmesh/geometry.hpp"

namespace pdmesh {

// Relative area threshold below which a face counts as degenerate:
// area < kDegenerateAreaEps * (bounding-box diagonal)^2.
constexpr double kDegenerateAreaEps = 1e-10;

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::string name;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }
};

// Loads a triangles-only Wavefront OBJ. Supported records: `v x y z` and
// `f a b c` (with optional /texture/normal suffixes, which are ignored).
// Throws std::runtime_error on malformed lines, non-triangular faces,
// out-of-range indices, duplicate faces, or an empty mesh.
Mesh load_obj(const std::string& path);

void save_obj(const Mesh& mesh, const std::string& path);

// Checks the structural mesh invariants (index range, distinct corners,
// no two faces over the same vertex set). Throws on violation.
void validate_mesh(const Mesh& mesh);

// Per-face areas via the cross-product formula; always >= 0.
std::vector<double> face_areas(const Mesh& mesh);

double bounding_box_diagonal(const Mesh& mesh);

// Faces whose area falls under the degeneracy threshold.
std::vector<bool> degenerate_faces(const Mesh& mesh, const std::vector<double>& areas);

// Unnormalized face normal from the stored winding.
Vec3 face_normal(const Mesh& mesh, int face);

}  // namespace pdmesh
