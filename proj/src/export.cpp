#include "pdmesh/export.hpp"

#include <fstream>
#include <stdexcept>

namespace pdmesh {

std::array<std::uint8_t, 3> palette_color(std::uint64_t id) {
    std::uint64_t z = id + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    auto channel = [&](int shift) {
        return static_cast<std::uint8_t>(64 + ((z >> shift) & 0xff) * 3 / 4);
    };
    return {channel(0), channel(8), channel(16)};
}

void write_ply_face_colors(const Mesh& mesh,
                           const std::vector<std::array<std::uint8_t, 3>>& face_colors,
                           const std::string& path) {
    if (face_colors.size() != mesh.faces.size()) {
        throw std::invalid_argument("color count does not match face count");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write PLY file: " + path);
    out.precision(17);
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.n_vertices() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << mesh.n_faces() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    for (const auto& v : mesh.vertices) {
        out << v.x << " " << v.y << " " << v.z << "\n";
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        const auto& c = face_colors[f];
        out << "3 " << face[0] << " " << face[1] << " " << face[2] << " "
            << static_cast<int>(c[0]) << " " << static_cast<int>(c[1]) << " "
            << static_cast<int>(c[2]) << "\n";
    }
}

}  // namespace pdmesh
