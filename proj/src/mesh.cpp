#include "pdmesh/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pdmesh/util.hpp"

namespace pdmesh {

namespace {

// `f` corner tokens may look like "3", "3/1", "3//2", "3/1/2"; only the
// vertex index matters here.
int parse_face_corner(const std::string& token, int n_vertices, int line_no) {
    std::string head = token.substr(0, token.find('/'));
    int idx = 0;
    try {
        idx = std::stoi(head);
    } catch (const std::exception&) {
        throw std::runtime_error("obj parse error at line " + std::to_string(line_no) +
                                 ": bad face index '" + token + "'");
    }
    if (idx <= 0 || idx > n_vertices) {
        throw std::runtime_error("obj parse error at line " + std::to_string(line_no) +
                                 ": face index " + std::to_string(idx) + " out of range");
    }
    return idx - 1;
}

}  // namespace

Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file: " + path);

    Mesh mesh;
    mesh.name = path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) {
                throw std::runtime_error("obj parse error at line " + std::to_string(line_no) +
                                         ": malformed vertex record");
            }
            mesh.vertices.push_back({x, y, z});
        } else if (tag == "f") {
            std::vector<std::string> corners;
            std::string tok;
            while (ls >> tok) corners.push_back(tok);
            if (corners.size() != 3) {
                throw std::runtime_error("obj parse error at line " + std::to_string(line_no) +
                                         ": non-triangular face with " +
                                         std::to_string(corners.size()) + " corners");
            }
            std::array<int, 3> f;
            for (int k = 0; k < 3; ++k) {
                f[k] = parse_face_corner(corners[k], mesh.n_vertices(), line_no);
            }
            mesh.faces.push_back(f);
        }
        // vn/vt/o/g/s/usemtl/mtllib/# records are ignored
    }
    if (mesh.faces.empty() || mesh.vertices.empty()) {
        throw std::runtime_error("empty mesh: " + path);
    }
    validate_mesh(mesh);
    return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write mesh file: " + path);
    out.precision(17);
    for (const auto& v : mesh.vertices) {
        out << "v " << v.x << " " << v.y << " " << v.z << "\n";
    }
    for (const auto& f : mesh.faces) {
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    }
}

void validate_mesh(const Mesh& mesh) {
    const int nv = mesh.n_vertices();
    std::set<std::array<int, 3>> seen;
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const auto& f = mesh.faces[i];
        for (int k = 0; k < 3; ++k) {
            if (f[k] < 0 || f[k] >= nv) {
                throw std::runtime_error("face " + std::to_string(i) + " references vertex " +
                                         std::to_string(f[k]) + " outside [0, " +
                                         std::to_string(nv) + ")");
            }
        }
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            throw std::runtime_error("face " + std::to_string(i) +
                                     " has repeated vertex indices");
        }
        std::array<int, 3> key = f;
        std::sort(key.begin(), key.end());
        if (!seen.insert(key).second) {
            throw std::runtime_error("duplicate face over vertex set at face " +
                                     std::to_string(i));
        }
    }
}

std::vector<double> face_areas(const Mesh& mesh) {
    std::vector<double> areas(mesh.faces.size(), 0.0);
    parallel_for(mesh.faces.size(), [&](std::size_t i) {
        const auto& f = mesh.faces[i];
        const Vec3 e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        const Vec3 e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        areas[i] = 0.5 * norm(cross(e1, e2));
    });
    return areas;
}

double bounding_box_diagonal(const Mesh& mesh) {
    if (mesh.vertices.empty()) return 0.0;
    Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
    for (const auto& v : mesh.vertices) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        lo.z = std::min(lo.z, v.z);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
        hi.z = std::max(hi.z, v.z);
    }
    return norm(hi - lo);
}

std::vector<bool> degenerate_faces(const Mesh& mesh, const std::vector<double>& areas) {
    const double diag = bounding_box_diagonal(mesh);
    const double threshold = kDegenerateAreaEps * diag * diag;
    std::vector<bool> flags(areas.size(), false);
    for (std::size_t i = 0; i < areas.size(); ++i) {
        flags[i] = areas[i] < threshold;
    }
    return flags;
}

Vec3 face_normal(const Mesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    return cross(mesh.vertices[f[1]] - mesh.vertices[f[0]],
                 mesh.vertices[f[2]] - mesh.vertices[f[0]]);
}

}  // namespace pdmesh
