#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pdmesh/mesh.hpp"

namespace pdmesh {

// Deterministic color from an integer id (splitmix64 bit mix, biased away
// from very dark values).
std::array<std::uint8_t, 3> palette_color(std::uint64_t id);

// ASCII PLY with one RGB color per face (OBJ has no standard face colors).
void write_ply_face_colors(const Mesh& mesh,
                           const std::vector<std::array<std::uint8_t, 3>>& face_colors,
                           const std::string& path);

}  // namespace pdmesh
