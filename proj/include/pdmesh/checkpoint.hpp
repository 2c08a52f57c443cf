#pragma once

#include <string>
#include <vector>

#include "pdmesh/model.hpp"
#include "pdmesh/tensor.hpp"
#include "pdmesh/train.hpp"

namespace pdmesh {

// Single-file container: magic, version byte, then length-prefixed named
// sections with little-endian integers and 8-byte doubles. Save -> load ->
// save is byte-identical.
struct Checkpoint {
    static constexpr std::uint8_t kVersion = 1;

    ArchitectureSpec arch;
    std::vector<std::pair<std::string, Matrix>> params;
    std::vector<std::pair<std::string, Matrix>> buffers;
    std::vector<Matrix> adam_m, adam_v;
    long adam_t = 0;
    std::string config_echo;
    std::string rng_state;
    int epochs_done = 0;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    static Checkpoint capture(const Net& net, const Adam* optimizer, const Rng* rng,
                              const std::string& config_echo, int epochs_done);

    // Restores parameters and buffers into a net built from `arch`;
    // optionally restores optimizer moments and RNG state.
    void restore(Net& net, Adam* optimizer, Rng* rng) const;
};

}  // namespace pdmesh
