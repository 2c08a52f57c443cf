#include "pdmesh/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdmesh {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    return s;
}

void put_double(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(os, bits);
}

double get_double(std::istream& is) {
    const std::uint64_t bits = get_u64(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void put_matrix(std::ostream& os, const Matrix& m) {
    put_u32(os, static_cast<std::uint32_t>(m.rows));
    put_u32(os, static_cast<std::uint32_t>(m.cols));
    for (double v : m.data) put_double(os, v);
}

Matrix get_matrix(std::istream& is) {
    const std::uint32_t rows = get_u32(is), cols = get_u32(is);
    Matrix m(rows, cols);
    for (double& v : m.data) v = get_double(is);
    return m;
}

void put_named_matrices(std::ostream& os,
                        const std::vector<std::pair<std::string, Matrix>>& items) {
    put_u32(os, static_cast<std::uint32_t>(items.size()));
    for (const auto& [name, m] : items) {
        put_string(os, name);
        put_matrix(os, m);
    }
}

std::vector<std::pair<std::string, Matrix>> get_named_matrices(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    std::vector<std::pair<std::string, Matrix>> items;
    items.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = get_string(is);
        items.emplace_back(std::move(name), get_matrix(is));
    }
    return items;
}

void put_section(std::ostream& os, const std::string& name, const std::string& payload) {
    put_string(os, name);
    put_u64(os, payload.size());
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

constexpr char kMagic[4] = {'P', 'D', 'M', 'C'};

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));

    {
        put_section(out, "arch", arch.serialize());
    }
    {
        std::ostringstream os(std::ios::binary);
        put_named_matrices(os, params);
        put_section(out, "params", os.str());
    }
    {
        std::ostringstream os(std::ios::binary);
        put_named_matrices(os, buffers);
        put_section(out, "buffers", os.str());
    }
    {
        std::ostringstream os(std::ios::binary);
        put_u64(os, static_cast<std::uint64_t>(adam_t));
        put_u32(os, static_cast<std::uint32_t>(adam_m.size()));
        for (const auto& m : adam_m) put_matrix(os, m);
        for (const auto& v : adam_v) put_matrix(os, v);
        put_section(out, "adam", os.str());
    }
    put_section(out, "config", config_echo);
    put_section(out, "rng", rng_state);
    {
        std::ostringstream os(std::ios::binary);
        put_u32(os, static_cast<std::uint32_t>(epochs_done));
        put_section(out, "progress", os.str());
    }
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    const int version = in.get();
    if (version != kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ck;
    while (true) {
        std::string name;
        {
            const std::uint32_t probe = get_u32(in);
            if (!in) break;
            name.resize(probe);
            in.read(name.data(), probe);
        }
        const std::uint64_t len = get_u64(in);
        std::string payload(len, '\0');
        in.read(payload.data(), static_cast<std::streamsize>(len));
        if (!in) throw std::runtime_error("truncated checkpoint section: " + name);
        std::istringstream ps(payload, std::ios::binary);
        if (name == "arch") {
            ck.arch = ArchitectureSpec::deserialize(payload);
        } else if (name == "params") {
            ck.params = get_named_matrices(ps);
        } else if (name == "buffers") {
            ck.buffers = get_named_matrices(ps);
        } else if (name == "adam") {
            ck.adam_t = static_cast<long>(get_u64(ps));
            const std::uint32_t n = get_u32(ps);
            for (std::uint32_t i = 0; i < n; ++i) ck.adam_m.push_back(get_matrix(ps));
            for (std::uint32_t i = 0; i < n; ++i) ck.adam_v.push_back(get_matrix(ps));
        } else if (name == "config") {
            ck.config_echo = payload;
        } else if (name == "rng") {
            ck.rng_state = payload;
        } else if (name == "progress") {
            ck.epochs_done = static_cast<int>(get_u32(ps));
        } else {
            throw std::runtime_error("unknown checkpoint section: " + name);
        }
    }
    return ck;
}

Checkpoint Checkpoint::capture(const Net& net, const Adam* optimizer, const Rng* rng,
                               const std::string& config_echo, int epochs_done) {
    Checkpoint ck;
    ck.arch = net.spec();
    for (const auto& [name, tensor] : net.params().items()) {
        ck.params.emplace_back(name, tensor.value());
    }
    for (const auto& [name, buffer] : net.buffers().items()) {
        ck.buffers.emplace_back(name, *buffer);
    }
    if (optimizer != nullptr) {
        ck.adam_m = optimizer->moment1();
        ck.adam_v = optimizer->moment2();
        ck.adam_t = optimizer->step_count();
    }
    if (rng != nullptr) ck.rng_state = rng->state();
    ck.config_echo = config_echo;
    ck.epochs_done = epochs_done;
    return ck;
}

void Checkpoint::restore(Net& net, Adam* optimizer, Rng* rng) const {
    const auto& items = net.params().items();
    if (items.size() != params.size()) {
        throw std::runtime_error("checkpoint parameter count " + std::to_string(params.size()) +
                                 " does not match model (" + std::to_string(items.size()) + ")");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].first != params[i].first) {
            throw std::runtime_error("checkpoint parameter '" + params[i].first +
                                     "' does not match model parameter '" + items[i].first +
                                     "'");
        }
        Tensor t = items[i].second;
        if (!t.value().same_shape(params[i].second)) {
            throw std::runtime_error("shape mismatch for parameter '" + params[i].first + "'");
        }
        t.raw_value() = params[i].second;
    }
    for (const auto& [name, value] : buffers) {
        auto ptr = net.buffers().find(name);
        if (!ptr) throw std::runtime_error("checkpoint buffer '" + name + "' not in model");
        *ptr = value;
    }
    if (optimizer != nullptr && !adam_m.empty()) {
        optimizer->set_state(adam_m, adam_v, adam_t);
    }
    if (rng != nullptr && !rng_state.empty()) rng->set_state(rng_state);
}

}  // namespace pdmesh
