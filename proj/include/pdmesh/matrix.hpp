#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdmesh {

// Dense row-major matrix of doubles. Plain storage; the differentiable
// wrapper lives in tensor.hpp.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline std::string shape_str(std::size_t rows, std::size_t cols) {
    return "[" + std::to_string(rows) + " x " + std::to_string(cols) + "]";
}

}  // namespace pdmesh
