#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pdmesh/matrix.hpp"
#include "pdmesh/rng.hpp"

namespace pdmesh {

// Dense 2-D array participating in a recorded computation. Copying a Tensor
// copies a handle to the shared node, not the data. Every operation below
// records its adjoint so that backward() on a scalar result fills the
// gradients of all contributing parameters.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Matrix value);
    static Tensor parameter(Matrix value);
    static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const;
    std::size_t cols() const;
    const Matrix& value() const;
    // Direct in-place access for optimizers; bypasses recording.
    Matrix& raw_value();
    const Matrix& grad() const;
    bool requires_grad() const;

    void zero_grad();
    // Reverse-mode accumulation from a 1x1 result. Throws when called on a
    // non-scalar, on a tensor detached from any recorded computation, or a
    // second time on the same recorded result.
    void backward() const;
    Tensor detach() const;
    double item() const;

    struct Node;
    const std::shared_ptr<Node>& node() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;

    friend Tensor make_op(Matrix value, std::vector<Tensor> parents,
                          std::function<void(Node&)> backprop);
};

// --- core ops -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// x (N x C) plus a 1 x C bias row broadcast over rows.
Tensor add_row_broadcast(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& a, double s);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& x, std::size_t from, std::size_t to);
Tensor gather_rows(const Tensor& x, const std::vector<int>& indices);
Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor exp(const Tensor& x);
// x (N x C) scaled per row by s (N x 1).
Tensor row_scale(const Tensor& x, const Tensor& s);
Tensor sum_all(const Tensor& x);
Tensor mean_rows(const Tensor& x);

// --- graph segment ops ------------------------------------------------------

// Per-segment softmax of scores (N x 1); segment ids must lie in
// [0, n_segments). Max-subtracted for stability; empty segments are valid.
Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segments, int n_segments);
// Sums rows of x into targets; missing targets give zero rows.
Tensor segment_sum(const Tensor& x, const std::vector<int>& segments, int n_targets);

// --- normalization and loss -------------------------------------------------

// Per-row group normalization over channel groups, then affine (gain, bias
// are 1 x C). C must be divisible by groups.
Tensor group_normalize(const Tensor& x, int groups, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);

// Batch normalization over rows. In training mode uses batch statistics and
// updates the running buffers in place; in inference mode normalizes with
// the running statistics.
Tensor batch_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  Matrix& running_mean, Matrix& running_var, double momentum, bool training,
                  double eps = 1e-3);

// Mean over rows of -log softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// --- optimizer ---------------------------------------------------------------

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One bias-corrected update; m/v carry first/second moment state and t is
// the step count after this update.
void adam_step(Matrix& value, const Matrix& grad, Matrix& m, Matrix& v, long t,
               const AdamParams& hp);

class Adam {
public:
    explicit Adam(AdamParams hp) : hp_(hp) {}

    void step(const std::vector<Tensor>& params);
    void zero_grad(const std::vector<Tensor>& params);

    long step_count() const { return t_; }
    const AdamParams& hyper() const { return hp_; }

    const std::vector<Matrix>& moment1() const { return m_; }
    const std::vector<Matrix>& moment2() const { return v_; }
    void set_state(std::vector<Matrix> m, std::vector<Matrix> v, long t);

private:
    AdamParams hp_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
};

// --- verification oracle ------------------------------------------------------

struct GradcheckResult {
    double max_rel_err = 0.0;
    int coords_checked = 0;
};

// Central finite differences against the recorded gradients, on a random
// subsample of at most max_coords parameter coordinates. `forward` must be a
// deterministic function of the parameter values returning a scalar tensor.
// Per coordinate the error is |fd - grad| / max(|fd|, |grad|, denom_floor);
// the floor turns the comparison absolute for near-zero pairs, where central
// differences carry only forward-evaluation rounding noise.
GradcheckResult finite_diff_gradcheck(const std::function<Tensor()>& forward,
                                      const std::vector<Tensor>& params, double eps = 1e-5,
                                      int max_coords = 200, Rng* rng = nullptr,
                                      double denom_floor = 1e-4);

// Named parameter registry in insertion order (checkpoint layout depends on
// this order being construction-deterministic).
class ParamStore {
public:
    Tensor add(const std::string& name, Tensor t);
    const Tensor* find(const std::string& name) const;
    std::vector<Tensor> tensors() const;
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::size_t total_size() const;

private:
    std::vector<std::pair<std::string, Tensor>> items_;
};

}  // namespace pdmesh
