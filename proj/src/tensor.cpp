#include "pdmesh/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace pdmesh {

struct Tensor::Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool backward_done = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;

    void ensure_grad() {
        if (grad.rows != value.rows || grad.cols != value.cols) {
            grad = Matrix(value.rows, value.cols, 0.0);
        }
    }
};

namespace {

void check(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

}  // namespace

Tensor make_op(Matrix value, std::vector<Tensor> parents,
               std::function<void(Tensor::Node&)> backprop) {
    auto node = std::make_shared<Tensor::Node>();
    node->value = std::move(value);
    for (const auto& p : parents) {
        if (p.node()->requires_grad) node->requires_grad = true;
    }
    if (node->requires_grad) {
        for (auto& p : parents) node->parents.push_back(p.node());
        node->backprop = std::move(backprop);
    }
    return Tensor(std::move(node));
}

Tensor Tensor::constant(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
    return requires_grad ? parameter(Matrix(rows, cols)) : constant(Matrix(rows, cols));
}

std::size_t Tensor::rows() const { return node_->value.rows; }
std::size_t Tensor::cols() const { return node_->value.cols; }
const Matrix& Tensor::value() const { return node_->value; }
Matrix& Tensor::raw_value() { return node_->value; }

const Matrix& Tensor::grad() const {
    check(node_ != nullptr, "grad() on an empty tensor");
    check(node_->grad.rows == node_->value.rows && node_->grad.cols == node_->value.cols,
          "gradient not populated; run backward() first");
    return node_->grad;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::zero_grad() {
    if (!node_) return;
    node_->grad = Matrix(node_->value.rows, node_->value.cols, 0.0);
}

Tensor Tensor::detach() const { return constant(node_->value); }

double Tensor::item() const {
    check(node_ && node_->value.size() == 1, "item() requires a 1x1 tensor");
    return node_->value.data[0];
}

void Tensor::backward() const {
    check(node_ != nullptr, "backward() on an empty tensor");
    check(node_->value.rows == 1 && node_->value.cols == 1,
          "backward() requires a scalar (1x1) result, got " +
              shape_str(node_->value.rows, node_->value.cols));
    check(node_->requires_grad && !node_->parents.empty(),
          "backward() on a tensor detached from any recorded computation");
    check(!node_->backward_done, "backward() already ran on this result; rebuild the "
                                 "computation before calling it again");
    node_->backward_done = true;

    // Iterative post-order DFS over the recorded subgraph that requires
    // gradients; children run before parents in the reversed order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto& [cur, next_child] = stack.back();
        if (next_child < cur->parents.size()) {
            Node* parent = cur->parents[next_child++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.push_back({parent, 0});
            }
        } else {
            order.push_back(cur);
            stack.pop_back();
        }
    }

    for (Node* n : order) n->ensure_grad();
    node_->grad.data[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop) n->backprop(*n);
    }
}

// --- op implementations -----------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    check(a.cols() == b.rows(), "matmul shape mismatch: " + shape_str(a.rows(), a.cols()) +
                                    " x " + shape_str(b.rows(), b.cols()));
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(n, m);
    const double* A = a.value().data.data();
    const double* B = b.value().data.data();
    double* C = out.data.data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = A[i * k + p];
            if (av == 0.0) continue;
            const double* brow = B + p * m;
            double* crow = C + i * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
    return make_op(std::move(out), {a, b}, [a, b, n, k, m](Tensor::Node& self) {
        const double* G = self.grad.data.data();
        if (a.node()->requires_grad) {
            a.node()->ensure_grad();
            double* dA = a.node()->grad.data.data();
            const double* B = b.value().data.data();
            // dA = G * B^T
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* grow = G + i * m;
                    const double* brow = B + p * m;
                    for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
                    dA[i * k + p] += acc;
                }
            }
        }
        if (b.node()->requires_grad) {
            b.node()->ensure_grad();
            double* dB = b.node()->grad.data.data();
            const double* A = a.value().data.data();
            // dB = A^T * G
            for (std::size_t i = 0; i < n; ++i) {
                const double* grow = G + i * m;
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = A[i * k + p];
                    if (av == 0.0) continue;
                    double* brow = dB + p * m;
                    for (std::size_t j = 0; j < m; ++j) brow[j] += av * grow[j];
                }
            }
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows() && a.cols() == b.cols(),
          "add shape mismatch: " + shape_str(a.rows(), a.cols()) + " vs " +
              shape_str(b.rows(), b.cols()));
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.value().data[i];
    return make_op(std::move(out), {a, b}, [a, b](Tensor::Node& self) {
        for (const Tensor& t : {a, b}) {
            if (!t.node()->requires_grad) continue;
            t.node()->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                t.node()->grad.data[i] += self.grad.data[i];
            }
        }
    });
}

Tensor add_row_broadcast(const Tensor& x, const Tensor& bias) {
    check(bias.rows() == 1 && bias.cols() == x.cols(),
          "bias must be 1 x " + std::to_string(x.cols()) + ", got " +
              shape_str(bias.rows(), bias.cols()));
    Matrix out = x.value();
    const std::size_t c = x.cols();
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t j = 0; j < c; ++j) out(r, j) += bias.value()(0, j);
    }
    return make_op(std::move(out), {x, bias}, [x, bias, c](Tensor::Node& self) {
        if (x.node()->requires_grad) {
            x.node()->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                x.node()->grad.data[i] += self.grad.data[i];
            }
        }
        if (bias.node()->requires_grad) {
            bias.node()->ensure_grad();
            for (std::size_t r = 0; r < self.grad.rows; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    bias.node()->grad(0, j) += self.grad(r, j);
                }
            }
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    Matrix out = a.value();
    for (double& v : out.data) v *= s;
    return make_op(std::move(out), {a}, [a, s](Tensor::Node& self) {
        a.node()->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            a.node()->grad.data[i] += s * self.grad.data[i];
        }
    });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    check(a.cols() == b.cols(), "concat_rows column mismatch: " +
                                    shape_str(a.rows(), a.cols()) + " vs " +
                                    shape_str(b.rows(), b.cols()));
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.value().data.begin(), a.value().data.end(), out.data.begin());
    std::copy(b.value().data.begin(), b.value().data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(a.value().size()));
    const std::size_t split = a.value().size();
    return make_op(std::move(out), {a, b}, [a, b, split](Tensor::Node& self) {
        if (a.node()->requires_grad) {
            a.node()->ensure_grad();
            for (std::size_t i = 0; i < split; ++i) {
                a.node()->grad.data[i] += self.grad.data[i];
            }
        }
        if (b.node()->requires_grad) {
            b.node()->ensure_grad();
            for (std::size_t i = split; i < self.grad.size(); ++i) {
                b.node()->grad.data[i - split] += self.grad.data[i];
            }
        }
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    check(a.rows() == b.rows(), "concat_cols row mismatch: " + shape_str(a.rows(), a.cols()) +
                                    " vs " + shape_str(b.rows(), b.cols()));
    const std::size_t ca = a.cols(), cb = b.cols();
    Matrix out(a.rows(), ca + cb);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t j = 0; j < ca; ++j) out(r, j) = a.value()(r, j);
        for (std::size_t j = 0; j < cb; ++j) out(r, ca + j) = b.value()(r, j);
    }
    return make_op(std::move(out), {a, b}, [a, b, ca, cb](Tensor::Node& self) {
        if (a.node()->requires_grad) {
            a.node()->ensure_grad();
            for (std::size_t r = 0; r < self.grad.rows; ++r) {
                for (std::size_t j = 0; j < ca; ++j) {
                    a.node()->grad(r, j) += self.grad(r, j);
                }
            }
        }
        if (b.node()->requires_grad) {
            b.node()->ensure_grad();
            for (std::size_t r = 0; r < self.grad.rows; ++r) {
                for (std::size_t j = 0; j < cb; ++j) {
                    b.node()->grad(r, j) += self.grad(r, ca + j);
                }
            }
        }
    });
}

Tensor slice_cols(const Tensor& x, std::size_t from, std::size_t to) {
    check(from < to && to <= x.cols(), "slice_cols range [" + std::to_string(from) + ", " +
                                           std::to_string(to) + ") out of " +
                                           std::to_string(x.cols()) + " columns");
    Matrix out(x.rows(), to - from);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = from; j < to; ++j) out(r, j - from) = x.value()(r, j);
    }
    return make_op(std::move(out), {x}, [x, from, to](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t r = 0; r < self.grad.rows; ++r) {
            for (std::size_t j = from; j < to; ++j) {
                x.node()->grad(r, j) += self.grad(r, j - from);
            }
        }
    });
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& indices) {
    const std::size_t c = x.cols();
    Matrix out(indices.size(), c);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const int src = indices[r];
        check(src >= 0 && static_cast<std::size_t>(src) < x.rows(),
              "gather_rows index " + std::to_string(src) + " out of " +
                  std::to_string(x.rows()) + " rows");
        for (std::size_t j = 0; j < c; ++j) out(r, j) = x.value()(src, j);
    }
    return make_op(std::move(out), {x}, [x, indices, c](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t r = 0; r < indices.size(); ++r) {
            const std::size_t src = static_cast<std::size_t>(indices[r]);
            for (std::size_t j = 0; j < c; ++j) {
                x.node()->grad(src, j) += self.grad(r, j);
            }
        }
    });
}

Tensor relu(const Tensor& x) {
    Matrix out = x.value();
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return make_op(std::move(out), {x}, [x](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (x.value().data[i] > 0.0) x.node()->grad.data[i] += self.grad.data[i];
        }
    });
}

Tensor leaky_relu(const Tensor& x, double slope) {
    Matrix out = x.value();
    for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    return make_op(std::move(out), {x}, [x, slope](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const double m = x.value().data[i] > 0.0 ? 1.0 : slope;
            x.node()->grad.data[i] += m * self.grad.data[i];
        }
    });
}

Tensor exp(const Tensor& x) {
    Matrix out = x.value();
    for (double& v : out.data) v = std::exp(v);
    return make_op(std::move(out), {x}, [x](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            x.node()->grad.data[i] += self.value.data[i] * self.grad.data[i];
        }
    });
}

Tensor row_scale(const Tensor& x, const Tensor& s) {
    check(s.rows() == x.rows() && s.cols() == 1,
          "row_scale needs scales " + std::to_string(x.rows()) + " x 1, got " +
              shape_str(s.rows(), s.cols()));
    Matrix out = x.value();
    for (std::size_t r = 0; r < out.rows; ++r) {
        const double f = s.value()(r, 0);
        for (std::size_t j = 0; j < out.cols; ++j) out(r, j) *= f;
    }
    return make_op(std::move(out), {x, s}, [x, s](Tensor::Node& self) {
        if (x.node()->requires_grad) {
            x.node()->ensure_grad();
            for (std::size_t r = 0; r < self.grad.rows; ++r) {
                const double f = s.value()(r, 0);
                for (std::size_t j = 0; j < self.grad.cols; ++j) {
                    x.node()->grad(r, j) += f * self.grad(r, j);
                }
            }
        }
        if (s.node()->requires_grad) {
            s.node()->ensure_grad();
            for (std::size_t r = 0; r < self.grad.rows; ++r) {
                double acc = 0.0;
                for (std::size_t j = 0; j < self.grad.cols; ++j) {
                    acc += self.grad(r, j) * x.value()(r, j);
                }
                s.node()->grad(r, 0) += acc;
            }
        }
    });
}

Tensor sum_all(const Tensor& x) {
    Matrix out(1, 1);
    for (double v : x.value().data) out.data[0] += v;
    return make_op(std::move(out), {x}, [x](Tensor::Node& self) {
        x.node()->ensure_grad();
        const double g = self.grad.data[0];
        for (double& d : x.node()->grad.data) d += g;
    });
}

Tensor mean_rows(const Tensor& x) {
    check(x.rows() > 0, "mean_rows on an empty tensor");
    const std::size_t n = x.rows(), c = x.cols();
    Matrix out(1, c);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) out(0, j) += x.value()(r, j);
    }
    for (double& v : out.data) v /= static_cast<double>(n);
    return make_op(std::move(out), {x}, [x, n, c](Tensor::Node& self) {
        x.node()->ensure_grad();
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
                x.node()->grad(r, j) += inv * self.grad(0, j);
            }
        }
    });
}

Tensor segment_softmax(const Tensor& scores, const std::vector<int>& segments, int n_segments) {
    check(scores.cols() == 1, "segment_softmax expects N x 1 scores, got " +
                                  shape_str(scores.rows(), scores.cols()));
    check(segments.size() == scores.rows(),
          "segment id count " + std::to_string(segments.size()) + " != score count " +
              std::to_string(scores.rows()));
    const std::size_t n = scores.rows();
    std::vector<double> seg_max(n_segments, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        check(segments[i] >= 0 && segments[i] < n_segments,
              "segment id " + std::to_string(segments[i]) + " out of range");
        seg_max[segments[i]] = std::max(seg_max[segments[i]], scores.value().data[i]);
    }
    Matrix out(n, 1);
    std::vector<double> seg_sum(n_segments, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.data[i] = std::exp(scores.value().data[i] - seg_max[segments[i]]);
        seg_sum[segments[i]] += out.data[i];
    }
    for (std::size_t i = 0; i < n; ++i) out.data[i] /= seg_sum[segments[i]];
    return make_op(std::move(out), {scores}, [scores, segments, n_segments](Tensor::Node& self) {
        scores.node()->ensure_grad();
        // ds_i = y_i * (g_i - sum_{j in segment} g_j y_j)
        std::vector<double> seg_dot(n_segments, 0.0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            seg_dot[segments[i]] += self.grad.data[i] * self.value.data[i];
        }
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            scores.node()->grad.data[i] +=
                self.value.data[i] * (self.grad.data[i] - seg_dot[segments[i]]);
        }
    });
}

Tensor segment_sum(const Tensor& x, const std::vector<int>& segments, int n_targets) {
    check(segments.size() == x.rows(), "segment id count " + std::to_string(segments.size()) +
                                           " != row count " + std::to_string(x.rows()));
    const std::size_t c = x.cols();
    Matrix out(n_targets, c);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        check(segments[r] >= 0 && segments[r] < n_targets,
              "segment id " + std::to_string(segments[r]) + " out of range");
        for (std::size_t j = 0; j < c; ++j) out(segments[r], j) += x.value()(r, j);
    }
    return make_op(std::move(out), {x}, [x, segments, c](Tensor::Node& self) {
        x.node()->ensure_grad();
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t j = 0; j < c; ++j) {
                x.node()->grad(r, j) += self.grad(segments[r], j);
            }
        }
    });
}

Tensor group_normalize(const Tensor& x, int groups, const Tensor& gain, const Tensor& bias,
                       double eps) {
    const std::size_t c = x.cols();
    check(groups >= 1 && c % static_cast<std::size_t>(groups) == 0,
          "channel count " + std::to_string(c) + " not divisible by " + std::to_string(groups) +
              " groups");
    check(gain.rows() == 1 && gain.cols() == c && bias.rows() == 1 && bias.cols() == c,
          "gain/bias must be 1 x " + std::to_string(c));
    const std::size_t gsize = c / static_cast<std::size_t>(groups);
    const std::size_t n = x.rows();

    Matrix xhat(n, c);
    Matrix istd(n, static_cast<std::size_t>(groups));
    for (std::size_t r = 0; r < n; ++r) {
        for (int g = 0; g < groups; ++g) {
            const std::size_t lo = g * gsize;
            double mean = 0.0;
            for (std::size_t j = 0; j < gsize; ++j) mean += x.value()(r, lo + j);
            mean /= static_cast<double>(gsize);
            double var = 0.0;
            for (std::size_t j = 0; j < gsize; ++j) {
                const double d = x.value()(r, lo + j) - mean;
                var += d * d;
            }
            var /= static_cast<double>(gsize);
            const double is = 1.0 / std::sqrt(var + eps);
            istd(r, g) = is;
            for (std::size_t j = 0; j < gsize; ++j) {
                xhat(r, lo + j) = (x.value()(r, lo + j) - mean) * is;
            }
        }
    }
    Matrix out(n, c);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) {
            out(r, j) = xhat(r, j) * gain.value()(0, j) + bias.value()(0, j);
        }
    }
    return make_op(std::move(out), {x, gain, bias},
                   [x, gain, bias, xhat, istd, groups, gsize](Tensor::Node& self) {
        const std::size_t n = self.grad.rows, c = self.grad.cols;
        if (gain.node()->requires_grad) {
            gain.node()->ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    gain.node()->grad(0, j) += self.grad(r, j) * xhat(r, j);
                }
            }
        }
        if (bias.node()->requires_grad) {
            bias.node()->ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    bias.node()->grad(0, j) += self.grad(r, j);
                }
            }
        }
        if (!x.node()->requires_grad) return;
        x.node()->ensure_grad();
        for (std::size_t r = 0; r < n; ++r) {
            for (int g = 0; g < groups; ++g) {
                const std::size_t lo = g * gsize;
                const double is = istd(r, g);
                const double m = static_cast<double>(gsize);
                double sum_dxh = 0.0, sum_dxh_xhat = 0.0;
                for (std::size_t j = 0; j < gsize; ++j) {
                    const double dxh = self.grad(r, lo + j) * gain.value()(0, lo + j);
                    sum_dxh += dxh;
                    sum_dxh_xhat += dxh * xhat(r, lo + j);
                }
                // dx = istd * (dxh - mean(dxh) - xhat * mean(dxh * xhat))
                for (std::size_t j = 0; j < gsize; ++j) {
                    const double dxh = self.grad(r, lo + j) * gain.value()(0, lo + j);
                    x.node()->grad(r, lo + j) +=
                        is * (dxh - sum_dxh / m - xhat(r, lo + j) * sum_dxh_xhat / m);
                }
            }
        }
    });
}

Tensor batch_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  Matrix& running_mean, Matrix& running_var, double momentum, bool training,
                  double eps) {
    const std::size_t n = x.rows(), c = x.cols();
    check(gain.rows() == 1 && gain.cols() == c && bias.rows() == 1 && bias.cols() == c,
          "gain/bias must be 1 x " + std::to_string(c));
    check(running_mean.cols == c && running_var.cols == c,
          "running statistics have wrong width");

    if (!training) {
        Matrix out(n, c);
        std::vector<double> is(c);
        for (std::size_t j = 0; j < c; ++j) is[j] = 1.0 / std::sqrt(running_var(0, j) + eps);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
                out(r, j) = (x.value()(r, j) - running_mean(0, j)) * is[j] * gain.value()(0, j) +
                            bias.value()(0, j);
            }
        }
        // Inference mode: running statistics are constants.
        Matrix xv = x.value();
        Matrix rm = running_mean;
        return make_op(std::move(out), {x, gain, bias},
                       [x, gain, bias, is, xv, rm](Tensor::Node& self) {
            if (x.node()->requires_grad) {
                x.node()->ensure_grad();
                for (std::size_t r = 0; r < self.grad.rows; ++r) {
                    for (std::size_t j = 0; j < self.grad.cols; ++j) {
                        x.node()->grad(r, j) += self.grad(r, j) * gain.value()(0, j) * is[j];
                    }
                }
            }
            if (gain.node()->requires_grad) {
                gain.node()->ensure_grad();
                for (std::size_t r = 0; r < self.grad.rows; ++r) {
                    for (std::size_t j = 0; j < self.grad.cols; ++j) {
                        gain.node()->grad(0, j) +=
                            self.grad(r, j) * (xv(r, j) - rm(0, j)) * is[j];
                    }
                }
            }
            if (bias.node()->requires_grad) {
                bias.node()->ensure_grad();
                for (std::size_t r = 0; r < self.grad.rows; ++r) {
                    for (std::size_t j = 0; j < self.grad.cols; ++j) {
                        bias.node()->grad(0, j) += self.grad(r, j);
                    }
                }
            }
        });
    }

    check(n >= 1, "batch_norm needs at least one row in training mode");
    Matrix xhat(n, c);
    std::vector<double> istd(c);
    for (std::size_t j = 0; j < c; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += x.value()(r, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = x.value()(r, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);  // biased, matching the normalization
        istd[j] = 1.0 / std::sqrt(var + eps);
        for (std::size_t r = 0; r < n; ++r) xhat(r, j) = (x.value()(r, j) - mean) * istd[j];
        running_mean(0, j) = (1.0 - momentum) * running_mean(0, j) + momentum * mean;
        running_var(0, j) = (1.0 - momentum) * running_var(0, j) + momentum * var;
    }
    Matrix out(n, c);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) {
            out(r, j) = xhat(r, j) * gain.value()(0, j) + bias.value()(0, j);
        }
    }
    return make_op(std::move(out), {x, gain, bias},
                   [x, gain, bias, xhat, istd](Tensor::Node& self) {
        const std::size_t n = self.grad.rows, c = self.grad.cols;
        if (gain.node()->requires_grad) {
            gain.node()->ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    gain.node()->grad(0, j) += self.grad(r, j) * xhat(r, j);
                }
            }
        }
        if (bias.node()->requires_grad) {
            bias.node()->ensure_grad();
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t j = 0; j < c; ++j) {
                    bias.node()->grad(0, j) += self.grad(r, j);
                }
            }
        }
        if (!x.node()->requires_grad) return;
        x.node()->ensure_grad();
        const double m = static_cast<double>(n);
        for (std::size_t j = 0; j < c; ++j) {
            double sum_dxh = 0.0, sum_dxh_xhat = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double dxh = self.grad(r, j) * gain.value()(0, j);
                sum_dxh += dxh;
                sum_dxh_xhat += dxh * xhat(r, j);
            }
            for (std::size_t r = 0; r < n; ++r) {
                const double dxh = self.grad(r, j) * gain.value()(0, j);
                x.node()->grad(r, j) +=
                    istd[j] * (dxh - sum_dxh / m - xhat(r, j) * sum_dxh_xhat / m);
            }
        }
    });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows(), c = logits.cols();
    check(labels.size() == n, "label count " + std::to_string(labels.size()) +
                                  " != row count " + std::to_string(n));
    Matrix softmax(n, c);
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const int y = labels[r];
        check(y >= 0 && static_cast<std::size_t>(y) < c,
              "label " + std::to_string(y) + " out of [0, " + std::to_string(c) + ")");
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, logits.value()(r, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            softmax(r, j) = std::exp(logits.value()(r, j) - mx);
            denom += softmax(r, j);
        }
        for (std::size_t j = 0; j < c; ++j) softmax(r, j) /= denom;
        loss -= logits.value()(r, y) - mx - std::log(denom);
    }
    Matrix out(1, 1);
    out.data[0] = loss / static_cast<double>(n);
    return make_op(std::move(out), {logits}, [logits, labels, softmax](Tensor::Node& self) {
        logits.node()->ensure_grad();
        const std::size_t n = softmax.rows, c = softmax.cols;
        const double g = self.grad.data[0] / static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t j = 0; j < c; ++j) {
                const double onehot = static_cast<std::size_t>(labels[r]) == j ? 1.0 : 0.0;
                logits.node()->grad(r, j) += g * (softmax(r, j) - onehot);
            }
        }
    });
}

// --- optimizer ----------------------------------------------------------------

void adam_step(Matrix& value, const Matrix& grad, Matrix& m, Matrix& v, long t,
               const AdamParams& hp) {
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = grad.data[i];
        m.data[i] = hp.beta1 * m.data[i] + (1.0 - hp.beta1) * g;
        v.data[i] = hp.beta2 * v.data[i] + (1.0 - hp.beta2) * g * g;
        const double mhat = m.data[i] / bc1;
        const double vhat = v.data[i] / bc2;
        value.data[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
}

void Adam::step(const std::vector<Tensor>& params) {
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.rows(), p.cols());
            v_.emplace_back(p.rows(), p.cols());
        }
    }
    check(m_.size() == params.size(), "optimizer state does not match parameter count");
    ++t_;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor p = params[i];
        adam_step(p.raw_value(), p.grad(), m_[i], v_[i], t_, hp_);
    }
}

void Adam::zero_grad(const std::vector<Tensor>& params) {
    for (Tensor p : params) p.zero_grad();
}

void Adam::set_state(std::vector<Matrix> m, std::vector<Matrix> v, long t) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

// --- gradcheck -----------------------------------------------------------------

GradcheckResult finite_diff_gradcheck(const std::function<Tensor()>& forward,
                                      const std::vector<Tensor>& params, double eps,
                                      int max_coords, Rng* rng, double denom_floor) {
    for (Tensor p : params) p.zero_grad();
    Tensor loss = forward();
    loss.backward();
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) analytic.push_back(p.grad());

    std::size_t total = 0;
    for (const auto& p : params) total += p.value().size();
    std::vector<std::size_t> coords;
    if (static_cast<int>(total) <= max_coords || rng == nullptr) {
        coords.resize(std::min<std::size_t>(total, static_cast<std::size_t>(max_coords)));
        for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
        std::set<std::size_t> picked;
        while (static_cast<int>(picked.size()) < max_coords) {
            picked.insert(static_cast<std::size_t>(rng->uniform_int(static_cast<int>(total))));
        }
        coords.assign(picked.begin(), picked.end());
    }

    GradcheckResult result;
    for (std::size_t flat : coords) {
        std::size_t pi = 0, offset = flat;
        while (offset >= params[pi].value().size()) {
            offset -= params[pi].value().size();
            ++pi;
        }
        Tensor p = params[pi];
        const double saved = p.raw_value().data[offset];
        p.raw_value().data[offset] = saved + eps;
        const double plus = forward().item();
        p.raw_value().data[offset] = saved - eps;
        const double minus = forward().item();
        p.raw_value().data[offset] = saved;

        const double fd = (plus - minus) / (2.0 * eps);
        const double an = analytic[pi].data[offset];
        const double denom = std::max({std::abs(fd), std::abs(an), denom_floor});
        result.max_rel_err = std::max(result.max_rel_err, std::abs(fd - an) / denom);
        ++result.coords_checked;
    }
    return result;
}

Tensor ParamStore::add(const std::string& name, Tensor t) {
    for (const auto& [existing, _] : items_) {
        if (existing == name) throw std::logic_error("duplicate parameter name: " + name);
    }
    items_.emplace_back(name, t);
    return t;
}

const Tensor* ParamStore::find(const std::string& name) const {
    for (const auto& [n, t] : items_) {
        if (n == name) return &t;
    }
    return nullptr;
}

std::vector<Tensor> ParamStore::tensors() const {
    std::vector<Tensor> out;
    out.reserve(items_.size());
    for (const auto& [_, t] : items_) out.push_back(t);
    return out;
}

std::size_t ParamStore::total_size() const {
    std::size_t n = 0;
    for (const auto& [_, t] : items_) n += t.value().size();
    return n;
}

}  // namespace pdmesh
