#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace meshforge::nn {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when an operation produces NaN or infinity.
class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {
inline thread_local int no_grad_depth = 0;
}

inline bool grad_enabled() { return detail::no_grad_depth == 0; }

/// Disables graph recording in its scope.
struct NoGrad {
    NoGrad() { ++detail::no_grad_depth; }
    ~NoGrad() { --detail::no_grad_depth; }
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;
};

template <typename S>
struct Node {
    Matrix<S> value;
    Matrix<S> grad;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    template <typename D>
    void accumulate(const Eigen::MatrixBase<D>& g) {
        if (grad.size() == 0) {
            grad = g;
        } else {
            grad += g;
        }
    }
};

/// Dense matrix with reverse-mode gradient support. Copies share the
/// underlying node.
template <typename S>
class Tensor {
public:
    using Mat = Matrix<S>;

    Tensor() = default;
    explicit Tensor(Mat v, bool requires_grad = false) : node_(std::make_shared<Node<S>>()) {
        node_->value = std::move(v);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Eigen::Index r, Eigen::Index c, bool requires_grad = false) {
        return Tensor(Mat::Zero(r, c), requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    const Mat& value() const { return node_->value; }
    Mat& mutable_value() { return node_->value; }
    const Mat& grad() const { return node_->grad; }
    Mat& mutable_grad() { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    const char* op() const { return node_->op; }
    S item() const {
        if (rows() != 1 || cols() != 1) throw ShapeError("item() needs a 1x1 tensor");
        return node_->value(0, 0);
    }
    void zero_grad() { node_->grad.resize(0, 0); }

    /// Seed this tensor's gradient with ones and propagate to every leaf
    /// that requires a gradient. Leaf gradients accumulate across calls.
    void backward() const {
        std::vector<Node<S>*> order;
        std::unordered_set<Node<S>*> seen;
        std::vector<std::pair<Node<S>*, std::size_t>> stack{{node_.get(), 0}};
        seen.insert(node_.get());
        while (!stack.empty()) {
            auto& [n, i] = stack.back();
            if (i < n->inputs.size()) {
                Node<S>* c = n->inputs[i++].get();
                if (c->requires_grad && seen.insert(c).second) stack.emplace_back(c, 0);
            } else {
                order.push_back(n);
                stack.pop_back();
            }
        }
        node_->accumulate(Mat::Ones(rows(), cols()));
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node<S>* n = *it;
            if (n->backward && n->grad.size() != 0) n->backward(*n);
        }
    }

    const std::shared_ptr<Node<S>>& node() const { return node_; }

private:
    std::shared_ptr<Node<S>> node_;
};

namespace detail {

template <typename S>
void check_finite(const Matrix<S>& v, const char* op) {
    if (!v.allFinite()) throw NonFiniteError(std::string("non-finite value produced by ") + op);
}

template <typename S, typename F>
Tensor<S> make_result(Matrix<S> value, const char* op, std::initializer_list<Tensor<S>> inputs, F&& backward) {
    check_finite(value, op);
    Tensor<S> out(std::move(value));
    out.node()->op = op;
    if (grad_enabled()) {
        bool any = false;
        for (const auto& t : inputs) any = any || t.requires_grad();
        if (any) {
            out.node()->requires_grad = true;
            for (const auto& t : inputs) out.node()->inputs.push_back(t.node());
            out.node()->backward = std::forward<F>(backward);
        }
    }
    return out;
}

template <typename S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

template <typename S>
Node<S>& in(Node<S>& self, std::size_t i) {
    return *self.inputs[i];
}

}  // namespace detail

template <typename S>
Tensor<S> detach(const Tensor<S>& x) {
    return Tensor<S>(x.value());
}

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix<S> v = a.value() * b.value();
    return detail::make_result<S>(std::move(v), "matmul", {a, b}, [](Node<S>& self) {
        auto& A = detail::in(self, 0);
        auto& B = detail::in(self, 1);
        if (A.requires_grad) A.accumulate(self.grad * B.value.transpose());
        if (B.requires_grad) B.accumulate(A.value.transpose() * self.grad);
    });
}

/// x W + b, with W stored as (in x out) and b as (1 x out).
template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
    if (x.cols() != w.rows()) {
        throw ShapeError("linear: input width " + std::to_string(x.cols()) + " does not match weight rows " +
                         std::to_string(w.rows()));
    }
    Matrix<S> v = x.value() * w.value();
    if (b.defined()) v.rowwise() += b.value().row(0);
    if (b.defined()) {
        return detail::make_result<S>(std::move(v), "linear", {x, w, b}, [](Node<S>& self) {
            auto& X = detail::in(self, 0);
            auto& W = detail::in(self, 1);
            auto& B = detail::in(self, 2);
            if (X.requires_grad) X.accumulate(self.grad * W.value.transpose());
            if (W.requires_grad) W.accumulate(X.value.transpose() * self.grad);
            if (B.requires_grad) B.accumulate(self.grad.colwise().sum());
        });
    }
    return detail::make_result<S>(std::move(v), "linear", {x, w}, [](Node<S>& self) {
        auto& X = detail::in(self, 0);
        auto& W = detail::in(self, 1);
        if (X.requires_grad) X.accumulate(self.grad * W.value.transpose());
        if (W.requires_grad) W.accumulate(X.value.transpose() * self.grad);
    });
}

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "add");
    return detail::make_result<S>(a.value() + b.value(), "add", {a, b}, [](Node<S>& self) {
        if (detail::in(self, 0).requires_grad) detail::in(self, 0).accumulate(self.grad);
        if (detail::in(self, 1).requires_grad) detail::in(self, 1).accumulate(self.grad);
    });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "sub");
    return detail::make_result<S>(a.value() - b.value(), "sub", {a, b}, [](Node<S>& self) {
        if (detail::in(self, 0).requires_grad) detail::in(self, 0).accumulate(self.grad);
        if (detail::in(self, 1).requires_grad) detail::in(self, 1).accumulate(-self.grad);
    });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
    detail::require_same_shape(a, b, "mul");
    return detail::make_result<S>(a.value().cwiseProduct(b.value()), "mul", {a, b}, [](Node<S>& self) {
        auto& A = detail::in(self, 0);
        auto& B = detail::in(self, 1);
        if (A.requires_grad) A.accumulate(self.grad.cwiseProduct(B.value));
        if (B.requires_grad) B.accumulate(self.grad.cwiseProduct(A.value));
    });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S s) {
    return detail::make_result<S>(a.value() * s, "scale", {a}, [s](Node<S>& self) {
        detail::in(self, 0).accumulate(self.grad * s);
    });
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
    return detail::make_result<S>(a.value().cwiseMax(S(0)), "relu", {a}, [](Node<S>& self) {
        auto& A = detail::in(self, 0);
        A.accumulate(self.grad.cwiseProduct((A.value.array() > S(0)).template cast<S>().matrix()));
    });
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
    Matrix<S> v = a.value().array().tanh().matrix();
    return detail::make_result<S>(std::move(v), "tanh", {a}, [](Node<S>& self) {
        detail::in(self, 0).accumulate(
            self.grad.cwiseProduct((S(1) - self.value.array().square()).matrix()));
    });
}

template <typename S>
Tensor<S> concat_cols(const Tensor<S>& a, const Tensor<S>& b) {
    if (a.rows() != b.rows()) throw ShapeError("concat_cols: row counts differ");
    Matrix<S> v(a.rows(), a.cols() + b.cols());
    v.leftCols(a.cols()) = a.value();
    v.rightCols(b.cols()) = b.value();
    const auto ca = a.cols();
    return detail::make_result<S>(std::move(v), "concat_cols", {a, b}, [ca](Node<S>& self) {
        auto& A = detail::in(self, 0);
        auto& B = detail::in(self, 1);
        if (A.requires_grad) A.accumulate(self.grad.leftCols(ca));
        if (B.requires_grad) B.accumulate(self.grad.rightCols(self.grad.cols() - ca));
    });
}

/// Rows of x picked by `idx` (repeats allowed).
template <typename S>
Tensor<S> gather_rows(const Tensor<S>& x, std::vector<int> idx) {
    Matrix<S> v(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
        v.row(static_cast<Eigen::Index>(i)) = x.value().row(idx[i]);
    }
    return detail::make_result<S>(std::move(v), "gather_rows", {x}, [idx = std::move(idx)](Node<S>& self) {
        auto& X = detail::in(self, 0);
        Matrix<S> g = Matrix<S>::Zero(X.value.rows(), X.value.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
        X.accumulate(g);
    });
}

/// Mean over row groups: group g averages rows rows[offsets[g] .. offsets[g+1]).
template <typename S>
Tensor<S> group_mean(const Tensor<S>& x, std::vector<int> offsets, std::vector<int> rows) {
    const auto groups = static_cast<Eigen::Index>(offsets.size()) - 1;
    Matrix<S> v = Matrix<S>::Zero(groups, x.cols());
    for (Eigen::Index g = 0; g < groups; ++g) {
        const int b = offsets[g], e = offsets[g + 1];
        if (e <= b) throw ShapeError("group_mean: empty group");
        for (int i = b; i < e; ++i) v.row(g) += x.value().row(rows[i]);
        v.row(g) /= S(e - b);
    }
    return detail::make_result<S>(std::move(v), "group_mean", {x},
                                  [offsets = std::move(offsets), rows = std::move(rows)](Node<S>& self) {
                                      auto& X = detail::in(self, 0);
                                      Matrix<S> g = Matrix<S>::Zero(X.value.rows(), X.value.cols());
                                      for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
                                          const int b = offsets[k], e = offsets[k + 1];
                                          for (int i = b; i < e; ++i) {
                                              g.row(rows[i]) += self.grad.row(static_cast<Eigen::Index>(k)) / S(e - b);
                                          }
                                      }
                                      X.accumulate(g);
                                  });
}

/// Sparse scaled dot-product attention. Row k attends over the rows listed
/// in idx[offsets[k] .. offsets[k+1]) with weights softmax(q_k . k_j * scale);
/// rows with an empty list produce zeros.
template <typename S>
Tensor<S> sparse_attention(const Tensor<S>& q, const Tensor<S>& k, const Tensor<S>& v,
                           std::shared_ptr<const std::vector<int>> offsets, std::shared_ptr<const std::vector<int>> idx,
                           S scale) {
    if (q.rows() != k.rows() || q.cols() != k.cols() || v.rows() != q.rows()) {
        throw ShapeError("sparse_attention: shape mismatch");
    }
    const auto n = q.rows();
    if (static_cast<Eigen::Index>(offsets->size()) != n + 1) throw ShapeError("sparse_attention: bad offsets");
    const auto& Q = q.value();
    const auto& K = k.value();
    const auto& V = v.value();
    Matrix<S> out = Matrix<S>::Zero(n, v.cols());
    // attention weights, aligned with idx
    auto weights = std::make_shared<std::vector<S>>(idx->size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const int b = (*offsets)[r], e = (*offsets)[r + 1];
        if (e == b) continue;
        S mx = -std::numeric_limits<S>::infinity();
        for (int t = b; t < e; ++t) {
            const S s = Q.row(r).dot(K.row((*idx)[t])) * scale;
            (*weights)[t] = s;
            mx = std::max(mx, s);
        }
        S z = 0;
        for (int t = b; t < e; ++t) {
            (*weights)[t] = std::exp((*weights)[t] - mx);
            z += (*weights)[t];
        }
        for (int t = b; t < e; ++t) {
            (*weights)[t] /= z;
            out.row(r) += (*weights)[t] * V.row((*idx)[t]);
        }
    }
    return detail::make_result<S>(std::move(out), "sparse_attention", {q, k, v}, [offsets, idx, weights, scale](Node<S>& self) {
        auto& QN = detail::in(self, 0);
        auto& KN = detail::in(self, 1);
        auto& VN = detail::in(self, 2);
        const auto n = QN.value.rows();
        Matrix<S> dq = Matrix<S>::Zero(n, QN.value.cols());
        Matrix<S> dk = Matrix<S>::Zero(n, KN.value.cols());
        Matrix<S> dv = Matrix<S>::Zero(n, VN.value.cols());
        std::vector<S> da;
        for (Eigen::Index r = 0; r < n; ++r) {
            const int b = (*offsets)[r], e = (*offsets)[r + 1];
            if (e == b) continue;
            const auto g = self.grad.row(r);
            da.assign(static_cast<std::size_t>(e - b), S(0));
            S dot = 0;
            for (int t = b; t < e; ++t) {
                const int j = (*idx)[t];
                const S a = (*weights)[t];
                dv.row(j) += a * g;
                da[static_cast<std::size_t>(t - b)] = g.dot(VN.value.row(j));
                dot += a * da[static_cast<std::size_t>(t - b)];
            }
            for (int t = b; t < e; ++t) {
                const int j = (*idx)[t];
                const S ds = (*weights)[t] * (da[static_cast<std::size_t>(t - b)] - dot) * scale;
                dq.row(r) += ds * KN.value.row(j);
                dk.row(j) += ds * QN.value.row(r);
            }
        }
        if (QN.requires_grad) QN.accumulate(dq);
        if (KN.requires_grad) KN.accumulate(dk);
        if (VN.requires_grad) VN.accumulate(dv);
    });
}

/// Training-mode batch normalization over all rows. Writes the batch mean
/// and biased variance to `mean_out` / `var_out` when given.
template <typename S>
Tensor<S> batch_norm_train(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps,
                           Matrix<S>* mean_out = nullptr, Matrix<S>* var_out = nullptr) {
    const auto n = x.rows();
    if (gamma.cols() != x.cols() || beta.cols() != x.cols()) throw ShapeError("batch_norm: width mismatch");
    const Matrix<S> mean = x.value().colwise().mean();
    const Matrix<S> centered = x.value().rowwise() - mean.row(0);
    const Matrix<S> var = centered.array().square().colwise().sum().matrix() / S(n);
    const Matrix<S> inv_std = (var.array() + eps).rsqrt().matrix();
    Matrix<S> xhat = centered.array().rowwise() * inv_std.row(0).array();
    Matrix<S> y = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();
    if (mean_out) *mean_out = mean;
    if (var_out) *var_out = var;
    return detail::make_result<S>(
        std::move(y), "batch_norm", {x, gamma, beta}, [xhat = std::move(xhat), inv_std](Node<S>& self) {
            auto& X = detail::in(self, 0);
            auto& G = detail::in(self, 1);
            auto& B = detail::in(self, 2);
            const auto& g = self.grad;
            const S n = S(g.rows());
            if (B.requires_grad) B.accumulate(g.colwise().sum());
            if (G.requires_grad) G.accumulate(g.cwiseProduct(xhat).colwise().sum());
            if (X.requires_grad) {
                const Matrix<S> dxhat = g.array().rowwise() * G.value.row(0).array();
                const Matrix<S> sum_d = dxhat.colwise().sum();
                const Matrix<S> sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
                Matrix<S> dx = (n * dxhat.array()).matrix();
                dx.rowwise() -= sum_d.row(0);
                dx -= (xhat.array().rowwise() * sum_dx.row(0).array()).matrix();
                dx = (dx.array().rowwise() * (inv_std.row(0).array() / n)).matrix();
                X.accumulate(dx);
            }
        });
}

/// Batch normalization with fixed statistics.
template <typename S>
Tensor<S> batch_norm_fixed(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, const Matrix<S>& mean,
                           const Matrix<S>& var, S eps) {
    const Matrix<S> inv_std = (var.array() + eps).rsqrt().matrix();
    const Matrix<S> xhat = (x.value().rowwise() - mean.row(0)).array().rowwise() * inv_std.row(0).array();
    Matrix<S> y = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();
    return detail::make_result<S>(std::move(y), "batch_norm", {x, gamma, beta}, [xhat, inv_std](Node<S>& self) {
        auto& X = detail::in(self, 0);
        auto& G = detail::in(self, 1);
        auto& B = detail::in(self, 2);
        if (B.requires_grad) B.accumulate(self.grad.colwise().sum());
        if (G.requires_grad) G.accumulate(self.grad.cwiseProduct(xhat).colwise().sum());
        if (X.requires_grad) {
            X.accumulate((self.grad.array().rowwise() * (G.value.row(0).array() * inv_std.row(0).array())).matrix());
        }
    });
}

/// Dueling head with max subtraction: q_i = v_g + a_i - max_{j in g} a_j for
/// every row i of group g = [offsets[g], offsets[g+1]).
template <typename S>
Tensor<S> dueling_combine(const Tensor<S>& v, const Tensor<S>& a, std::vector<int> offsets) {
    const auto groups = static_cast<Eigen::Index>(offsets.size()) - 1;
    if (v.rows() != groups || v.cols() != 1 || a.cols() != 1 || a.rows() != offsets.back()) {
        throw ShapeError("dueling_combine: shape mismatch");
    }
    Matrix<S> q(a.rows(), 1);
    std::vector<int> arg(static_cast<std::size_t>(groups));
    for (Eigen::Index g = 0; g < groups; ++g) {
        int best = offsets[g];
        for (int i = offsets[g]; i < offsets[g + 1]; ++i) {
            if (a.value()(i, 0) > a.value()(best, 0)) best = i;
        }
        arg[static_cast<std::size_t>(g)] = best;
        for (int i = offsets[g]; i < offsets[g + 1]; ++i) {
            q(i, 0) = v.value()(g, 0) + (a.value()(i, 0) - a.value()(best, 0));
        }
    }
    return detail::make_result<S>(std::move(q), "dueling_combine", {v, a},
                                  [offsets = std::move(offsets), arg = std::move(arg)](Node<S>& self) {
                                      auto& V = detail::in(self, 0);
                                      auto& A = detail::in(self, 1);
                                      Matrix<S> dv = Matrix<S>::Zero(V.value.rows(), 1);
                                      Matrix<S> da = self.grad;
                                      for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
                                          S s = 0;
                                          for (int i = offsets[g]; i < offsets[g + 1]; ++i) s += self.grad(i, 0);
                                          dv(static_cast<Eigen::Index>(g), 0) = s;
                                          da(arg[g], 0) -= s;
                                      }
                                      if (V.requires_grad) V.accumulate(dv);
                                      if (A.requires_grad) A.accumulate(da);
                                  });
}

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
    Matrix<S> v(1, 1);
    v(0, 0) = a.value().sum();
    return detail::make_result<S>(std::move(v), "sum", {a}, [](Node<S>& self) {
        auto& A = detail::in(self, 0);
        A.accumulate(Matrix<S>::Constant(A.value.rows(), A.value.cols(), self.grad(0, 0)));
    });
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
    Matrix<S> v(1, 1);
    v(0, 0) = a.value().mean();
    return detail::make_result<S>(std::move(v), "mean", {a}, [](Node<S>& self) {
        auto& A = detail::in(self, 0);
        A.accumulate(Matrix<S>::Constant(A.value.rows(), A.value.cols(), self.grad(0, 0) / S(A.value.size())));
    });
}

/// Mean squared error against a constant target.
template <typename S>
Tensor<S> mse(const Tensor<S>& pred, const Matrix<S>& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeError("mse: shape mismatch");
    Matrix<S> diff = pred.value() - target;
    Matrix<S> v(1, 1);
    v(0, 0) = diff.squaredNorm() / S(diff.size());
    return detail::make_result<S>(std::move(v), "mse", {pred}, [diff = std::move(diff)](Node<S>& self) {
        detail::in(self, 0).accumulate(diff * (S(2) * self.grad(0, 0) / S(diff.size())));
    });
}

}  // namespace meshforge::nn
