// Dense rank-2 tensors (64-bit) with reverse-mode automatic differentiation.
//
// Every differentiable operation is a Tape method: it computes the forward
// value eagerly and records a closure that propagates gradients. Records are
// appended in creation order, which is already a topological order, so
// backward() is a single reverse sweep. One tape serves one forward pass and
// is freed afterwards; parameters (leaf tensors with requires_grad) live
// outside the tape and accumulate gradients across an entire minibatch.
//
// Scalars are 1x1, row vectors 1xn. Values stay finite for finite inputs in
// each op's documented domain; exp() can overflow for large inputs by design.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pkt/errors.hpp"
#include "pkt/rng.hpp"

namespace pkt {

namespace detail {
struct TensorNode {
    size_t rows = 0, cols = 0;
    std::vector<double> val;
    std::vector<double> grad;  // empty until needed; same length as val once allocated
    bool requires_grad = false;
};
}  // namespace detail

inline std::string shape_str(size_t r, size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(size_t rows, size_t cols, bool requires_grad = false) {
        Tensor t;
        t.n_ = std::make_shared<detail::TensorNode>();
        t.n_->rows = rows;
        t.n_->cols = cols;
        t.n_->val.assign(rows * cols, 0.0);
        t.n_->requires_grad = requires_grad;
        if (requires_grad) t.n_->grad.assign(rows * cols, 0.0);
        return t;
    }

    static Tensor full(size_t rows, size_t cols, double v, bool requires_grad = false) {
        Tensor t = zeros(rows, cols, requires_grad);
        for (double& x : t.n_->val) x = v;
        return t;
    }

    static Tensor scalar(double v, bool requires_grad = false) {
        return full(1, 1, v, requires_grad);
    }

    static Tensor row(std::vector<double> v, bool requires_grad = false) {
        Tensor t = zeros(1, v.size(), requires_grad);
        t.n_->val = std::move(v);
        return t;
    }

    static Tensor from_rows(const std::vector<std::vector<double>>& rows, bool requires_grad = false) {
        if (rows.empty()) throw dim_error("from_rows: no rows");
        Tensor t = zeros(rows.size(), rows[0].size(), requires_grad);
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows[0].size())
                throw dim_error("from_rows: ragged input");
            for (size_t j = 0; j < rows[i].size(); ++j) t.n_->val[i * t.cols() + j] = rows[i][j];
        }
        return t;
    }

    static Tensor identity(size_t n) {
        Tensor t = zeros(n, n);
        for (size_t i = 0; i < n; ++i) t.n_->val[i * n + i] = 1.0;
        return t;
    }

    // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; fan_in = input dim
    // (row count for in-by-out weight matrices).
    static Tensor uniform_fanin(size_t rows, size_t cols, Rng& rng, bool requires_grad = true) {
        Tensor t = zeros(rows, cols, requires_grad);
        double bound = 1.0 / std::sqrt(static_cast<double>(rows));
        for (double& x : t.n_->val) x = rng.uniform(-bound, bound);
        return t;
    }

    bool valid() const { return n_ != nullptr; }
    size_t rows() const { return n_->rows; }
    size_t cols() const { return n_->cols; }
    size_t size() const { return n_->val.size(); }

    double at(size_t i, size_t j) const { return n_->val[i * n_->cols + j]; }
    double& at(size_t i, size_t j) { return n_->val[i * n_->cols + j]; }
    double item() const {
        if (size() != 1) throw contract_error("item: tensor is not scalar, shape " + shape());
        return n_->val[0];
    }

    std::vector<double>& values() { return n_->val; }
    const std::vector<double>& values() const { return n_->val; }

    bool requires_grad() const { return n_->requires_grad; }
    bool has_grad() const { return !n_->grad.empty(); }
    std::vector<double>& grad() {
        if (n_->grad.empty()) throw contract_error("grad: no gradient buffer allocated");
        return n_->grad;
    }
    const std::vector<double>& grad() const {
        if (n_->grad.empty()) throw contract_error("grad: no gradient buffer allocated");
        return n_->grad;
    }
    void zero_grad() {
        if (n_->grad.empty()) n_->grad.assign(n_->val.size(), 0.0);
        else std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
    }

    std::string shape() const { return shape_str(rows(), cols()); }

    // Deep value copy detached from any tape; requires_grad off.
    Tensor detached_copy() const {
        Tensor t = zeros(rows(), cols(), false);
        t.n_->val = n_->val;
        return t;
    }

    bool all_finite() const {
        for (double x : n_->val)
            if (!std::isfinite(x)) return false;
        return true;
    }

    detail::TensorNode* node() const { return n_.get(); }
    std::shared_ptr<detail::TensorNode> node_ptr() const { return n_; }

private:
    std::shared_ptr<detail::TensorNode> n_;
};

using NodePtr = std::shared_ptr<detail::TensorNode>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    size_t size() const { return records_.size(); }
    void clear() {
        records_.clear();
        ran_backward_ = false;
    }

    // ---- binary / unary arithmetic -------------------------------------

    Tensor matmul(const Tensor& a, const Tensor& b) {
        if (a.cols() != b.rows())
            throw dim_error("matmul: inner extents differ, " + a.shape() + " vs " + b.shape());
        size_t m = a.rows(), k = a.cols(), n = b.cols();
        Tensor out = Tensor::zeros(m, n);
        const double* av = a.values().data();
        const double* bv = b.values().data();
        double* ov = out.values().data();
        for (size_t i = 0; i < m; ++i)
            for (size_t p = 0; p < k; ++p) {
                double aip = av[i * k + p];
                if (aip == 0.0) continue;
                const double* brow = bv + p * n;
                double* orow = ov + i * n;
                for (size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
            }
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr(), m, k, n] {
            const double* og = on->grad.data();
            if (an->requires_grad) {
                // dA = dC * B^T
                double* ag = an->grad.data();
                const double* bv2 = bn->val.data();
                for (size_t i = 0; i < m; ++i)
                    for (size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        const double* orow = og + i * n;
                        const double* brow = bv2 + p * n;
                        for (size_t j = 0; j < n; ++j) s += orow[j] * brow[j];
                        ag[i * k + p] += s;
                    }
            }
            if (bn->requires_grad) {
                // dB = A^T * dC
                double* bg = bn->grad.data();
                const double* av2 = an->val.data();
                for (size_t i = 0; i < m; ++i)
                    for (size_t p = 0; p < k; ++p) {
                        double aip = av2[i * k + p];
                        if (aip == 0.0) continue;
                        const double* orow = og + i * n;
                        double* brow = bg + p * n;
                        for (size_t j = 0; j < n; ++j) brow[j] += aip * orow[j];
                    }
            }
        });
        return out;
    }

    Tensor add(const Tensor& a, const Tensor& b) {
        check_same_shape("add", a, b);
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] + b.values()[i];
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr()] {
            if (an->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            if (bn->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i];
        });
        return out;
    }

    // a: m x n, b: 1 x n broadcast over rows.
    Tensor add_row(const Tensor& a, const Tensor& b) {
        if (b.rows() != 1 || b.cols() != a.cols())
            throw dim_error("add_row: want 1x" + std::to_string(a.cols()) + " bias, got " +
                            b.shape() + " against " + a.shape());
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.rows(); ++i)
            for (size_t j = 0; j < a.cols(); ++j)
                out.at(i, j) = a.at(i, j) + b.values()[j];
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr()] {
            size_t n = on->cols;
            if (an->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            if (bn->requires_grad)
                for (size_t i = 0; i < on->rows; ++i)
                    for (size_t j = 0; j < n; ++j) bn->grad[j] += on->grad[i * n + j];
        });
        return out;
    }

    // a: m x n, s: 1 x 1 broadcast everywhere.
    Tensor add_scalar_t(const Tensor& a, const Tensor& s) {
        if (s.size() != 1) throw dim_error("add_scalar_t: scalar operand has shape " + s.shape());
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        double sv = s.values()[0];
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] + sv;
        record(out, {a, s}, [an = a.node_ptr(), sn = s.node_ptr(), on = out.node_ptr()] {
            if (an->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
            if (sn->requires_grad) {
                double acc = 0.0;
                for (double g : on->grad) acc += g;
                sn->grad[0] += acc;
            }
        });
        return out;
    }

    Tensor mul(const Tensor& a, const Tensor& b) {
        check_same_shape("elementwise_mul", a, b);
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] * b.values()[i];
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr()] {
            if (an->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * bn->val[i];
            if (bn->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i] * an->val[i];
        });
        return out;
    }

    Tensor scale(const Tensor& a, double k) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] * k;
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), k] {
            if (an->requires_grad)
                for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * k;
        });
        return out;
    }

    // ---- elementwise nonlinearities ------------------------------------

    Tensor tanh_t(const Tensor& a) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = std::tanh(a.values()[i]);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < on->grad.size(); ++i) {
                double y = on->val[i];
                an->grad[i] += on->grad[i] * (1.0 - y * y);
            }
        });
        return out;
    }

    Tensor sigmoid_t(const Tensor& a) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = stable_sigmoid(a.values()[i]);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < on->grad.size(); ++i) {
                double y = on->val[i];
                an->grad[i] += on->grad[i] * y * (1.0 - y);
            }
        });
        return out;
    }

    Tensor exp_t(const Tensor& a) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = std::exp(a.values()[i]);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * on->val[i];
        });
        return out;
    }

    Tensor relu(const Tensor& a) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < on->grad.size(); ++i)
                if (an->val[i] > 0.0) an->grad[i] += on->grad[i];
        });
        return out;
    }

    Tensor leaky_relu(const Tensor& a, double slope) {
        Tensor out = Tensor::zeros(a.rows(), a.cols());
        for (size_t i = 0; i < a.size(); ++i) {
            double x = a.values()[i];
            out.values()[i] = x > 0.0 ? x : slope * x;
        }
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), slope] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < on->grad.size(); ++i)
                an->grad[i] += on->grad[i] * (an->val[i] > 0.0 ? 1.0 : slope);
        });
        return out;
    }

    // ---- structural ops -------------------------------------------------

    Tensor concat_cols(const Tensor& a, const Tensor& b) {
        if (a.rows() != b.rows())
            throw dim_error("concat_cols: row counts differ, " + a.shape() + " vs " + b.shape());
        size_t m = a.rows(), n1 = a.cols(), n2 = b.cols();
        Tensor out = Tensor::zeros(m, n1 + n2);
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < n1; ++j) out.at(i, j) = a.at(i, j);
            for (size_t j = 0; j < n2; ++j) out.at(i, n1 + j) = b.at(i, j);
        }
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr(), m, n1, n2] {
            for (size_t i = 0; i < m; ++i) {
                if (an->requires_grad)
                    for (size_t j = 0; j < n1; ++j)
                        an->grad[i * n1 + j] += on->grad[i * (n1 + n2) + j];
                if (bn->requires_grad)
                    for (size_t j = 0; j < n2; ++j)
                        bn->grad[i * n2 + j] += on->grad[i * (n1 + n2) + n1 + j];
            }
        });
        return out;
    }

    // Stack k row vectors (all 1 x n) into a k x n matrix.
    Tensor stack_rows(std::span<const Tensor> rows) {
        if (rows.empty()) throw dim_error("stack_rows: no rows");
        size_t n = rows[0].cols();
        for (const Tensor& r : rows)
            if (r.rows() != 1 || r.cols() != n)
                throw dim_error("stack_rows: want 1x" + std::to_string(n) + " rows, got " + r.shape());
        Tensor out = Tensor::zeros(rows.size(), n);
        bool rg = false;
        std::vector<NodePtr> nodes;
        nodes.reserve(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            for (size_t j = 0; j < n; ++j) out.at(i, j) = rows[i].at(0, j);
            rg = rg || rows[i].requires_grad();
            nodes.push_back(rows[i].node_ptr());
        }
        finish(out, rg, [nodes = std::move(nodes), on = out.node_ptr(), n] {
            for (size_t i = 0; i < nodes.size(); ++i) {
                if (!nodes[i]->requires_grad) continue;
                for (size_t j = 0; j < n; ++j) nodes[i]->grad[j] += on->grad[i * n + j];
            }
        });
        return out;
    }

    Tensor transpose(const Tensor& a) {
        Tensor out = Tensor::zeros(a.cols(), a.rows());
        for (size_t i = 0; i < a.rows(); ++i)
            for (size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < an->rows; ++i)
                for (size_t j = 0; j < an->cols; ++j)
                    an->grad[i * an->cols + j] += on->grad[j * on->cols + i];
        });
        return out;
    }

    // Select rows of a table by index; duplicates allowed, gradients
    // scatter-add back into the table.
    Tensor gather_rows(const Tensor& table, const std::vector<size_t>& idx) {
        size_t n = table.cols();
        Tensor out = Tensor::zeros(idx.size(), n);
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= table.rows())
                throw index_error("gather_rows: index " + std::to_string(idx[i]) +
                                  " out of range for " + table.shape());
            for (size_t j = 0; j < n; ++j) out.at(i, j) = table.at(idx[i], j);
        }
        record(out, {table}, [tn = table.node_ptr(), on = out.node_ptr(), idx, n] {
            if (!tn->requires_grad) return;
            for (size_t i = 0; i < idx.size(); ++i)
                for (size_t j = 0; j < n; ++j)
                    tn->grad[idx[i] * n + j] += on->grad[i * n + j];
        });
        return out;
    }

    // w: 1 x k weights over selected rows of m (idx.size() == k) -> 1 x n.
    Tensor weighted_rows(const Tensor& w, const Tensor& m, const std::vector<size_t>& idx) {
        if (w.rows() != 1 || w.cols() != idx.size())
            throw dim_error("weighted_rows: weights " + w.shape() + " vs " +
                            std::to_string(idx.size()) + " indices");
        size_t n = m.cols();
        Tensor out = Tensor::zeros(1, n);
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= m.rows())
                throw index_error("weighted_rows: index " + std::to_string(idx[i]) +
                                  " out of range for " + m.shape());
            double wi = w.values()[i];
            for (size_t j = 0; j < n; ++j) out.values()[j] += wi * m.at(idx[i], j);
        }
        record(out, {w, m}, [wn = w.node_ptr(), mn = m.node_ptr(), on = out.node_ptr(), idx, n] {
            for (size_t i = 0; i < idx.size(); ++i) {
                const double* mrow = mn->val.data() + idx[i] * n;
                if (wn->requires_grad) {
                    double s = 0.0;
                    for (size_t j = 0; j < n; ++j) s += on->grad[j] * mrow[j];
                    wn->grad[i] += s;
                }
                if (mn->requires_grad) {
                    double wi = wn->val[i];
                    double* mg = mn->grad.data() + idx[i] * n;
                    for (size_t j = 0; j < n; ++j) mg[j] += wi * on->grad[j];
                }
            }
        });
        return out;
    }

    // Dot products of a query row against a list of state rows: out[k] = q . s_k.
    Tensor attn_scores(const Tensor& q, std::span<const Tensor> states) {
        if (states.empty()) throw contract_error("attn_scores: no history states");
        size_t h = q.cols();
        if (q.rows() != 1) throw dim_error("attn_scores: query must be a row, got " + q.shape());
        Tensor out = Tensor::zeros(1, states.size());
        bool rg = q.requires_grad();
        std::vector<NodePtr> nodes;
        nodes.reserve(states.size());
        for (size_t k = 0; k < states.size(); ++k) {
            if (states[k].rows() != 1 || states[k].cols() != h)
                throw dim_error("attn_scores: state " + states[k].shape() + " vs query " + q.shape());
            double s = 0.0;
            for (size_t j = 0; j < h; ++j) s += q.values()[j] * states[k].values()[j];
            out.values()[k] = s;
            rg = rg || states[k].requires_grad();
            nodes.push_back(states[k].node_ptr());
        }
        finish(out, rg, [qn = q.node_ptr(), nodes = std::move(nodes), on = out.node_ptr(), h] {
            for (size_t k = 0; k < nodes.size(); ++k) {
                double g = on->grad[k];
                if (g == 0.0) continue;
                if (qn->requires_grad)
                    for (size_t j = 0; j < h; ++j) qn->grad[j] += g * nodes[k]->val[j];
                if (nodes[k]->requires_grad)
                    for (size_t j = 0; j < h; ++j) nodes[k]->grad[j] += g * qn->val[j];
            }
        });
        return out;
    }

    // Convex combination of state rows: out = sum_k w[k] * s_k.
    Tensor attn_mix(const Tensor& w, std::span<const Tensor> states) {
        if (states.empty()) throw contract_error("attn_mix: no history states");
        if (w.rows() != 1 || w.cols() != states.size())
            throw dim_error("attn_mix: weights " + w.shape() + " vs " +
                            std::to_string(states.size()) + " states");
        size_t h = states[0].cols();
        Tensor out = Tensor::zeros(1, h);
        bool rg = w.requires_grad();
        std::vector<NodePtr> nodes;
        nodes.reserve(states.size());
        for (size_t k = 0; k < states.size(); ++k) {
            double wk = w.values()[k];
            for (size_t j = 0; j < h; ++j) out.values()[j] += wk * states[k].values()[j];
            rg = rg || states[k].requires_grad();
            nodes.push_back(states[k].node_ptr());
        }
        finish(out, rg, [wn = w.node_ptr(), nodes = std::move(nodes), on = out.node_ptr(), h] {
            for (size_t k = 0; k < nodes.size(); ++k) {
                if (wn->requires_grad) {
                    double s = 0.0;
                    for (size_t j = 0; j < h; ++j) s += on->grad[j] * nodes[k]->val[j];
                    wn->grad[k] += s;
                }
                if (nodes[k]->requires_grad) {
                    double wk = wn->val[k];
                    for (size_t j = 0; j < h; ++j) nodes[k]->grad[j] += wk * on->grad[j];
                }
            }
        });
        return out;
    }

    Tensor mean_rows(const Tensor& a) {
        if (a.rows() == 0) throw dim_error("mean_rows: empty input");
        size_t m = a.rows(), n = a.cols();
        Tensor out = Tensor::zeros(1, n);
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < n; ++j) out.values()[j] += a.at(i, j);
        for (size_t j = 0; j < n; ++j) out.values()[j] /= static_cast<double>(m);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), m, n] {
            if (!an->requires_grad) return;
            double inv = 1.0 / static_cast<double>(m);
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < n; ++j) an->grad[i * n + j] += on->grad[j] * inv;
        });
        return out;
    }

    // Columnwise max over rows (max-over-time pooling). Ties go to the first
    // row, which keeps the subgradient deterministic.
    Tensor max_rows(const Tensor& a) {
        if (a.rows() == 0) throw dim_error("max_rows: empty input");
        size_t m = a.rows(), n = a.cols();
        Tensor out = Tensor::zeros(1, n);
        std::vector<size_t> argmax(n, 0);
        for (size_t j = 0; j < n; ++j) {
            double best = a.at(0, j);
            for (size_t i = 1; i < m; ++i)
                if (a.at(i, j) > best) {
                    best = a.at(i, j);
                    argmax[j] = i;
                }
            out.values()[j] = best;
        }
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), argmax = std::move(argmax), n] {
            if (!an->requires_grad) return;
            for (size_t j = 0; j < n; ++j) an->grad[argmax[j] * n + j] += on->grad[j];
        });
        return out;
    }

    // Sliding windows of `win` consecutive rows, flattened: row i holds rows
    // [i, i+win) of the input, so the output is (m-win+1) x (win*n).
    Tensor unfold_rows(const Tensor& a, size_t win) {
        if (win == 0 || win > a.rows())
            throw dim_error("unfold_rows: window " + std::to_string(win) + " vs " + a.shape());
        size_t m = a.rows(), n = a.cols(), k = m - win + 1;
        Tensor out = Tensor::zeros(k, win * n);
        for (size_t i = 0; i < k; ++i)
            for (size_t w = 0; w < win; ++w)
                for (size_t j = 0; j < n; ++j)
                    out.at(i, w * n + j) = a.at(i + w, j);
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), win, n, k] {
            if (!an->requires_grad) return;
            for (size_t i = 0; i < k; ++i)
                for (size_t w = 0; w < win; ++w)
                    for (size_t j = 0; j < n; ++j)
                        an->grad[(i + w) * n + j] += on->grad[i * (win * n) + w * n + j];
        });
        return out;
    }

    Tensor sum_all(const Tensor& a) {
        Tensor out = Tensor::zeros(1, 1);
        double s = 0.0;
        for (double x : a.values()) s += x;
        out.values()[0] = s;
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr()] {
            if (!an->requires_grad) return;
            for (double& g : an->grad) g += on->grad[0];
        });
        return out;
    }

    Tensor dot(const Tensor& a, const Tensor& b) {
        check_same_shape("dot", a, b);
        Tensor out = Tensor::zeros(1, 1);
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
        out.values()[0] = s;
        record(out, {a, b}, [an = a.node_ptr(), bn = b.node_ptr(), on = out.node_ptr()] {
            double g = on->grad[0];
            if (an->requires_grad)
                for (size_t i = 0; i < an->val.size(); ++i) an->grad[i] += g * bn->val[i];
            if (bn->requires_grad)
                for (size_t i = 0; i < bn->val.size(); ++i) bn->grad[i] += g * an->val[i];
        });
        return out;
    }

    // Numerically stabilized softmax over a single row.
    Tensor softmax_row(const Tensor& a) {
        if (a.rows() != 1 || a.cols() == 0)
            throw dim_error("softmax_row: want a non-empty row, got " + a.shape());
        size_t n = a.cols();
        Tensor out = Tensor::zeros(1, n);
        double mx = a.values()[0];
        for (double x : a.values()) mx = std::max(mx, x);
        double z = 0.0;
        for (size_t j = 0; j < n; ++j) {
            out.values()[j] = std::exp(a.values()[j] - mx);
            z += out.values()[j];
        }
        for (size_t j = 0; j < n; ++j) out.values()[j] /= z;
        record(out, {a}, [an = a.node_ptr(), on = out.node_ptr(), n] {
            if (!an->requires_grad) return;
            double dotv = 0.0;
            for (size_t j = 0; j < n; ++j) dotv += on->grad[j] * on->val[j];
            for (size_t j = 0; j < n; ++j)
                an->grad[j] += on->val[j] * (on->grad[j] - dotv);
        });
        return out;
    }

    // Masked binary cross-entropy, summed over masked elements. Predictions
    // are clamped to [eps, 1-eps] (eps = 1e-7); gradients use the clamped
    // value so saturated predictions stay finite.
    Tensor bce_loss(const Tensor& pred, const Tensor& target, const Tensor& mask) {
        check_same_shape("bce_loss", pred, target);
        check_same_shape("bce_loss", pred, mask);
        Tensor out = Tensor::zeros(1, 1);
        double loss = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            if (mask.values()[i] == 0.0) continue;
            double p = clamp_prob(pred.values()[i], eps);
            double r = target.values()[i];
            loss -= mask.values()[i] * (r * std::log(p) + (1.0 - r) * std::log(1.0 - p));
        }
        out.values()[0] = loss;
        record(out, {pred, target, mask},
               [pn = pred.node_ptr(), tn = target.node_ptr(), mn = mask.node_ptr(),
                on = out.node_ptr()] {
                   if (!pn->requires_grad) return;
                   double g = on->grad[0];
                   for (size_t i = 0; i < pn->val.size(); ++i) {
                       if (mn->val[i] == 0.0) continue;
                       double p = clamp_prob(pn->val[i], eps);
                       double r = tn->val[i];
                       pn->grad[i] += g * mn->val[i] * (p - r) / (p * (1.0 - p));
                   }
               });
        return out;
    }

    // Cross-entropy of a single logit row against an integer label, via a
    // stable log-sum-exp; gradient is softmax(logits) - onehot(label).
    Tensor ce_loss(const Tensor& logits, size_t label) {
        if (logits.rows() != 1 || logits.cols() == 0)
            throw dim_error("ce_loss: want a logit row, got " + logits.shape());
        if (label >= logits.cols())
            throw index_error("ce_loss: label " + std::to_string(label) + " out of range for " +
                              logits.shape());
        size_t n = logits.cols();
        double mx = logits.values()[0];
        for (double x : logits.values()) mx = std::max(mx, x);
        double z = 0.0;
        for (size_t j = 0; j < n; ++j) z += std::exp(logits.values()[j] - mx);
        double lse = mx + std::log(z);
        Tensor out = Tensor::scalar(lse - logits.values()[label]);
        record(out, {logits}, [ln = logits.node_ptr(), on = out.node_ptr(), label, mx, z, n] {
            if (!ln->requires_grad) return;
            double g = on->grad[0];
            for (size_t j = 0; j < n; ++j) {
                double sm = std::exp(ln->val[j] - mx) / z;
                ln->grad[j] += g * (sm - (j == label ? 1.0 : 0.0));
            }
        });
        return out;
    }

    // ---- backward -------------------------------------------------------

    // Reverse sweep from a scalar loss. Each reachable requires_grad tensor
    // accumulates its gradient; runs once per tape.
    void backward(const Tensor& loss) {
        if (loss.size() != 1)
            throw contract_error("backward: loss must be scalar, got " + loss.shape());
        if (ran_backward_) throw contract_error("backward: tape already consumed");
        if (!loss.requires_grad())
            throw contract_error("backward: loss does not depend on any trainable tensor");
        ran_backward_ = true;
        loss.node()->grad.assign(1, 1.0);
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
    }

private:
    static double stable_sigmoid(double x) {
        if (x >= 0.0) {
            double e = std::exp(-x);
            return 1.0 / (1.0 + e);
        }
        double e = std::exp(x);
        return e / (1.0 + e);
    }

    static constexpr double eps = 1e-7;
    static double clamp_prob(double p, double e) {
        return p < e ? e : (p > 1.0 - e ? 1.0 - e : p);
    }

    static void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw dim_error(std::string(op) + ": shape mismatch, " + a.shape() + " vs " + b.shape());
    }

    void record(Tensor& out, std::initializer_list<Tensor> ins, std::function<void()> back) {
        bool rg = false;
        for (const Tensor& t : ins) rg = rg || t.requires_grad();
        finish(out, rg, std::move(back));
    }

    void finish(Tensor& out, bool rg, std::function<void()> back) {
        if (!rg) return;  // constant subgraph: nothing to record
        out.node()->requires_grad = true;
        out.node()->grad.assign(out.size(), 0.0);
        records_.push_back(std::move(back));
    }

    std::vector<std::function<void()>> records_;
    bool ran_backward_ = false;
};

}  // namespace pkt
