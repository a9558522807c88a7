// Adam optimizer with bias correction, applied in place to a fixed parameter
// list. Moment buffers are keyed by position, so the list must not change
// between steps.
#pragma once

#include <cmath>
#include <vector>

#include "pkt/errors.hpp"
#include "pkt/tensor.hpp"

namespace pkt {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg = {}) : cfg_(cfg), params_(std::move(params)) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i].size(), 0.0);
            v_[i].assign(params_[i].size(), 0.0);
        }
    }

    long long steps() const { return t_; }
    const std::vector<Tensor>& params() const { return params_; }

    void zero_grad() {
        for (Tensor& p : params_) p.zero_grad();
    }

    // One bias-corrected update from the gradients currently held by the
    // parameters. A parameter without an allocated gradient buffer is a
    // contract violation (it was never set up for training).
    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            Tensor& p = params_[i];
            if (!p.has_grad())
                throw contract_error("adam: parameter " + std::to_string(i) + " has no gradient");
            const std::vector<double>& g = p.grad();
            std::vector<double>& val = p.values();
            for (size_t j = 0; j < val.size(); ++j) {
                m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
                v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
                double mhat = m_[i][j] / bc1;
                double vhat = v_[i][j] / bc2;
                val[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    long long t_ = 0;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace pkt
