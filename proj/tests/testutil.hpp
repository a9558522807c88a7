// Shared test oracles: central finite differences for gradient checks and an
// O(n^2) pairwise AUC. Both are independent of the library paths they verify.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pkt/rng.hpp"
#include "pkt/tensor.hpp"

namespace pkt::testutil {

// Relative error with a small floor so near-zero gradient pairs are compared
// absolutely instead of dividing by noise.
inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-4});
}

struct GradCheck {
    double max_rel = 0.0;
    size_t coords = 0;
};

// Central finite differences (default h = 1e-5) against tape gradients.
// `forward` must rebuild the whole forward pass from the current parameter
// values and return the scalar loss tensor on the given tape.
inline GradCheck grad_check(std::vector<pkt::Tensor> params,
                            const std::function<pkt::Tensor(pkt::Tape&)>& forward,
                            size_t max_coords_per_param = 64, double h = 1e-5,
                            pkt::Rng* picker = nullptr) {
    // analytic pass
    for (auto& p : params) p.zero_grad();
    {
        pkt::Tape tape;
        pkt::Tensor loss = forward(tape);
        tape.backward(loss);
    }
    std::vector<std::vector<double>> analytic;
    for (auto& p : params) analytic.push_back(p.grad());

    GradCheck res;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        auto& vals = params[pi].values();
        std::vector<size_t> coords;
        if (vals.size() <= max_coords_per_param || !picker) {
            for (size_t i = 0; i < vals.size() && i < max_coords_per_param; ++i) coords.push_back(i);
        } else {
            for (size_t k = 0; k < max_coords_per_param; ++k)
                coords.push_back(static_cast<size_t>(
                    picker->uniform_int(0, static_cast<int64_t>(vals.size()) - 1)));
        }
        for (size_t i : coords) {
            double saved = vals[i];
            vals[i] = saved + h;
            double lp;
            {
                pkt::Tape tape;
                lp = forward(tape).item();
            }
            vals[i] = saved - h;
            double lm;
            {
                pkt::Tape tape;
                lm = forward(tape).item();
            }
            vals[i] = saved;
            double numeric = (lp - lm) / (2.0 * h);
            res.max_rel = std::max(res.max_rel, rel_err(analytic[pi][i], numeric));
            ++res.coords;
        }
    }
    return res;
}

// Pairwise AUC oracle: every positive-negative pair scores 1, 0, or 0.5.
inline double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
    double num = 0.0;
    size_t n_pos = 0, n_neg = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0) continue;
        ++n_pos;
        for (size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j]) num += 1.0;
            else if (scores[i] == scores[j]) num += 0.5;
        }
    }
    for (int y : labels) n_neg += (y == 0);
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline pkt::Tensor random_tensor(size_t r, size_t c, pkt::Rng& rng, bool requires_grad,
                                 double lo = -1.0, double hi = 1.0) {
    pkt::Tensor t = pkt::Tensor::zeros(r, c, requires_grad);
    for (double& x : t.values()) x = rng.uniform(lo, hi);
    return t;
}

}  // namespace pkt::testutil
