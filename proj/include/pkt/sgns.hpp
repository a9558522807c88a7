// Skip-gram with negative sampling over integer token streams. Shared by the
// code-token pre-training and the random-walk graph embedding. Hand-rolled
// SGD in the classic word2vec style (input vectors updated against output
// vectors, unigram^0.75 negative table, linearly decaying learning rate);
// deterministic given the seed.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pkt/errors.hpp"
#include "pkt/rng.hpp"

namespace pkt {

struct SgnsConfig {
    size_t dim = 64;
    size_t window = 5;     // maximum context offset; sampled per position
    size_t negatives = 5;
    size_t epochs = 3;
    double lr = 0.025;
    double lr_min = 1e-4;
};

struct SgnsModel {
    size_t vocab = 0;
    size_t dim = 0;
    std::vector<double> in;   // vocab x dim, the embeddings consumers read
    std::vector<double> out;  // vocab x dim, context vectors

    const double* in_vec(size_t id) const { return in.data() + id * dim; }
    const double* out_vec(size_t id) const { return out.data() + id * dim; }

    // Pair affinity used by the tests: logit of (center, context).
    double pair_score(size_t center, size_t context) const {
        double s = 0.0;
        for (size_t j = 0; j < dim; ++j) s += in_vec(center)[j] * out_vec(context)[j];
        return s;
    }
};

inline SgnsModel sgns_train(const std::vector<std::vector<size_t>>& sentences, size_t vocab_size,
                            const std::vector<int64_t>& counts, const SgnsConfig& cfg,
                            uint64_t seed) {
    if (sentences.empty()) throw data_error("sgns: empty corpus");
    if (cfg.window == 0 || cfg.negatives == 0)
        throw config_error("sgns: window and negatives must be >= 1");
    if (counts.size() != vocab_size) throw contract_error("sgns: counts size mismatch");

    SgnsModel model;
    model.vocab = vocab_size;
    model.dim = cfg.dim;
    model.in.assign(vocab_size * cfg.dim, 0.0);
    model.out.assign(vocab_size * cfg.dim, 0.0);

    Rng rng = Rng::derive(seed, 17);
    double init = 0.5 / static_cast<double>(cfg.dim);
    for (double& x : model.in) x = rng.uniform(-init, init);

    // cumulative unigram^0.75 table for negative sampling
    std::vector<double> cum(vocab_size, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < vocab_size; ++i) {
        total += std::pow(static_cast<double>(counts[i] > 0 ? counts[i] : 0), 0.75);
        cum[i] = total;
    }
    if (total <= 0.0) throw data_error("sgns: no token occurrences");
    auto sample_negative = [&](Rng& r) {
        double x = r.uniform() * total;
        size_t lo = 0, hi = vocab_size - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cum[mid] < x) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    };

    size_t total_positions = 0;
    for (const auto& s : sentences) total_positions += s.size();
    size_t work_total = cfg.epochs * total_positions;
    size_t done = 0;

    std::vector<size_t> order(sentences.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> grad_in(cfg.dim);
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t si : order) {
            const auto& sent = sentences[si];
            for (size_t pos = 0; pos < sent.size(); ++pos, ++done) {
                double progress = static_cast<double>(done) / static_cast<double>(work_total);
                double lr = std::max(cfg.lr_min, cfg.lr * (1.0 - progress));
                size_t b = 1 + static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(cfg.window) - 1));
                size_t lo = pos >= b ? pos - b : 0;
                size_t hi = std::min(sent.size() - 1, pos + b);
                size_t center = sent[pos];
                for (size_t cpos = lo; cpos <= hi; ++cpos) {
                    if (cpos == pos) continue;
                    size_t context = sent[cpos];
                    double* vin = model.in.data() + center * cfg.dim;
                    std::fill(grad_in.begin(), grad_in.end(), 0.0);
                    for (size_t k = 0; k <= cfg.negatives; ++k) {
                        size_t target = k == 0 ? context : sample_negative(rng);
                        if (k > 0 && target == context) continue;
                        double label = k == 0 ? 1.0 : 0.0;
                        double* vout = model.out.data() + target * cfg.dim;
                        double dot = 0.0;
                        for (size_t j = 0; j < cfg.dim; ++j) dot += vin[j] * vout[j];
                        double p = 1.0 / (1.0 + std::exp(-dot));
                        double g = (p - label) * lr;
                        for (size_t j = 0; j < cfg.dim; ++j) {
                            grad_in[j] += g * vout[j];
                            vout[j] -= g * vin[j];
                        }
                    }
                    for (size_t j = 0; j < cfg.dim; ++j) vin[j] -= grad_in[j];
                }
            }
        }
    }
    return model;
}

}  // namespace pkt
