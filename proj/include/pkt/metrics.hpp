// ROC AUC by rank statistics. Tied scores receive the average rank of their
// block, so each tied positive-negative pair contributes exactly 0.5. All
// intermediate sums are multiples of 0.5 below 2^53 and therefore exact in
// doubles; the O(n^2) pairwise count in the tests must match bit for bit.
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "pkt/errors.hpp"

namespace pkt {

inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw metric_error("auc: " + std::to_string(scores.size()) + " scores vs " +
                           std::to_string(labels.size()) + " labels");
    size_t n = scores.size();
    size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw metric_error("auc: need both classes, got " + std::to_string(n_pos) + " positives of " +
                           std::to_string(n));

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // rank_sum over positives with average ranks for tied blocks (1-based).
    double rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + j + 2);  // ranks i+1 .. j+1
        for (size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) rank_sum += avg_rank;
        i = j + 1;
    }
    double u = rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace pkt
