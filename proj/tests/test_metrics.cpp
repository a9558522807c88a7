#include <catch2/catch_amalgamated.hpp>

#include "pkt/metrics.hpp"
#include "pkt/rng.hpp"
#include "testutil.hpp"

using namespace pkt;

TEST_CASE("auc examples") {
    // perfectly separated
    CHECK(auc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == 1.0);

    // brute-force over the 4 pos-neg pairs gives 0.75
    CHECK(auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}) == 0.75);

    // label inversion flips the statistic
    std::vector<double> s{0.3, 0.7, 0.2, 0.9, 0.5};
    std::vector<int> y{0, 1, 0, 1, 1};
    std::vector<int> inv(y.size());
    for (size_t i = 0; i < y.size(); ++i) inv[i] = 1 - y[i];
    CHECK(auc(s, y) == 1.0 - auc(s, inv));

    // single-class input rejected
    CHECK_THROWS_AS(auc({0.1, 0.2}, {1, 1}), metric_error);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {0, 0}), metric_error);
}

TEST_CASE("rank-statistic auc equals pairwise brute force exactly") {
    Rng rng(2024);
    for (int inst = 0; inst < 300; ++inst) {
        size_t n = 2 + static_cast<size_t>(rng.uniform_int(0, 198));
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            scores[i] = static_cast<double>(rng.uniform_int(0, 9)) / 10.0;
            labels[i] = static_cast<int>(rng.uniform_int(0, 1));
            has0 |= labels[i] == 0;
            has1 |= labels[i] == 1;
        }
        if (!has0) labels[0] = 0;
        if (!has1) labels[n - 1] = 1;
        CHECK(auc(scores, labels) == testutil::auc_bruteforce(scores, labels));
    }
}
