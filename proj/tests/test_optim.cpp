#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pkt/optim.hpp"
#include "pkt/tensor.hpp"
#include "testutil.hpp"

using namespace pkt;

TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor p = Tensor::row({1.0, -2.0, 3.0}, true);
    p.zero_grad();
    Adam opt({p}, {.lr = 0.1});
    opt.step();
    CHECK(p.values() == std::vector<double>{1.0, -2.0, 3.0});
    CHECK(opt.steps() == 1);
}

TEST_CASE("first bias-corrected step moves by ~lr") {
    // closed form: step 1 with g=1 gives lr * 1 / (1 + eps') ~ lr
    Tensor p = Tensor::scalar(0.5, true);
    p.zero_grad();
    p.grad()[0] = 1.0;
    Adam opt({p}, {.lr = 0.1});
    opt.step();
    CHECK(std::fabs((0.5 - p.values()[0]) - 0.1) < 1e-6);
}

TEST_CASE("same seed, bitwise identical trajectories") {
    auto run = [] {
        Rng rng(21);
        Tensor w = testutil::random_tensor(4, 4, rng, true);
        Adam opt({w}, {.lr = 0.01});
        for (int step = 0; step < 25; ++step) {
            opt.zero_grad();
            Tape tape;
            Tensor x = testutil::random_tensor(1, 4, rng, false);
            Tensor loss = tape.sum_all(tape.tanh_t(tape.matmul(x, w)));
            tape.backward(loss);
            opt.step();
        }
        return w.values();
    };
    CHECK(run() == run());
}

TEST_CASE("missing gradient is a contract error") {
    Tensor p = Tensor::row({1.0}, false);  // never set up for training
    Adam opt({p});
    CHECK_THROWS_AS(opt.step(), contract_error);
}

TEST_CASE("step counter increases by one per update") {
    Tensor p = Tensor::scalar(0.0, true);
    p.zero_grad();
    Adam opt({p});
    for (int i = 1; i <= 5; ++i) {
        opt.step();
        CHECK(opt.steps() == i);
    }
}
