#include <catch2/catch_amalgamated.hpp>

#include "pkt/sgns.hpp"
#include "pkt/vocab.hpp"

using namespace pkt;

TEST_CASE("vocab reserves pad/unk and applies the frequency cutoff") {
    std::vector<std::vector<std::string>> corpus{
        {"a", "b", "a", "rare"},
        {"a", "b", "c", "c"},
    };
    TokenVocab v = TokenVocab::build(corpus, 2);
    CHECK(v.token(TokenVocab::kPadId) == "<PAD>");
    CHECK(v.token(TokenVocab::kUnkId) == "<UNK>");
    CHECK(v.id("a") >= 2);
    CHECK(v.id("rare") == TokenVocab::kUnkId);  // below cutoff -> unknown
    CHECK(v.id("never_seen") == TokenVocab::kUnkId);
    // deterministic ordering: a (3) before b (2), ties lexicographic
    CHECK(v.id("a") == 2);
    CHECK(v.id("b") < v.id("c"));

    auto ids = v.encode({"a", "rare", "b"}, 2);
    REQUIRE(ids.size() == 2);  // truncated to max length
    CHECK(ids[0] == v.id("a"));
    CHECK(ids[1] == TokenVocab::kUnkId);
}

TEST_CASE("co-occurring pair scores above a non-co-occurring one") {
    // corpus of a repeated bigram "a b", with "c d" elsewhere
    std::vector<std::vector<size_t>> sentences;
    for (int i = 0; i < 200; ++i) sentences.push_back({0, 1});
    for (int i = 0; i < 200; ++i) sentences.push_back({2, 3});
    std::vector<int64_t> counts{200, 200, 200, 200};
    SgnsConfig cfg;
    cfg.dim = 16;
    cfg.window = 2;
    cfg.epochs = 5;
    SgnsModel m = sgns_train(sentences, 4, counts, cfg, 42);
    CHECK(m.pair_score(0, 1) > m.pair_score(0, 3));
    CHECK(m.pair_score(2, 3) > m.pair_score(2, 1));
}

TEST_CASE("sgns deterministic given seed") {
    std::vector<std::vector<size_t>> sentences{{0, 1, 2, 3, 1, 0}, {3, 2, 1}};
    std::vector<int64_t> counts{2, 3, 2, 2};
    SgnsConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 2;
    SgnsModel a = sgns_train(sentences, 4, counts, cfg, 7);
    SgnsModel b = sgns_train(sentences, 4, counts, cfg, 7);
    CHECK(a.in == b.in);
    CHECK(a.out == b.out);
}

TEST_CASE("empty corpus rejected") {
    SgnsConfig cfg;
    CHECK_THROWS_AS(sgns_train({}, 4, {1, 1, 1, 1}, cfg, 1), data_error);
}
