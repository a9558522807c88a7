#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <string>

#include "pkt/lexer.hpp"
#include "pkt/synth.hpp"

using namespace pkt;

namespace {

SynthConfig small_cfg() {
    SynthConfig cfg;
    cfg.students = 40;
    cfg.staff = 2;
    cfg.short_students = 3;
    cfg.problems = 30;
    cfg.concepts = 8;
    cfg.min_events = 25;
    cfg.max_events = 45;
    return cfg;
}

// Marker-lookup oracle: predict the verdict whose marker tokens appear most
// often in the code; falls back to Correct when no marker is present.
Verdict marker_oracle(const std::string& code) {
    std::map<std::string, Verdict> lookup;
    for (int v = 0; v < kNumVerdicts; ++v)
        for (const char* m : verdict_markers()[static_cast<size_t>(v)])
            lookup[m] = static_cast<Verdict>(v);
    std::map<int, int> votes;
    for (const std::string& tok : tokenize(code)) {
        auto it = lookup.find(tok);
        if (it != lookup.end()) ++votes[static_cast<int>(it->second)];
    }
    int best = 0, best_votes = -1;
    for (auto& kv : votes)
        if (kv.second > best_votes) {
            best = kv.first;
            best_votes = kv.second;
        }
    return votes.empty() ? Verdict::Correct : static_cast<Verdict>(best);
}

}  // namespace

TEST_CASE("same seed, identical corpora") {
    auto a = synth_generate(small_cfg(), 11);
    auto b = synth_generate(small_cfg(), 11);
    REQUIRE(a.events.size() == b.events.size());
    for (size_t i = 0; i < a.events.size(); ++i) {
        CHECK(a.events[i].user_id == b.events[i].user_id);
        CHECK(a.events[i].timestamp == b.events[i].timestamp);
        CHECK(a.events[i].problem_id == b.events[i].problem_id);
        CHECK(a.events[i].verdict == b.events[i].verdict);
        CHECK(a.events[i].code == b.events[i].code);
    }
    CHECK(a.kb.problems.size() == b.kb.problems.size());
}

TEST_CASE("different seed changes the corpus") {
    auto a = synth_generate(small_cfg(), 11);
    auto c = synth_generate(small_cfg(), 12);
    bool differs = a.events.size() != c.events.size();
    for (size_t i = 0; !differs && i < a.events.size(); ++i)
        differs = a.events[i].code != c.events[i].code || a.events[i].verdict != c.events[i].verdict;
    CHECK(differs);
}

TEST_CASE("success probability saturates with mastery") {
    SynthConfig cfg;
    CHECK(synth_success_probability(cfg, 1e9, 5) > 1.0 - 1e-9);
    CHECK(synth_success_probability(cfg, -1e9, 1) < 1e-9);
    // monotone in mastery
    double prev = 0.0;
    for (double m = 0.0; m <= 1.0; m += 0.1) {
        double p = synth_success_probability(cfg, m, 3);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("r bit matches verdict for every event") {
    auto res = synth_generate(small_cfg(), 3);
    for (const auto& e : res.events)
        CHECK(e.r == verdict_to_binary(e.verdict));
}

TEST_CASE("marker-lookup oracle recovers verdicts on the clean corpus") {
    auto res = synth_generate(small_cfg(), 5);
    size_t hits = 0;
    for (const auto& e : res.events)
        hits += marker_oracle(e.code) == e.verdict;
    double acc = static_cast<double>(hits) / static_cast<double>(res.events.size());
    CHECK(acc > 0.95);
}

TEST_CASE("all nine verdicts occur in a default-sized corpus") {
    SynthConfig cfg = small_cfg();
    cfg.students = 120;
    auto res = synth_generate(cfg, 7);
    std::set<int> seen;
    for (const auto& e : res.events) seen.insert(static_cast<int>(e.verdict));
    CHECK(seen.size() == static_cast<size_t>(kNumVerdicts));
}

TEST_CASE("roles and short students are emitted for the filter path") {
    auto cfg = small_cfg();
    auto res = synth_generate(cfg, 9);
    size_t staff = 0;
    for (auto& kv : res.roles) staff += kv.second == "staff";
    CHECK(staff == cfg.staff);
    FilterCounts fc;
    auto seqs = build_sequences(res.events, res.roles, 20, &fc);
    CHECK(fc.non_students_removed == cfg.staff);
    CHECK(fc.short_removed == cfg.short_students);
    CHECK(seqs.size() == cfg.students);
}

TEST_CASE("invalid config bounds rejected") {
    SynthConfig cfg = small_cfg();
    cfg.students = 0;
    CHECK_THROWS_AS(synth_generate(cfg, 1), config_error);
    cfg = small_cfg();
    cfg.problems = 3;  // fewer than difficulty levels
    CHECK_THROWS_AS(synth_generate(cfg, 1), config_error);
    cfg = small_cfg();
    cfg.max_events = cfg.min_events - 1;
    CHECK_THROWS_AS(synth_generate(cfg, 1), config_error);
}

TEST_CASE("behaviors are emitted and loadable kinds only") {
    auto res = synth_generate(small_cfg(), 13);
    CHECK(!res.behaviors.empty());
    for (const auto& b : res.behaviors) {
        int k = static_cast<int>(b.kind);
        CHECK(k >= 0);
        CHECK(k <= 4);
    }
}
