#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pkt/data.hpp"

using namespace pkt;

namespace {

std::string temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "pkt_data_test";
    std::filesystem::create_directories(dir);
    return dir.string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

SubmissionEvent make_event(int64_t user, int64_t ts, int64_t pid, Verdict v, int64_t sid) {
    SubmissionEvent e;
    e.user_id = user;
    e.timestamp = ts;
    e.problem_id = pid;
    e.verdict = v;
    e.r = verdict_to_binary(v);
    e.code = "int main ( ) { }";
    e.submission_id = sid;
    return e;
}

}  // namespace

TEST_CASE("verdict enum and binary collapse") {
    int correct = 0;
    for (int i = 0; i < kNumVerdicts; ++i) {
        Verdict v = static_cast<Verdict>(i);
        CHECK(parse_verdict(verdict_name(v)) == v);
        correct += verdict_to_binary(v);
        CHECK(verdict_to_binary(v) == (v == Verdict::Correct ? 1 : 0));
    }
    CHECK(correct == 1);
    CHECK_THROWS_AS(parse_verdict("Accepted"), parse_error);
}

TEST_CASE("knowledge base validation") {
    KnowledgeBase kb;
    kb.concepts = {{0, "loops"}, {1, "recursion"}};
    kb.problems = {{0, "p0", 1, {0}}, {1, "p1", 2, {0, 1}}};
    validate_knowledge_base(kb);
    CHECK(kb.index_of(1) == 1);

    KnowledgeBase empty_set = kb;
    empty_set.problems.push_back({2, "p2", 1, {}});
    CHECK_THROWS_AS(validate_knowledge_base(empty_set), data_error);

    KnowledgeBase dup = kb;
    dup.problems.push_back({0, "again", 1, {1}});
    CHECK_THROWS_AS(validate_knowledge_base(dup), data_error);

    KnowledgeBase dangling = kb;
    dangling.problems.push_back({2, "p2", 1, {9}});
    CHECK_THROWS_AS(validate_knowledge_base(dangling), data_error);

    KnowledgeBase gap = kb;
    gap.concepts = {{0, "a"}, {2, "b"}};
    CHECK_THROWS_AS(validate_knowledge_base(gap), data_error);
}

TEST_CASE("loading reports line numbers for malformed records") {
    std::string dir = temp_dir();
    write_file(dir + "/concepts.jsonl", "{\"id\":0,\"name\":\"x\"}\nnot json\n");
    write_file(dir + "/problems.jsonl", "");
    try {
        load_knowledge_base(dir + "/problems.jsonl", dir + "/concepts.jsonl");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("events round-trip through jsonl with escaped newlines") {
    std::string dir = temp_dir();
    std::vector<SubmissionEvent> events{make_event(1, 100, 0, Verdict::WrongAnswer, 0)};
    events[0].code = "int main ( ) {\n  return 0 ;\n}\n";
    save_events(events, dir + "/events.jsonl");
    auto loaded = load_events(dir + "/events.jsonl");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].code == events[0].code);
    CHECK(loaded[0].verdict == Verdict::WrongAnswer);
    CHECK(loaded[0].r == 0);
    CHECK(loaded[0].submission_id == 0);

    // r bit inconsistent with verdict is rejected
    write_file(dir + "/bad.jsonl",
               "{\"user_id\":1,\"timestamp\":5,\"problem_id\":0,\"verdict\":\"Correct\",\"r\":0,"
               "\"code\":\"x\"}\n");
    CHECK_THROWS_AS(load_events(dir + "/bad.jsonl"), data_error);
}

TEST_CASE("build_sequences filters and orders") {
    std::map<int64_t, std::string> roles{{1, "student"}, {2, "staff"}, {3, "student"}, {4, "student"}};
    std::vector<SubmissionEvent> events;
    int64_t sid = 0;
    // user 1: 19 submissions -> excluded (below the 20 threshold)
    for (int i = 0; i < 19; ++i) events.push_back(make_event(1, 1000 + i, 0, Verdict::Correct, sid++));
    // user 2: staff with 100 submissions -> excluded
    for (int i = 0; i < 100; ++i) events.push_back(make_event(2, 2000 + i, 0, Verdict::Correct, sid++));
    // user 3: 25 submissions out of order, with a timestamp tie -> included, sorted
    for (int i = 24; i >= 0; --i) {
        auto e = make_event(3, 3000 + (i == 5 ? 3004 : i), 0, Verdict::WrongAnswer, sid++);
        events.push_back(e);
    }
    // user 4: exactly 20 -> included (boundary)
    for (int i = 0; i < 20; ++i) events.push_back(make_event(4, 4000 + i, 0, Verdict::Correct, sid++));

    FilterCounts fc;
    auto seqs = build_sequences(events, roles, 20, &fc);
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].user_id == 3);
    CHECK(seqs[1].user_id == 4);
    CHECK(fc.non_students_removed == 1);
    CHECK(fc.short_removed == 1);
    CHECK(fc.students_kept == 2);
    CHECK(fc.events_kept == 45);

    const auto& ev = seqs[0].events;
    for (size_t i = 1; i < ev.size(); ++i) {
        CHECK(ev[i - 1].timestamp <= ev[i].timestamp);
        if (ev[i - 1].timestamp == ev[i].timestamp)
            CHECK(ev[i - 1].submission_id < ev[i].submission_id);  // tie-break by submission id
    }

    // unknown role treated as non-student
    std::vector<SubmissionEvent> orphan;
    for (int i = 0; i < 30; ++i) orphan.push_back(make_event(9, i, 0, Verdict::Correct, i));
    CHECK(build_sequences(orphan, roles, 20).empty());
}

TEST_CASE("window_sequences splits, pads, and preserves every event once") {
    StudentSequence s;
    s.user_id = 7;
    for (int i = 0; i < 450; ++i) s.events.push_back(make_event(7, i, 0, Verdict::Correct, i));
    auto windows = window_sequences({s}, 200);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].valid_len == 200);
    CHECK(windows[1].valid_len == 200);
    CHECK(windows[2].valid_len == 50);
    CHECK(windows[2].capacity == 200);
    CHECK(windows[2].valid[49] == 1);
    CHECK(windows[2].valid[50] == 0);

    StudentSequence tiny;
    tiny.user_id = 8;
    for (int i = 0; i < 30; ++i) tiny.events.push_back(make_event(8, i, 0, Verdict::Correct, i));
    auto w2 = window_sequences({tiny}, 200);
    REQUIRE(w2.size() == 1);
    size_t mask_bits = 0;
    for (int v : w2[0].valid) mask_bits += static_cast<size_t>(v);
    CHECK(mask_bits == 30);

    // a window of length 1 yields no trainable target
    StudentSequence one;
    one.user_id = 9;
    for (int i = 0; i < 5; ++i) one.events.push_back(make_event(9, i, 0, Verdict::Correct, i));
    auto w3 = window_sequences({one}, 4);  // splits 4 + 1
    REQUIRE(w3.size() == 2);
    CHECK(w3[1].valid_len == 1);
    CHECK(w3[1].num_targets() == 0);
    CHECK(w3[0].num_targets() == 3);

    // mask-bit total equals total events across all windows
    size_t total = 0;
    for (const auto& w : windows)
        for (int v : w.valid) total += static_cast<size_t>(v);
    CHECK(total == 450);

    CHECK_THROWS_AS(window_sequences({tiny}, 1), contract_error);
}
