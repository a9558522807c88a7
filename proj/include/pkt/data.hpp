// Data schema for the online-judge corpus: knowledge base (problems,
// concepts), submission events, user roles, optional click events; plus the
// filtering and windowing that turn raw events into trainable sequences.
//
// All files are JSON-lines with fixed field names (see docs/data-formats.md).
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "pkt/errors.hpp"

namespace pkt {

using json = nlohmann::json;

// ---- verdicts -----------------------------------------------------------

enum class Verdict : int {
    Correct = 0,
    CompileError = 1,
    WrongAnswer = 2,
    TimeLimitExceeded = 3,
    MemoryLimitExceeded = 4,
    RuntimeError = 5,
    PresentationError = 6,
    OutputLimitExceeded = 7,
    SystemError = 8,
};

inline constexpr int kNumVerdicts = 9;

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Correct: return "Correct";
        case Verdict::CompileError: return "CompileError";
        case Verdict::WrongAnswer: return "WrongAnswer";
        case Verdict::TimeLimitExceeded: return "TimeLimitExceeded";
        case Verdict::MemoryLimitExceeded: return "MemoryLimitExceeded";
        case Verdict::RuntimeError: return "RuntimeError";
        case Verdict::PresentationError: return "PresentationError";
        case Verdict::OutputLimitExceeded: return "OutputLimitExceeded";
        case Verdict::SystemError: return "SystemError";
    }
    throw contract_error("verdict_name: bad enum value");
}

inline Verdict parse_verdict(const std::string& s) {
    for (int i = 0; i < kNumVerdicts; ++i)
        if (s == verdict_name(static_cast<Verdict>(i))) return static_cast<Verdict>(i);
    throw parse_error("unknown verdict '" + s + "'");
}

// Binary collapse: 1 iff Correct. The 2-class classifier target.
inline int verdict_to_binary(Verdict v) { return v == Verdict::Correct ? 1 : 0; }

// ---- core records ---------------------------------------------------------

struct Concept {
    int64_t id = 0;
    std::string name;
};

struct Problem {
    int64_t id = 0;
    std::string text;
    int difficulty = 1;
    std::vector<int64_t> concept_ids;
};

struct SubmissionEvent {
    int64_t user_id = 0;
    int64_t timestamp = 0;
    int64_t problem_id = 0;
    std::string code;
    Verdict verdict = Verdict::Correct;
    int r = 1;
    int64_t submission_id = 0;  // file line order; tie-break for equal timestamps
};

enum class BehaviorKind : int {
    ViewProblem = 0,
    ViewConcept = 1,
    ViewSubmission = 2,
    ViewRanking = 3,
    SubmitCode = 4,
};

inline const char* behavior_name(BehaviorKind k) {
    switch (k) {
        case BehaviorKind::ViewProblem: return "ViewProblem";
        case BehaviorKind::ViewConcept: return "ViewConcept";
        case BehaviorKind::ViewSubmission: return "ViewSubmission";
        case BehaviorKind::ViewRanking: return "ViewRanking";
        case BehaviorKind::SubmitCode: return "SubmitCode";
    }
    throw contract_error("behavior_name: bad enum value");
}

inline BehaviorKind parse_behavior(const std::string& s) {
    for (int i = 0; i < 5; ++i)
        if (s == behavior_name(static_cast<BehaviorKind>(i))) return static_cast<BehaviorKind>(i);
    throw parse_error("unknown behavior kind '" + s + "'");
}

struct BehaviorEvent {
    int64_t user_id = 0;
    int64_t timestamp = 0;
    BehaviorKind kind = BehaviorKind::ViewProblem;
};

struct StudentSequence {
    int64_t user_id = 0;
    std::vector<SubmissionEvent> events;  // chronological, ties by submission_id
};

// ---- knowledge base -------------------------------------------------------

struct KnowledgeBase {
    std::vector<Problem> problems;
    std::vector<Concept> concepts;
    std::unordered_map<int64_t, size_t> problem_index;  // problem id -> position

    size_t index_of(int64_t problem_id) const {
        auto it = problem_index.find(problem_id);
        if (it == problem_index.end())
            throw data_error("unknown problem id " + std::to_string(problem_id));
        return it->second;
    }
};

inline void validate_knowledge_base(KnowledgeBase& kb, int max_difficulty = 5) {
    std::sort(kb.concepts.begin(), kb.concepts.end(),
              [](const Concept& a, const Concept& b) { return a.id < b.id; });
    for (size_t i = 0; i < kb.concepts.size(); ++i)
        if (kb.concepts[i].id != static_cast<int64_t>(i))
            throw data_error("concept ids must be unique and contiguous from 0; saw id " +
                             std::to_string(kb.concepts[i].id) + " at position " + std::to_string(i));
    kb.problem_index.clear();
    for (size_t i = 0; i < kb.problems.size(); ++i) {
        const Problem& p = kb.problems[i];
        if (!kb.problem_index.emplace(p.id, i).second)
            throw data_error("duplicate problem id " + std::to_string(p.id));
        if (p.concept_ids.empty())
            throw data_error("problem " + std::to_string(p.id) + " has no concepts");
        if (p.difficulty < 1 || p.difficulty > max_difficulty)
            throw data_error("problem " + std::to_string(p.id) + " difficulty " +
                             std::to_string(p.difficulty) + " outside [1, " +
                             std::to_string(max_difficulty) + "]");
        std::unordered_set<int64_t> seen;
        for (int64_t cid : p.concept_ids) {
            if (cid < 0 || cid >= static_cast<int64_t>(kb.concepts.size()))
                throw data_error("problem " + std::to_string(p.id) + " references missing concept " +
                                 std::to_string(cid));
            if (!seen.insert(cid).second)
                throw data_error("problem " + std::to_string(p.id) + " repeats concept " +
                                 std::to_string(cid));
        }
    }
}

// ---- JSONL helpers --------------------------------------------------------

namespace detail {

inline json parse_line(const std::string& line, const std::string& file, size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw parse_error(file + ":" + std::to_string(lineno) + ": malformed record");
    return j;
}

template <typename T>
T field(const json& j, const char* name, const std::string& file, size_t lineno) {
    auto it = j.find(name);
    if (it == j.end())
        throw parse_error(file + ":" + std::to_string(lineno) + ": missing field '" + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw parse_error(file + ":" + std::to_string(lineno) + ": field '" + name +
                          "' has the wrong type");
    }
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    return f;
}

inline std::ofstream open_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw data_error("cannot write " + path);
    return f;
}

}  // namespace detail

// ---- loading ---------------------------------------------------------------

inline KnowledgeBase load_knowledge_base(const std::string& problems_path,
                                         const std::string& concepts_path,
                                         int max_difficulty = 5) {
    KnowledgeBase kb;
    {
        std::ifstream f = detail::open_in(concepts_path);
        std::string line;
        size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j = detail::parse_line(line, concepts_path, lineno);
            Concept c;
            c.id = detail::field<int64_t>(j, "id", concepts_path, lineno);
            c.name = detail::field<std::string>(j, "name", concepts_path, lineno);
            kb.concepts.push_back(std::move(c));
        }
    }
    {
        std::ifstream f = detail::open_in(problems_path);
        std::string line;
        size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j = detail::parse_line(line, problems_path, lineno);
            Problem p;
            p.id = detail::field<int64_t>(j, "id", problems_path, lineno);
            p.text = detail::field<std::string>(j, "text", problems_path, lineno);
            p.difficulty = detail::field<int>(j, "difficulty", problems_path, lineno);
            p.concept_ids = detail::field<std::vector<int64_t>>(j, "concept_ids", problems_path, lineno);
            kb.problems.push_back(std::move(p));
        }
    }
    validate_knowledge_base(kb, max_difficulty);
    return kb;
}

inline std::vector<SubmissionEvent> load_events(const std::string& path) {
    std::vector<SubmissionEvent> events;
    std::ifstream f = detail::open_in(path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = detail::parse_line(line, path, lineno);
        SubmissionEvent e;
        e.user_id = detail::field<int64_t>(j, "user_id", path, lineno);
        e.timestamp = detail::field<int64_t>(j, "timestamp", path, lineno);
        e.problem_id = detail::field<int64_t>(j, "problem_id", path, lineno);
        e.verdict = parse_verdict(detail::field<std::string>(j, "verdict", path, lineno));
        e.r = detail::field<int>(j, "r", path, lineno);
        e.code = detail::field<std::string>(j, "code", path, lineno);
        e.submission_id = static_cast<int64_t>(events.size());
        if (e.r != verdict_to_binary(e.verdict))
            throw data_error(path + ":" + std::to_string(lineno) +
                             ": r bit inconsistent with verdict");
        events.push_back(std::move(e));
    }
    return events;
}

inline std::map<int64_t, std::string> load_roles(const std::string& path) {
    std::map<int64_t, std::string> roles;
    std::ifstream f = detail::open_in(path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = detail::parse_line(line, path, lineno);
        int64_t uid = detail::field<int64_t>(j, "user_id", path, lineno);
        std::string role = detail::field<std::string>(j, "role", path, lineno);
        if (role != "student" && role != "staff")
            throw parse_error(path + ":" + std::to_string(lineno) + ": role must be student|staff");
        roles[uid] = role;
    }
    return roles;
}

inline std::vector<BehaviorEvent> load_behaviors(const std::string& path) {
    std::vector<BehaviorEvent> out;
    std::ifstream f = detail::open_in(path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = detail::parse_line(line, path, lineno);
        BehaviorEvent b;
        b.user_id = detail::field<int64_t>(j, "user_id", path, lineno);
        b.timestamp = detail::field<int64_t>(j, "timestamp", path, lineno);
        b.kind = parse_behavior(detail::field<std::string>(j, "kind", path, lineno));
        out.push_back(b);
    }
    return out;
}

// ---- saving ----------------------------------------------------------------

inline void save_knowledge_base(const KnowledgeBase& kb, const std::string& problems_path,
                                const std::string& concepts_path) {
    std::ofstream pf = detail::open_out(problems_path);
    for (const Problem& p : kb.problems) {
        json j{{"id", p.id}, {"text", p.text}, {"difficulty", p.difficulty},
               {"concept_ids", p.concept_ids}};
        pf << j.dump() << "\n";
    }
    std::ofstream cf = detail::open_out(concepts_path);
    for (const Concept& c : kb.concepts) {
        json j{{"id", c.id}, {"name", c.name}};
        cf << j.dump() << "\n";
    }
}

inline void save_events(const std::vector<SubmissionEvent>& events, const std::string& path) {
    std::ofstream f = detail::open_out(path);
    for (const SubmissionEvent& e : events) {
        json j{{"user_id", e.user_id},       {"timestamp", e.timestamp},
               {"problem_id", e.problem_id}, {"verdict", verdict_name(e.verdict)},
               {"r", e.r},                   {"code", e.code}};
        f << j.dump() << "\n";
    }
}

inline void save_roles(const std::map<int64_t, std::string>& roles, const std::string& path) {
    std::ofstream f = detail::open_out(path);
    for (const auto& kv : roles) {
        json j{{"user_id", kv.first}, {"role", kv.second}};
        f << j.dump() << "\n";
    }
}

inline void save_behaviors(const std::vector<BehaviorEvent>& behaviors, const std::string& path) {
    std::ofstream f = detail::open_out(path);
    for (const BehaviorEvent& b : behaviors) {
        json j{{"user_id", b.user_id}, {"timestamp", b.timestamp}, {"kind", behavior_name(b.kind)}};
        f << j.dump() << "\n";
    }
}

// ---- sequence construction ---------------------------------------------------

struct FilterCounts {
    size_t users_total = 0;
    size_t non_students_removed = 0;
    size_t short_removed = 0;
    size_t students_kept = 0;
    size_t events_in = 0;
    size_t events_kept = 0;
};

// Groups events per student, sorts chronologically (ties by submission id),
// drops non-students and users with fewer than min_len submissions.
// Filtering is silent; the counts report what happened.
inline std::vector<StudentSequence> build_sequences(const std::vector<SubmissionEvent>& events,
                                                    const std::map<int64_t, std::string>& roles,
                                                    size_t min_len, FilterCounts* counts = nullptr) {
    FilterCounts fc;
    fc.events_in = events.size();
    std::map<int64_t, std::vector<SubmissionEvent>> by_user;
    for (const SubmissionEvent& e : events) by_user[e.user_id].push_back(e);
    fc.users_total = by_user.size();

    std::vector<StudentSequence> out;
    for (auto& kv : by_user) {
        auto role = roles.find(kv.first);
        if (role == roles.end() || role->second != "student") {
            ++fc.non_students_removed;
            continue;
        }
        if (kv.second.size() < min_len) {
            ++fc.short_removed;
            continue;
        }
        StudentSequence seq;
        seq.user_id = kv.first;
        seq.events = std::move(kv.second);
        std::sort(seq.events.begin(), seq.events.end(),
                  [](const SubmissionEvent& a, const SubmissionEvent& b) {
                      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                      return a.submission_id < b.submission_id;
                  });
        fc.events_kept += seq.events.size();
        ++fc.students_kept;
        out.push_back(std::move(seq));
    }
    if (counts) *counts = fc;
    return out;
}

// ---- windows -----------------------------------------------------------------

// One fixed-length window of a student's sequence. Arrays are padded to
// `capacity`; `valid` marks real steps. Predictions exist for steps with at
// least one step of history, so a length-1 window yields no targets.
struct Window {
    int64_t user_id = 0;
    size_t capacity = 0;
    size_t valid_len = 0;
    std::vector<int64_t> problem_ids;    // padded with -1
    std::vector<int> responses;          // padded with 0
    std::vector<int64_t> submission_ids; // padded with -1
    std::vector<int> valid;              // 1 for real steps

    size_t num_targets() const { return valid_len >= 2 ? valid_len - 1 : 0; }
};

// Splits each sequence into consecutive non-overlapping windows of length L,
// right-padding the tail window. Every event lands in exactly one window.
inline std::vector<Window> window_sequences(const std::vector<StudentSequence>& seqs, size_t L) {
    if (L < 2) throw contract_error("window_sequences: L must be >= 2, got " + std::to_string(L));
    std::vector<Window> out;
    for (const StudentSequence& s : seqs) {
        for (size_t start = 0; start < s.events.size(); start += L) {
            size_t len = std::min(L, s.events.size() - start);
            Window w;
            w.user_id = s.user_id;
            w.capacity = L;
            w.valid_len = len;
            w.problem_ids.assign(L, -1);
            w.responses.assign(L, 0);
            w.submission_ids.assign(L, -1);
            w.valid.assign(L, 0);
            for (size_t k = 0; k < len; ++k) {
                const SubmissionEvent& e = s.events[start + k];
                w.problem_ids[k] = e.problem_id;
                w.responses[k] = e.r;
                w.submission_ids[k] = e.submission_id;
                w.valid[k] = 1;
            }
            out.push_back(std::move(w));
        }
    }
    return out;
}

}  // namespace pkt
