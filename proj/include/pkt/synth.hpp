// Seeded synthetic online-judge corpus. A pure function of (config, seed):
// students carry a latent per-concept mastery that grows with practice and
// decays when a concept goes untouched, success follows a logistic model of
// mastery against difficulty, and failed attempts draw a verdict from a
// margin-tier distribution. Submitted code is emitted from per-verdict
// templates whose marker identifiers make the verdict learnable from text.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pkt/data.hpp"
#include "pkt/rng.hpp"

namespace pkt {

struct SynthConfig {
    size_t students = 200;
    size_t staff = 2;            // extra non-student accounts (filtered downstream)
    size_t short_students = 4;   // students with < min_submissions events (filtered)
    size_t problems = 60;
    size_t concepts = 12;
    int difficulty_levels = 5;
    size_t min_events = 30;
    size_t max_events = 70;
    size_t concepts_per_problem_max = 3;

    // learning dynamics
    double mastery_init_max = 0.10;
    double learn_gain = 0.28;          // mastery gain on success
    double fail_gain_severe = 0.02;    // gain by failure tier
    double fail_gain_medium = 0.10;
    double fail_gain_near = 0.16;
    double forget = 0.94;              // untouched-concept decay per event
    double slope = 7.0;                // logistic slope
    double diff_offset = 0.08;         // difficulty level 1 -> this threshold
    double diff_step = 0.16;           // threshold increment per level
    double level_jitter = 0.7;         // noise when students pick a difficulty

    // code emission
    size_t filler_min = 8;             // filler statements per submission
    size_t filler_max = 22;
    size_t noise_vocab = 120;          // distinct filler identifiers
    double marker_dropout = 0.0;       // probability a submission omits markers

    void validate() const {
        if (students == 0) throw config_error("synth: students must be > 0");
        if (problems == 0 || concepts == 0) throw config_error("synth: problems/concepts must be > 0");
        if (difficulty_levels < 1 || difficulty_levels > 9)
            throw config_error("synth: difficulty_levels outside [1,9]");
        if (problems < static_cast<size_t>(difficulty_levels))
            throw config_error("synth: need at least one problem per difficulty level");
        if (min_events < 2 || max_events < min_events)
            throw config_error("synth: bad event count range");
        if (concepts_per_problem_max == 0 || concepts_per_problem_max > concepts)
            throw config_error("synth: bad concepts_per_problem_max");
        if (forget <= 0.0 || forget > 1.0) throw config_error("synth: forget must be in (0,1]");
        if (marker_dropout < 0.0 || marker_dropout > 1.0)
            throw config_error("synth: marker_dropout outside [0,1]");
        if (filler_min == 0 || filler_max < filler_min)
            throw config_error("synth: bad filler statement range");
    }
};

struct SynthResult {
    KnowledgeBase kb;
    std::vector<SubmissionEvent> events;
    std::map<int64_t, std::string> roles;
    std::vector<BehaviorEvent> behaviors;
};

// Marker identifiers per verdict; the lookup oracle in the tests inverts this
// table. Unique across verdicts.
inline const std::array<std::array<const char*, 3>, kNumVerdicts>& verdict_markers() {
    static const std::array<std::array<const char*, 3>, kNumVerdicts> m = {{
        {"ans_ok", "accepted_path", "clean_exit"},          // Correct
        {"missing_semi", "undeclared_var", "bad_syntax"},   // CompileError
        {"wrong_sum", "off_by_one", "bad_logic"},           // WrongAnswer
        {"slow_loop", "busy_wait", "quadratic_scan"},       // TimeLimitExceeded
        {"big_buffer", "huge_table", "mem_hog"},            // MemoryLimitExceeded
        {"null_deref", "div_zero", "oob_index"},            // RuntimeError
        {"extra_space", "trail_newline", "fmt_drift"},      // PresentationError
        {"spam_print", "endless_echo", "log_flood"},        // OutputLimitExceeded
        {"judge_glitch", "env_fault", "sys_hiccup"},        // SystemError
    }};
    return m;
}

inline double synth_difficulty_threshold(const SynthConfig& cfg, int level) {
    return cfg.diff_offset + cfg.diff_step * static_cast<double>(level - 1);
}

// P(success) = sigmoid(slope * (mastery_avg - difficulty_threshold)).
inline double synth_success_probability(const SynthConfig& cfg, double mastery_avg, int level) {
    double z = cfg.slope * (mastery_avg - synth_difficulty_threshold(cfg, level));
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

namespace detail {

// Error-verdict distributions by margin tier, over the 8 non-Correct labels
// in enum order (CompileError..SystemError). Smoothed with 8% uniform so each
// label keeps nonzero mass in every tier.
inline std::array<double, 8> error_distribution(double margin) {
    std::array<double, 8> tier{};
    if (margin < -0.25) {
        tier = {0.42, 0.08, 0.08, 0.10, 0.18, 0.02, 0.02, 0.10};
    } else if (margin < -0.08) {
        tier = {0.08, 0.34, 0.22, 0.10, 0.16, 0.05, 0.03, 0.02};
    } else {
        tier = {0.02, 0.38, 0.16, 0.08, 0.06, 0.18, 0.10, 0.02};
    }
    for (double& x : tier) x = 0.92 * x + 0.08 / 8.0;
    return tier;
}

inline double fail_gain(const SynthConfig& cfg, double margin) {
    if (margin < -0.25) return cfg.fail_gain_severe;
    if (margin < -0.08) return cfg.fail_gain_medium;
    return cfg.fail_gain_near;
}

struct CodeWriter {
    const SynthConfig& cfg;
    Rng& rng;
    std::string out;

    std::string noise_ident() { return "v" + std::to_string(rng.uniform_int(0, static_cast<int64_t>(cfg.noise_vocab) - 1)); }
    std::string number() { return std::to_string(rng.uniform_int(0, 99)); }

    void filler_statement() {
        switch (rng.uniform_int(0, 5)) {
            case 0: out += "    int " + noise_ident() + " = " + number() + " ;\n"; break;
            case 1: out += "    " + noise_ident() + " = " + noise_ident() + " + " + noise_ident() + " ;\n"; break;
            case 2: out += "    if ( " + noise_ident() + " < " + number() + " ) { " + noise_ident() + " = " + number() + " ; }\n"; break;
            case 3: out += "    for ( int i = 0 ; i < " + number() + " ; i ++ ) { " + noise_ident() + " += i ; }\n"; break;
            case 4: out += "    printf ( \"%d\\n\" , " + noise_ident() + " ) ;\n"; break;
            default: out += "    " + noise_ident() + " = " + noise_ident() + " % " + number() + " ;\n"; break;
        }
    }

    void marker_statement(Verdict v) {
        const auto& marks = verdict_markers()[static_cast<size_t>(v)];
        std::string m = marks[static_cast<size_t>(rng.uniform_int(0, 2))];
        switch (rng.uniform_int(0, 2)) {
            case 0: out += "    int " + m + " = " + number() + " ;\n"; break;
            case 1: out += "    " + m + " ++ ;\n"; break;
            default: out += "    " + m + " = " + noise_ident() + " ;\n"; break;
        }
    }

    std::string emit(Verdict v) {
        out.clear();
        out += "#include <bits/stdc++.h>\n";
        out += "int main ( ) {\n";
        size_t fillers = static_cast<size_t>(
            rng.uniform_int(static_cast<int64_t>(cfg.filler_min), static_cast<int64_t>(cfg.filler_max)));
        size_t markers = cfg.marker_dropout > 0.0 && rng.bernoulli(cfg.marker_dropout)
                             ? 0
                             : 1 + static_cast<size_t>(rng.uniform_int(0, 2));
        // marker statements at random slots among the fillers
        std::vector<size_t> slots(fillers + markers, 0);
        for (size_t i = 0; i < slots.size(); ++i) slots[i] = i < markers ? 1 : 0;
        rng.shuffle(slots);
        for (size_t s : slots) {
            if (s) marker_statement(v);
            else filler_statement();
        }
        out += "    return 0 ;\n}\n";
        return out;
    }
};

}  // namespace detail

inline SynthResult synth_generate(const SynthConfig& cfg, uint64_t seed) {
    cfg.validate();
    SynthResult res;

    // knowledge base
    Rng kb_rng = Rng::derive(seed, 0);
    for (size_t c = 0; c < cfg.concepts; ++c)
        res.kb.concepts.push_back({static_cast<int64_t>(c), "concept_" + std::to_string(c)});
    for (size_t p = 0; p < cfg.problems; ++p) {
        Problem prob;
        prob.id = static_cast<int64_t>(p);
        prob.difficulty = 1 + static_cast<int>((p * static_cast<size_t>(cfg.difficulty_levels)) / cfg.problems);
        prob.text = "problem " + std::to_string(p) + " (level " + std::to_string(prob.difficulty) + ")";
        size_t k = 1 + static_cast<size_t>(kb_rng.uniform_int(0, static_cast<int64_t>(cfg.concepts_per_problem_max) - 1));
        std::vector<int64_t> pool(cfg.concepts);
        for (size_t i = 0; i < pool.size(); ++i) pool[i] = static_cast<int64_t>(i);
        kb_rng.shuffle(pool);
        prob.concept_ids.assign(pool.begin(), pool.begin() + static_cast<long>(k));
        std::sort(prob.concept_ids.begin(), prob.concept_ids.end());
        res.kb.problems.push_back(std::move(prob));
    }
    validate_knowledge_base(res.kb, cfg.difficulty_levels);

    // problems grouped by level for curriculum-matched picking
    std::vector<std::vector<size_t>> by_level(static_cast<size_t>(cfg.difficulty_levels));
    for (size_t p = 0; p < res.kb.problems.size(); ++p)
        by_level[static_cast<size_t>(res.kb.problems[p].difficulty - 1)].push_back(p);

    const int64_t base_time = 1569801600;  // fixed epoch origin for the corpus
    int64_t next_submission = 0;
    size_t total_users = cfg.students + cfg.short_students + cfg.staff;
    for (size_t u = 0; u < total_users; ++u) {
        int64_t uid = static_cast<int64_t>(u);
        bool is_staff = u >= cfg.students + cfg.short_students;
        bool is_short = !is_staff && u >= cfg.students;
        res.roles[uid] = is_staff ? "staff" : "student";

        Rng rng = Rng::derive(seed, 1000 + u);
        detail::CodeWriter writer{cfg, rng, {}};

        std::vector<double> mastery(cfg.concepts);
        for (double& m : mastery) m = rng.uniform(0.0, cfg.mastery_init_max);

        size_t n_events = is_short
                              ? static_cast<size_t>(rng.uniform_int(3, static_cast<int64_t>(cfg.min_events) / 2 + 3))
                              : static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(cfg.min_events),
                                                                    static_cast<int64_t>(cfg.max_events)));
        int64_t t = base_time + rng.uniform_int(0, 30 * 86400);

        for (size_t e = 0; e < n_events; ++e) {
            double overall = 0.0;
            for (double m : mastery) overall += m;
            overall /= static_cast<double>(cfg.concepts);

            double lv = 1.0 + overall * static_cast<double>(cfg.difficulty_levels - 1) +
                        rng.normal() * cfg.level_jitter;
            int level = static_cast<int>(std::lround(lv));
            level = std::max(1, std::min(cfg.difficulty_levels, level));
            const auto& candidates = by_level[static_cast<size_t>(level - 1)];
            size_t pidx = candidates[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(candidates.size()) - 1))];
            const Problem& prob = res.kb.problems[pidx];

            double m_p = 0.0;
            for (int64_t cid : prob.concept_ids) m_p += mastery[static_cast<size_t>(cid)];
            m_p /= static_cast<double>(prob.concept_ids.size());
            double margin = m_p - synth_difficulty_threshold(cfg, prob.difficulty);
            bool success = rng.bernoulli(synth_success_probability(cfg, m_p, prob.difficulty));

            Verdict verdict = Verdict::Correct;
            if (!success) {
                auto dist = detail::error_distribution(margin);
                std::vector<double> w(dist.begin(), dist.end());
                verdict = static_cast<Verdict>(1 + rng.weighted_index(w));
            }

            double gain = success ? cfg.learn_gain : detail::fail_gain(cfg, margin);
            for (int64_t cid : prob.concept_ids) {
                double& m = mastery[static_cast<size_t>(cid)];
                m += gain * (1.0 - m);
            }
            for (size_t c = 0; c < cfg.concepts; ++c) {
                bool touched = std::binary_search(prob.concept_ids.begin(), prob.concept_ids.end(),
                                                  static_cast<int64_t>(c));
                if (!touched) mastery[c] *= cfg.forget;
            }

            SubmissionEvent ev;
            ev.user_id = uid;
            ev.timestamp = t;
            ev.problem_id = prob.id;
            ev.verdict = verdict;
            ev.r = verdict_to_binary(verdict);
            ev.code = writer.emit(verdict);
            ev.submission_id = next_submission++;
            res.events.push_back(std::move(ev));

            if (rng.bernoulli(0.35)) {
                BehaviorKind kind = static_cast<BehaviorKind>(rng.uniform_int(0, 4));
                res.behaviors.push_back({uid, t - rng.uniform_int(1, 300), kind});
            }
            t += rng.uniform_int(600, 2 * 86400);
        }
    }
    return res;
}

}  // namespace pkt
