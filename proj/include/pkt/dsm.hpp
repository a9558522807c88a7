// Double-sequence model: two tanh recurrences (problem branch over p_k [++ r_k],
// code branch over d_k), attention against the queried problem with an
// exponential time decay, weighted aggregation, and a sigmoid head.
//
// Attention weights at target step t over history k = 1..t-1 use the time
// difference vector D = [t-2, ..., 1, 0]. The decay scales the softmax
// numerators: enabled A = softmax(S - lambda*D), disabled A = softmax(-lambda*D)
// (similarities ignored). At lambda = 0 the enabled mode is exactly plain
// softmax attention; as lambda grows both modes concentrate on k = t-1.
//
// Causality: the prediction for step t reads the query problem p_t and steps
// strictly before t; d_t, r_t and anything later never enter.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pkt/errors.hpp"
#include "pkt/rng.hpp"
#include "pkt/tensor.hpp"

namespace pkt {

struct DsmConfig {
    size_t problem_dim = 64;  // d1
    size_t code_dim = 64;     // d0
    size_t hidden = 128;      // H
    size_t fusion_dim = 128;
    double lambda = 0.6;
    bool attention = true;           // similarity-driven vs decay-only weights
    bool past_response = true;       // append r_k to the problem-branch input
    bool literal_recurrence = false; // cross-coupled g-update variant
    bool problem_branch = true;
    bool code_branch = true;
    // weighting for a lone branch: full (similarity + decay when the query
    // exists), decay (softmax(-lambda D)), last (take state t-1)
    std::string single_branch_attention = "full";

    void validate() const {
        if (lambda < 0.0) throw config_error("dsm: lambda must be >= 0");
        if (!problem_branch && !code_branch)
            throw config_error("dsm: at least one branch must be enabled");
        if (hidden == 0 || fusion_dim == 0) throw config_error("dsm: zero width");
        if (problem_branch && problem_dim == 0) throw config_error("dsm: zero problem_dim");
        if (code_branch && code_dim == 0) throw config_error("dsm: zero code_dim");
        if (literal_recurrence && !(problem_branch && code_branch))
            throw config_error("dsm: literal_recurrence needs both branches");
        if (single_branch_attention != "full" && single_branch_attention != "decay" &&
            single_branch_attention != "last")
            throw config_error("dsm: single_branch_attention must be full|decay|last");
    }
};

struct DsmParams {
    Tensor Wg, Ug, bg;      // problem recurrence
    Tensor Wh, Uh, bh;      // code recurrence
    Tensor Qg, Qg_b;        // query projection, problem branch
    Tensor Qh, Qh_b;        // query projection, code branch
    Tensor Fg, Fg_b;        // fusion FC, problem side
    Tensor Fh, Fh_b;        // fusion FC, code side
    Tensor out_w, out_b;    // final linear before the sigmoid

    static DsmParams init(const DsmConfig& cfg, Rng& rng) {
        cfg.validate();
        DsmParams p;
        size_t h = cfg.hidden, f = cfg.fusion_dim;
        if (cfg.problem_branch) {
            size_t in = cfg.problem_dim + (cfg.past_response ? 1 : 0);
            p.Wg = Tensor::uniform_fanin(h, h, rng, true);
            p.Ug = Tensor::uniform_fanin(in, h, rng, true);
            p.bg = Tensor::zeros(1, h, true);
            p.Qg = Tensor::uniform_fanin(cfg.problem_dim, h, rng, true);
            p.Qg_b = Tensor::zeros(1, h, true);
            p.Fg = Tensor::uniform_fanin(h + cfg.problem_dim, f, rng, true);
            p.Fg_b = Tensor::zeros(1, f, true);
        }
        if (cfg.code_branch) {
            p.Wh = Tensor::uniform_fanin(h, h, rng, true);
            p.Uh = Tensor::uniform_fanin(cfg.code_dim, h, rng, true);
            p.bh = Tensor::zeros(1, h, true);
            if (cfg.problem_branch) {
                p.Qh = Tensor::uniform_fanin(cfg.problem_dim, h, rng, true);
                p.Qh_b = Tensor::zeros(1, h, true);
            }
            size_t fuse_in = h + (cfg.problem_branch ? cfg.problem_dim : 0);
            p.Fh = Tensor::uniform_fanin(fuse_in, f, rng, true);
            p.Fh_b = Tensor::zeros(1, f, true);
        }
        size_t head_in = (cfg.problem_branch ? f : 0) + (cfg.code_branch ? f : 0);
        p.out_w = Tensor::uniform_fanin(head_in, 1, rng, true);
        p.out_b = Tensor::zeros(1, 1, true);
        return p;
    }

    std::vector<Tensor> all() const {
        std::vector<Tensor> v;
        for (const Tensor* t : {&Wg, &Ug, &bg, &Wh, &Uh, &bh, &Qg, &Qg_b, &Qh, &Qh_b,
                                &Fg, &Fg_b, &Fh, &Fh_b, &out_w, &out_b})
            if (t->valid()) v.push_back(*t);
        return v;
    }
};

// The time-step difference vector for a history of length m: [m-1, ..., 1, 0].
inline std::vector<double> decay_time_diffs(size_t history_len) {
    std::vector<double> d(history_len);
    for (size_t k = 0; k < history_len; ++k)
        d[k] = static_cast<double>(history_len - 1 - k);
    return d;
}

// Attention over a history prefix. `scores` may be invalid when the weights
// are decay-only.
inline Tensor decay_attention(Tape& tape, const Tensor& scores, size_t history_len, double lambda,
                              bool attention_enabled) {
    std::vector<double> d = decay_time_diffs(history_len);
    for (double& x : d) x *= -lambda;
    Tensor decay = Tensor::row(std::move(d));
    if (!attention_enabled || !scores.valid()) return tape.softmax_row(decay);
    return tape.softmax_row(tape.add(scores, decay));
}

struct DsmWindowInput {
    std::vector<size_t> problem_rows;   // index into the problem table
    std::vector<int> responses;         // r_k bits
    std::vector<size_t> code_rows;      // index into the code table
    std::vector<Tensor> code_vecs;      // optional on-tape embeddings (fine-tune path)

    size_t length() const { return problem_rows.size(); }
};

struct DsmTrace {
    std::vector<std::vector<double>> attn_g, attn_h;  // one row per target step
};

struct DsmForward {
    Tensor loss;  // masked BCE sum over the window's targets
    std::vector<double> preds;
    std::vector<int> targets;
};

inline DsmForward dsm_forward_window(Tape& tape, const DsmWindowInput& in,
                                     const Tensor& problem_table, const Tensor& code_table,
                                     const DsmParams& p, const DsmConfig& cfg,
                                     DsmTrace* trace = nullptr) {
    cfg.validate();
    size_t n = in.length();
    if (n < 2)
        throw contract_error("dsm_forward_window: need >= 2 steps, got " + std::to_string(n));
    if (in.responses.size() != n)
        throw dim_error("dsm_forward_window: responses length mismatch");
    if (cfg.code_branch && in.code_vecs.empty() && in.code_rows.size() != n)
        throw dim_error("dsm_forward_window: code_rows length mismatch");

    bool has_query = cfg.problem_branch;
    std::vector<Tensor> states_g, states_h;
    states_g.reserve(n - 1);
    states_h.reserve(n - 1);
    Tensor g_prev = Tensor::zeros(1, cfg.hidden);  // newbie start: zero states
    Tensor h_prev = Tensor::zeros(1, cfg.hidden);
    for (size_t k = 0; k + 1 < n; ++k) {
        Tensor g_next, h_next;
        if (cfg.code_branch) {
            Tensor d_k = in.code_vecs.empty() ? tape.gather_rows(code_table, {in.code_rows[k]})
                                              : in.code_vecs[k];
            h_next = tape.tanh_t(
                tape.add(tape.add(tape.matmul(h_prev, p.Wh), tape.matmul(d_k, p.Uh)), p.bh));
        }
        if (cfg.problem_branch) {
            Tensor x = tape.gather_rows(problem_table, {in.problem_rows[k]});
            if (cfg.past_response)
                x = tape.concat_cols(x, Tensor::scalar(static_cast<double>(in.responses[k])));
            const Tensor& rec_state = cfg.literal_recurrence ? h_prev : g_prev;
            g_next = tape.tanh_t(
                tape.add(tape.add(tape.matmul(rec_state, p.Wg), tape.matmul(x, p.Ug)), p.bg));
        }
        if (cfg.problem_branch) {
            states_g.push_back(g_next);
            g_prev = g_next;
        }
        if (cfg.code_branch) {
            states_h.push_back(h_next);
            h_prev = h_next;
        }
    }

    bool both = cfg.problem_branch && cfg.code_branch;
    std::vector<Tensor> preds;
    std::vector<double> pred_vals;
    std::vector<int> targets;
    preds.reserve(n - 1);

    for (size_t t = 1; t < n; ++t) {
        size_t hist = t;  // states 0..t-1 available
        Tensor query;
        if (has_query) query = tape.gather_rows(problem_table, {in.problem_rows[t]});

        auto branch_output = [&](const std::vector<Tensor>& states, const Tensor& Qw,
                                 const Tensor& Qb, std::vector<std::vector<double>>* attn_log) {
            std::span<const Tensor> hist_states(states.data(), hist);
            bool use_similarity = cfg.attention && has_query;
            std::string mode = both ? (use_similarity ? "full" : "decay")
                                    : (use_similarity && cfg.single_branch_attention == "full"
                                           ? "full"
                                           : (cfg.single_branch_attention == "last" ? "last"
                                                                                    : "decay"));
            if (!cfg.attention && mode == "full") mode = "decay";
            if (mode == "last") {
                if (attn_log) {
                    std::vector<double> one_hot(hist, 0.0);
                    one_hot[hist - 1] = 1.0;
                    attn_log->push_back(std::move(one_hot));
                }
                return hist_states[hist - 1];
            }
            Tensor scores;
            if (mode == "full") {
                Tensor q_proj = tape.add_row(tape.matmul(query, Qw), Qb);
                scores = tape.attn_scores(q_proj, hist_states);
            }
            Tensor weights = decay_attention(tape, scores, hist, cfg.lambda, mode == "full");
            if (attn_log) attn_log->push_back(weights.values());
            return tape.attn_mix(weights, hist_states);
        };

        Tensor fused;
        if (cfg.code_branch) {
            Tensor o_h = branch_output(states_h, p.Qh, p.Qh_b, trace ? &trace->attn_h : nullptr);
            Tensor in_h = has_query ? tape.concat_cols(o_h, query) : o_h;
            fused = tape.tanh_t(tape.add_row(tape.matmul(in_h, p.Fh), p.Fh_b));
        }
        if (cfg.problem_branch) {
            Tensor o_g = branch_output(states_g, p.Qg, p.Qg_b, trace ? &trace->attn_g : nullptr);
            Tensor z_g = tape.tanh_t(
                tape.add_row(tape.matmul(tape.concat_cols(o_g, query), p.Fg), p.Fg_b));
            fused = fused.valid() ? tape.concat_cols(fused, z_g) : z_g;
        }
        Tensor rhat = tape.sigmoid_t(tape.add_row(tape.matmul(fused, p.out_w), p.out_b));
        preds.push_back(rhat);
        pred_vals.push_back(rhat.item());
        targets.push_back(in.responses[t]);
    }

    Tensor pred_col = tape.stack_rows(preds);
    Tensor target_col = Tensor::zeros(preds.size(), 1);
    for (size_t i = 0; i < targets.size(); ++i) target_col.at(i, 0) = targets[i];
    Tensor mask = Tensor::full(preds.size(), 1, 1.0);

    DsmForward out;
    out.loss = tape.bce_loss(pred_col, target_col, mask);
    out.preds = std::move(pred_vals);
    out.targets = std::move(targets);
    return out;
}

}  // namespace pkt
