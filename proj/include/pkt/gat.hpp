// Graph attention embedding over the bipartite problem-concept graph, built
// on the autodiff tape so the problem table can train end-to-end with the
// downstream loss. Per layer and head, node i attends over N(i) u {i} with
// scores LeakyReLU(a . [W x_i ++ W x_j]), softmax-normalized; hidden layers
// apply tanh, the output layer is linear. Hidden layers concatenate heads,
// the output layer averages them.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pkt/graph.hpp"
#include "pkt/rng.hpp"
#include "pkt/tensor.hpp"

namespace pkt {

struct GatConfig {
    size_t layers = 2;
    size_t heads = 1;
    size_t feature_dim = 64;  // learned node feature width (input layer)
    size_t hidden_dim = 64;   // per-head hidden width
    size_t out_dim = 64;      // problem embedding width d1
    double leaky_slope = 0.2;

    void validate() const {
        if (layers < 1) throw config_error("gat: layers must be >= 1");
        if (heads < 1) throw config_error("gat: heads must be >= 1");
        if (feature_dim == 0 || hidden_dim == 0 || out_dim == 0)
            throw config_error("gat: zero layer width");
    }
};

struct GatLayerParams {
    std::vector<Tensor> W;      // per head: in_dim x head_out
    std::vector<Tensor> a_src;  // per head: head_out x 1
    std::vector<Tensor> a_dst;  // per head: head_out x 1
};

struct GatParams {
    Tensor features;  // |V| x feature_dim, learned free node features
    std::vector<GatLayerParams> layers;

    static GatParams init(const GatConfig& cfg, size_t num_nodes, Rng& rng) {
        cfg.validate();
        GatParams p;
        p.features = Tensor::uniform_fanin(num_nodes, cfg.feature_dim, rng, true);
        size_t in_dim = cfg.feature_dim;
        for (size_t l = 0; l < cfg.layers; ++l) {
            bool last = l + 1 == cfg.layers;
            size_t head_out = last ? cfg.out_dim : cfg.hidden_dim;
            GatLayerParams lp;
            for (size_t h = 0; h < cfg.heads; ++h) {
                lp.W.push_back(Tensor::uniform_fanin(in_dim, head_out, rng, true));
                lp.a_src.push_back(Tensor::uniform_fanin(head_out, 1, rng, true));
                lp.a_dst.push_back(Tensor::uniform_fanin(head_out, 1, rng, true));
            }
            p.layers.push_back(std::move(lp));
            in_dim = last ? head_out : head_out * cfg.heads;
        }
        return p;
    }

    std::vector<Tensor> all() const {
        std::vector<Tensor> v{features};
        for (const auto& l : layers) {
            for (const auto& t : l.W) v.push_back(t);
            for (const auto& t : l.a_src) v.push_back(t);
            for (const auto& t : l.a_dst) v.push_back(t);
        }
        return v;
    }
};

// Neighborhoods with the self loop first, then sorted neighbors.
inline std::vector<std::vector<size_t>> gat_neighborhoods(const BipartiteGraph& g) {
    std::vector<std::vector<size_t>> nbhd(g.num_nodes());
    for (size_t i = 0; i < g.num_nodes(); ++i) {
        nbhd[i].reserve(g.adj[i].size() + 1);
        nbhd[i].push_back(i);
        nbhd[i].insert(nbhd[i].end(), g.adj[i].begin(), g.adj[i].end());
    }
    return nbhd;
}

// Full node embedding matrix |V| x out_dim. `attn_out`, when non-null,
// collects each node's attention row per layer/head (for invariant checks).
inline Tensor gat_node_embeddings(Tape& tape, const BipartiteGraph& g, const GatParams& params,
                                  const GatConfig& cfg,
                                  std::vector<std::vector<double>>* attn_out = nullptr) {
    cfg.validate();
    auto nbhd = gat_neighborhoods(g);
    Tensor x = params.features;
    for (size_t l = 0; l < cfg.layers; ++l) {
        bool last = l + 1 == cfg.layers;
        const GatLayerParams& lp = params.layers[l];
        std::vector<Tensor> head_stacks;
        for (size_t h = 0; h < cfg.heads; ++h) {
            Tensor hw = tape.matmul(x, lp.W[h]);            // V x F
            Tensor s_src = tape.matmul(hw, lp.a_src[h]);    // V x 1
            Tensor s_dst = tape.matmul(hw, lp.a_dst[h]);    // V x 1
            std::vector<Tensor> rows;
            rows.reserve(g.num_nodes());
            for (size_t i = 0; i < g.num_nodes(); ++i) {
                Tensor si = tape.gather_rows(s_src, {i});                    // 1 x 1
                Tensor sj = tape.gather_rows(s_dst, nbhd[i]);                // deg x 1
                Tensor e = tape.leaky_relu(tape.transpose(tape.add_scalar_t(sj, si)),
                                           cfg.leaky_slope);                 // 1 x deg
                Tensor alpha = tape.softmax_row(e);
                if (attn_out) attn_out->push_back(alpha.values());
                rows.push_back(tape.weighted_rows(alpha, hw, nbhd[i]));      // 1 x F
            }
            head_stacks.push_back(tape.stack_rows(rows));
        }
        Tensor combined;
        if (cfg.heads == 1) {
            combined = head_stacks[0];
        } else if (last) {
            combined = head_stacks[0];
            for (size_t h = 1; h < cfg.heads; ++h) combined = tape.add(combined, head_stacks[h]);
            combined = tape.scale(combined, 1.0 / static_cast<double>(cfg.heads));
        } else {
            combined = head_stacks[0];
            for (size_t h = 1; h < cfg.heads; ++h) combined = tape.concat_cols(combined, head_stacks[h]);
        }
        x = last ? combined : tape.tanh_t(combined);
    }
    return x;
}

// Problem rows of the final layer: P x out_dim, aligned with kb problem order.
inline Tensor gat_problem_table(Tape& tape, const BipartiteGraph& g, const GatParams& params,
                                const GatConfig& cfg) {
    Tensor emb = gat_node_embeddings(tape, g, params, cfg);
    std::vector<size_t> idx(g.n_problems);
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return tape.gather_rows(emb, idx);
}

// Optional standalone warm-up: binary cross-entropy on observed edges against
// an equal number of sampled non-edges, scored by sigmoid(z_u . z_v).
inline double gat_edge_warmup_loss(Tape& tape, const BipartiteGraph& g, const GatParams& params,
                                   const GatConfig& cfg, Rng& rng, Tensor* loss_out) {
    Tensor emb = gat_node_embeddings(tape, g, params, cfg);
    std::vector<Tensor> preds;
    std::vector<double> labels;
    for (const auto& [u, v] : g.edges) {
        Tensor zu = tape.gather_rows(emb, {u});
        Tensor zv = tape.gather_rows(emb, {v});
        preds.push_back(tape.sigmoid_t(tape.dot(zu, zv)));
        labels.push_back(1.0);
        size_t ru = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(g.n_problems) - 1));
        size_t rv = g.n_problems + static_cast<size_t>(
                        rng.uniform_int(0, static_cast<int64_t>(g.n_concepts) - 1));
        if (!std::binary_search(g.adj[ru].begin(), g.adj[ru].end(), rv)) {
            Tensor nu = tape.gather_rows(emb, {ru});
            Tensor nv = tape.gather_rows(emb, {rv});
            preds.push_back(tape.sigmoid_t(tape.dot(nu, nv)));
            labels.push_back(0.0);
        }
    }
    Tensor pred = tape.stack_rows(preds);
    Tensor target = Tensor::zeros(pred.rows(), 1);
    for (size_t i = 0; i < labels.size(); ++i) target.at(i, 0) = labels[i];
    Tensor mask = Tensor::full(pred.rows(), 1, 1.0);
    Tensor loss = tape.scale(tape.bce_loss(pred, target, mask), 1.0 / static_cast<double>(labels.size()));
    if (loss_out) *loss_out = loss;
    return loss.item();
}

}  // namespace pkt
