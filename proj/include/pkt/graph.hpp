// Problem-concept bipartite graph and the random-walk embedding backend.
// Node indexing: problems occupy [0, P), concepts [P, P+C). Edges connect
// problems to concepts only; bipartiteness is asserted on every edge.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pkt/data.hpp"
#include "pkt/errors.hpp"
#include "pkt/rng.hpp"
#include "pkt/sgns.hpp"

namespace pkt {

struct BipartiteGraph {
    size_t n_problems = 0;
    size_t n_concepts = 0;
    std::vector<std::vector<size_t>> adj;              // sorted neighbor lists, no self loops
    std::vector<std::pair<size_t, size_t>> edges;      // (problem node, concept node)
    std::vector<int64_t> problem_ids;                  // node index -> problem id

    size_t num_nodes() const { return n_problems + n_concepts; }
    bool is_problem(size_t node) const { return node < n_problems; }
    size_t concept_node(int64_t concept_id) const {
        return n_problems + static_cast<size_t>(concept_id);
    }
};

// One node per problem and per concept, one edge per annotation. Self loops
// are not stored; the attention layer adds them to each neighborhood.
inline BipartiteGraph build_graph(const KnowledgeBase& kb) {
    BipartiteGraph g;
    g.n_problems = kb.problems.size();
    g.n_concepts = kb.concepts.size();
    g.adj.assign(g.num_nodes(), {});
    g.problem_ids.reserve(g.n_problems);
    for (size_t p = 0; p < kb.problems.size(); ++p) {
        g.problem_ids.push_back(kb.problems[p].id);
        for (int64_t cid : kb.problems[p].concept_ids) {
            size_t cnode = g.concept_node(cid);
            if (p >= g.n_problems || cnode < g.n_problems || cnode >= g.num_nodes())
                throw contract_error("build_graph: edge endpoints violate bipartite layout");
            g.adj[p].push_back(cnode);
            g.adj[cnode].push_back(p);
            g.edges.emplace_back(p, cnode);
        }
    }
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

// ---- node2vec ---------------------------------------------------------------

struct Node2VecConfig {
    size_t walks_per_node = 10;
    size_t walk_length = 20;
    double p = 1.0;  // return parameter
    double q = 1.0;  // in-out parameter
    SgnsConfig sgns{.dim = 64, .window = 5, .negatives = 5, .epochs = 3, .lr = 0.025};

    void validate() const {
        if (p <= 0.0 || q <= 0.0) throw config_error("node2vec: p and q must be > 0");
        if (walks_per_node < 1 || walk_length < 2)
            throw config_error("node2vec: need walks_per_node >= 1 and walk_length >= 2");
    }
};

// Biased second-order random walks (Grover-Leskovec transition weights).
inline std::vector<std::vector<size_t>> node2vec_walks(const BipartiteGraph& g,
                                                       const Node2VecConfig& cfg, uint64_t seed) {
    cfg.validate();
    std::vector<std::vector<size_t>> walks;
    Rng rng = Rng::derive(seed, 29);
    std::vector<double> w;
    for (size_t rep = 0; rep < cfg.walks_per_node; ++rep) {
        for (size_t start = 0; start < g.num_nodes(); ++start) {
            if (g.adj[start].empty()) continue;
            std::vector<size_t> walk{start};
            size_t prev = start;
            size_t cur = g.adj[start][static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(g.adj[start].size()) - 1))];
            walk.push_back(cur);
            while (walk.size() < cfg.walk_length) {
                const auto& nbrs = g.adj[cur];
                if (nbrs.empty()) break;
                w.resize(nbrs.size());
                for (size_t i = 0; i < nbrs.size(); ++i) {
                    size_t x = nbrs[i];
                    if (x == prev) w[i] = 1.0 / cfg.p;
                    else if (std::binary_search(g.adj[prev].begin(), g.adj[prev].end(), x)) w[i] = 1.0;
                    else w[i] = 1.0 / cfg.q;
                }
                size_t nxt = nbrs[rng.weighted_index(w)];
                walk.push_back(nxt);
                prev = cur;
                cur = nxt;
            }
            walks.push_back(std::move(walk));
        }
    }
    return walks;
}

// Frozen problem vectors from skip-gram over the walks. Row i of the result
// corresponds to problem node i (== kb problem position).
inline std::vector<std::vector<double>> node2vec_embed(const BipartiteGraph& g,
                                                       const Node2VecConfig& cfg, uint64_t seed) {
    auto walks = node2vec_walks(g, cfg, seed);
    std::vector<int64_t> counts(g.num_nodes(), 0);
    for (const auto& walk : walks)
        for (size_t node : walk) ++counts[node];
    SgnsModel model = sgns_train(walks, g.num_nodes(), counts, cfg.sgns, seed);
    std::vector<std::vector<double>> table(g.n_problems, std::vector<double>(cfg.sgns.dim, 0.0));
    for (size_t pnode = 0; pnode < g.n_problems; ++pnode)
        for (size_t j = 0; j < cfg.sgns.dim; ++j) table[pnode][j] = model.in_vec(pnode)[j];
    return table;
}

}  // namespace pkt
