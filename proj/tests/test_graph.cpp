#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <queue>

#include "pkt/gat.hpp"
#include "pkt/graph.hpp"
#include "testutil.hpp"

using namespace pkt;

namespace {

KnowledgeBase tiny_kb() {
    KnowledgeBase kb;
    kb.concepts = {{0, "c0"}, {1, "c1"}};
    kb.problems = {{0, "p0", 1, {0}}, {1, "p1", 1, {0, 1}}};
    validate_knowledge_base(kb);
    return kb;
}

size_t bfs_distance(const BipartiteGraph& g, size_t from, size_t to) {
    std::vector<size_t> dist(g.num_nodes(), static_cast<size_t>(-1));
    std::queue<size_t> q;
    dist[from] = 0;
    q.push(from);
    while (!q.empty()) {
        size_t u = q.front();
        q.pop();
        for (size_t v : g.adj[u])
            if (dist[v] == static_cast<size_t>(-1)) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist[to];
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return d / (std::sqrt(na) * std::sqrt(nb) + 1e-12);
}

}  // namespace

TEST_CASE("build_graph counts and bipartite layout") {
    KnowledgeBase kb;
    kb.concepts = {{0, "c0"}};
    kb.problems = {{0, "p", 1, {0}}};
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    CHECK(g.num_nodes() == 2);
    CHECK(g.edges.size() == 1);
    // self loops live in the attention neighborhoods, not the edge list
    auto nbhd = gat_neighborhoods(g);
    CHECK(nbhd[0].front() == 0);
    CHECK(nbhd[1].front() == 1);
    CHECK(nbhd[0].size() == 2);

    for (const auto& [u, v] : g.edges) {
        CHECK(g.is_problem(u));
        CHECK(!g.is_problem(v));
    }
}

TEST_CASE("corpus-scale graph counting") {
    // 1054 problems, 106 concepts, one annotation each -> 1160 nodes, 1054 edges
    KnowledgeBase kb;
    for (int64_t c = 0; c < 106; ++c) kb.concepts.push_back({c, "c"});
    for (int64_t p = 0; p < 1054; ++p) kb.problems.push_back({p, "p", 1, {p % 106}});
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    CHECK(g.num_nodes() == 1160);
    CHECK(g.edges.size() == 1054);
}

TEST_CASE("problems sharing a concept sit at distance two") {
    KnowledgeBase kb;
    kb.concepts = {{0, "shared"}};
    kb.problems = {{0, "a", 1, {0}}, {1, "b", 1, {0}}};
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    CHECK(bfs_distance(g, 0, 1) == 2);
}

TEST_CASE("gat: self-only node reduces to sigma(W x_i)") {
    // a concept no problem references: neighborhood is just the self loop
    KnowledgeBase kb;
    kb.concepts = {{0, "used"}, {1, "unused"}};
    kb.problems = {{0, "p", 1, {0}}};
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);

    GatConfig cfg;
    cfg.layers = 1;
    cfg.feature_dim = 4;
    cfg.out_dim = 3;
    Rng rng(5);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);

    Tape tape;
    std::vector<std::vector<double>> attn;
    Tensor emb = gat_node_embeddings(tape, g, params, cfg, &attn);

    size_t unused_node = g.concept_node(1);
    REQUIRE(attn[unused_node].size() == 1);
    CHECK(attn[unused_node][0] == 1.0);  // single-element softmax

    // output row equals W x_i directly (identity activation on output layer)
    Tape t2;
    Tensor xi = t2.gather_rows(params.features, {unused_node});
    Tensor want = t2.matmul(xi, params.layers[0].W[0]);
    for (size_t j = 0; j < cfg.out_dim; ++j)
        CHECK(std::fabs(emb.at(unused_node, j) - want.at(0, j)) < 1e-12);
}

TEST_CASE("gat attention rows sum to one") {
    auto res_kb = tiny_kb();
    BipartiteGraph g = build_graph(res_kb);
    GatConfig cfg;
    cfg.feature_dim = 6;
    cfg.hidden_dim = 5;
    cfg.out_dim = 4;
    Rng rng(9);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);
    Tape tape;
    std::vector<std::vector<double>> attn;
    gat_node_embeddings(tape, g, params, cfg, &attn);
    for (const auto& row : attn) {
        double s = 0;
        for (double v : row) s += v;
        CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("identical concept sets and identical features give identical embeddings") {
    KnowledgeBase kb;
    kb.concepts = {{0, "c0"}, {1, "c1"}};
    kb.problems = {{0, "a", 1, {0, 1}}, {1, "b", 1, {0, 1}}};
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    GatConfig cfg;
    cfg.feature_dim = 5;
    cfg.out_dim = 4;
    Rng rng(3);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);
    // force identical initial features for the two problem nodes
    for (size_t j = 0; j < cfg.feature_dim; ++j)
        params.features.at(1, j) = params.features.at(0, j);
    Tape tape;
    Tensor emb = gat_node_embeddings(tape, g, params, cfg);
    for (size_t j = 0; j < cfg.out_dim; ++j)
        CHECK(emb.at(0, j) == emb.at(1, j));
}

TEST_CASE("gat permutation invariance (relabel problems consistently)") {
    auto kb = tiny_kb();
    BipartiteGraph g = build_graph(kb);
    GatConfig cfg;
    cfg.feature_dim = 4;
    cfg.hidden_dim = 4;
    cfg.out_dim = 3;
    Rng rng(11);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);
    Tape tape;
    Tensor emb = gat_node_embeddings(tape, g, params, cfg);

    // swap the two problems (and their feature rows)
    KnowledgeBase kb2;
    kb2.concepts = kb.concepts;
    kb2.problems = {kb.problems[1], kb.problems[0]};
    validate_knowledge_base(kb2);
    BipartiteGraph g2 = build_graph(kb2);
    GatParams params2 = params;
    params2.features = params.features.detached_copy();
    for (size_t j = 0; j < cfg.feature_dim; ++j) {
        params2.features.at(0, j) = params.features.at(1, j);
        params2.features.at(1, j) = params.features.at(0, j);
    }
    Tape t2;
    Tensor emb2 = gat_node_embeddings(t2, g2, params2, cfg);
    for (size_t j = 0; j < cfg.out_dim; ++j) {
        CHECK(std::fabs(emb.at(0, j) - emb2.at(1, j)) < 1e-12);
        CHECK(std::fabs(emb.at(1, j) - emb2.at(0, j)) < 1e-12);
    }
}

TEST_CASE("gat gradients pass the finite-difference check") {
    auto kb = tiny_kb();
    BipartiteGraph g = build_graph(kb);
    GatConfig cfg;
    cfg.feature_dim = 3;
    cfg.hidden_dim = 4;
    cfg.out_dim = 3;
    Rng rng(17);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);
    auto fwd = [&](Tape& t) {
        Tensor table = gat_problem_table(t, g, params, cfg);
        return t.sum_all(t.tanh_t(table));
    };
    auto res = testutil::grad_check(params.all(), fwd, 40, 1e-5, &rng);
    CHECK(res.max_rel < 1e-4);
}

TEST_CASE("two-head gat keeps shapes and attention normalization") {
    auto kb = tiny_kb();
    BipartiteGraph g = build_graph(kb);
    GatConfig cfg;
    cfg.heads = 2;
    cfg.feature_dim = 4;
    cfg.hidden_dim = 3;
    cfg.out_dim = 5;
    Rng rng(23);
    GatParams params = GatParams::init(cfg, g.num_nodes(), rng);
    Tape tape;
    std::vector<std::vector<double>> attn;
    Tensor emb = gat_node_embeddings(tape, g, params, cfg, &attn);
    CHECK(emb.rows() == g.num_nodes());
    CHECK(emb.cols() == cfg.out_dim);
    for (const auto& row : attn) {
        double s = 0;
        for (double v : row) s += v;
        CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("node2vec: walks alternate sides on a single pair") {
    KnowledgeBase kb;
    kb.concepts = {{0, "c"}};
    kb.problems = {{0, "p", 1, {0}}};
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    Node2VecConfig cfg;
    cfg.walks_per_node = 2;
    cfg.walk_length = 6;
    auto walks = node2vec_walks(g, cfg, 3);
    REQUIRE(!walks.empty());
    for (const auto& w : walks)
        for (size_t i = 1; i < w.size(); ++i)
            CHECK(g.is_problem(w[i]) != g.is_problem(w[i - 1]));
}

TEST_CASE("node2vec deterministic and sensitive to seed") {
    auto kb = tiny_kb();
    BipartiteGraph g = build_graph(kb);
    Node2VecConfig cfg;
    cfg.sgns.dim = 8;
    cfg.sgns.epochs = 1;
    auto a = node2vec_embed(g, cfg, 5);
    auto b = node2vec_embed(g, cfg, 5);
    CHECK(a == b);
    auto c = node2vec_embed(g, cfg, 6);
    CHECK(a != c);

    Node2VecConfig bad;
    bad.p = 0.0;
    CHECK_THROWS_AS(node2vec_walks(g, bad, 1), config_error);
}

TEST_CASE("node2vec: shared concepts pull problems together") {
    // 20 problems: pairs (2i, 2i+1) share both concepts of cluster i; problems
    // from different clusters share none.
    KnowledgeBase kb;
    for (int64_t c = 0; c < 20; ++c) kb.concepts.push_back({c, "c"});
    for (int64_t p = 0; p < 20; ++p) {
        int64_t cluster = p / 2;
        kb.problems.push_back({p, "p", 1, {2 * cluster, 2 * cluster + 1}});
    }
    validate_knowledge_base(kb);
    BipartiteGraph g = build_graph(kb);
    Node2VecConfig cfg;
    cfg.sgns.dim = 16;
    cfg.sgns.epochs = 4;
    cfg.walks_per_node = 8;
    cfg.walk_length = 12;
    auto table = node2vec_embed(g, cfg, 91);

    double same = 0.0, cross = 0.0;
    size_t same_n = 0, cross_n = 0;
    for (size_t p = 0; p < 20; p += 2) {
        same += cosine(table[p], table[p + 1]);
        ++same_n;
    }
    for (size_t p = 0; p < 20; ++p)
        for (size_t q = 0; q < 20; ++q) {
            if (p / 2 == q / 2 || p == q) continue;
            cross += cosine(table[p], table[q]);
            ++cross_n;
        }
    CHECK(same / static_cast<double>(same_n) > cross / static_cast<double>(cross_n));
}
