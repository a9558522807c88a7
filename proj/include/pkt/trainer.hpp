// End-to-end training: Adam over minibatches of windows, per-epoch test AUC,
// multi-seed averaging, the ablation grid, and the lambda sweep. The
// train/test split is by student (never by window) under a dedicated split
// seed shared by every run, so variants and lambda points compare on the
// identical split.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pkt/artifact.hpp"
#include "pkt/data.hpp"
#include "pkt/dsm.hpp"
#include "pkt/gat.hpp"
#include "pkt/graph.hpp"
#include "pkt/metrics.hpp"
#include "pkt/optim.hpp"
#include "pkt/rng.hpp"

namespace pkt {

struct TrainerConfig {
    DsmConfig dsm;
    GatConfig gat;                      // gat.out_dim must equal dsm.problem_dim
    std::string problem_backend = "gat";  // gat | node2vec
    bool train_problem_embed = true;      // end-to-end vs frozen table
    bool use_meanpool_codes = false;      // unsupervised code vectors (ablation)
    double lr = 1e-3;
    size_t batch_size = 8;
    size_t epochs = 10;
    size_t seq_len = 200;
    double split_ratio = 0.8;
    uint64_t split_seed = 13;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};

    void validate() const {
        dsm.validate();
        if (problem_backend != "gat" && problem_backend != "node2vec")
            throw config_error("trainer: problem_backend must be gat|node2vec");
        if (problem_backend == "gat" && cfg_gat_out() != dsm.problem_dim)
            throw config_error("trainer: gat out_dim " + std::to_string(cfg_gat_out()) +
                               " != problem_dim " + std::to_string(dsm.problem_dim));
        if (batch_size == 0 || epochs == 0) throw config_error("trainer: zero batch/epochs");
        if (split_ratio <= 0.0 || split_ratio >= 1.0)
            throw config_error("trainer: split_ratio outside (0,1)");
        if (seeds.empty()) throw config_error("trainer: need at least one seed");
        if (lr <= 0.0) throw config_error("trainer: lr must be > 0");
    }
    size_t cfg_gat_out() const { return gat.out_dim; }
};

// Everything a training run consumes, prepared once per corpus.
struct TrainContext {
    KnowledgeBase kb;
    BipartiteGraph graph;
    std::vector<StudentSequence> seqs;
    std::vector<std::vector<double>> code_table;          // supervised embeddings, by submission id
    std::vector<std::vector<double>> meanpool_code_table; // unsupervised variant (may be empty)
    std::vector<std::vector<double>> node2vec_table;      // frozen problem vectors (may be empty)
};

struct SeedResult {
    uint64_t seed = 0;
    double auc = 0.0;        // best-epoch test AUC (the reported number)
    double final_auc = 0.0;  // last-epoch test AUC (what the checkpoint reproduces)
    size_t best_epoch = 0;
    std::vector<double> epoch_train_loss;
    std::vector<double> epoch_test_auc;
    std::vector<double> first_epoch_batch_loss;
};

struct EvalReport {
    std::vector<SeedResult> per_seed;
    double mean_auc = 0.0;        // arithmetic mean of per-seed (best-epoch) AUCs
    double mean_final_auc = 0.0;
    size_t train_students = 0, test_students = 0;
    size_t train_windows = 0, test_windows = 0;
    size_t train_targets = 0, test_targets = 0;
};

struct TrainedModel {
    DsmConfig dsm_cfg;
    DsmParams dsm;
    std::string backend = "gat";
    bool gat_trainable = true;
    GatConfig gat_cfg;
    GatParams gat;                                   // backend == gat
    std::vector<std::vector<double>> frozen_table;   // backend == node2vec
    uint64_t seed = 0;
};

namespace detail {

inline Tensor matrix_tensor(const std::vector<std::vector<double>>& m, bool requires_grad = false) {
    if (m.empty()) throw contract_error("matrix_tensor: empty matrix");
    Tensor t = Tensor::zeros(m.size(), m[0].size(), requires_grad);
    for (size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m[0].size()) throw contract_error("matrix_tensor: ragged matrix");
        for (size_t j = 0; j < m[i].size(); ++j) t.at(i, j) = m[i][j];
    }
    return t;
}

inline DsmWindowInput window_input(const Window& w, const KnowledgeBase& kb) {
    DsmWindowInput in;
    in.problem_rows.reserve(w.valid_len);
    for (size_t k = 0; k < w.valid_len; ++k) {
        in.problem_rows.push_back(kb.index_of(w.problem_ids[k]));
        in.responses.push_back(w.responses[k]);
        in.code_rows.push_back(static_cast<size_t>(w.submission_ids[k]));
    }
    return in;
}

}  // namespace detail

// Student-level holdout: shuffle user ids under split_seed, first split_ratio
// go to train. No user appears on both sides.
inline std::pair<std::vector<int64_t>, std::vector<int64_t>> split_students(
    const std::vector<StudentSequence>& seqs, double ratio, uint64_t split_seed) {
    std::vector<int64_t> ids;
    ids.reserve(seqs.size());
    for (const auto& s : seqs) ids.push_back(s.user_id);
    std::sort(ids.begin(), ids.end());
    Rng rng = Rng::derive(split_seed, 7);
    rng.shuffle(ids);
    size_t n_train = static_cast<size_t>(ratio * static_cast<double>(ids.size()));
    n_train = std::max<size_t>(1, std::min(ids.size() - 1, n_train));
    std::vector<int64_t> train(ids.begin(), ids.begin() + static_cast<long>(n_train));
    std::vector<int64_t> test(ids.begin() + static_cast<long>(n_train), ids.end());
    return {train, test};
}

struct PreparedSplit {
    std::vector<DsmWindowInput> train_inputs, test_inputs;
    std::vector<int> test_labels_flat;  // concatenated targets, fixed order
    size_t train_students = 0, test_students = 0;
    size_t train_targets = 0, test_targets = 0;
};

inline PreparedSplit prepare_split(const TrainContext& ctx, const TrainerConfig& cfg) {
    auto [train_ids, test_ids] = split_students(ctx.seqs, cfg.split_ratio, cfg.split_seed);
    std::vector<int64_t> train_sorted = train_ids, test_sorted = test_ids;
    std::sort(train_sorted.begin(), train_sorted.end());
    std::sort(test_sorted.begin(), test_sorted.end());
    PreparedSplit out;
    out.train_students = train_ids.size();
    out.test_students = test_ids.size();
    auto windows = window_sequences(ctx.seqs, cfg.seq_len);
    for (const Window& w : windows) {
        if (w.num_targets() == 0) continue;  // no history to learn from
        bool is_train = std::binary_search(train_sorted.begin(), train_sorted.end(), w.user_id);
        bool is_test = std::binary_search(test_sorted.begin(), test_sorted.end(), w.user_id);
        if (!is_train && !is_test) continue;
        DsmWindowInput in = detail::window_input(w, ctx.kb);
        if (is_train) {
            out.train_targets += w.num_targets();
            out.train_inputs.push_back(std::move(in));
        } else {
            out.test_targets += w.num_targets();
            for (size_t t = 1; t < in.responses.size(); ++t)
                out.test_labels_flat.push_back(in.responses[t]);
            out.test_inputs.push_back(std::move(in));
        }
    }
    if (out.train_inputs.empty() || out.test_inputs.empty())
        throw data_error("trainer: empty train or test split after windowing");
    return out;
}

// Problem table for inference: recomputed from the gat weights or taken from
// the frozen backend table; always detached constants.
inline Tensor eval_problem_table(const TrainedModel& model, const BipartiteGraph& graph) {
    if (model.backend == "gat") {
        Tape tape;
        return gat_problem_table(tape, graph, model.gat, model.gat_cfg).detached_copy();
    }
    return detail::matrix_tensor(model.frozen_table);
}

// Predictions over a list of windows with fixed parameters.
inline std::vector<double> predict_windows(const TrainedModel& model, const BipartiteGraph& graph,
                                           const std::vector<DsmWindowInput>& inputs,
                                           const Tensor& code_table,
                                           const DsmConfig* cfg_override = nullptr) {
    Tensor table = eval_problem_table(model, graph);
    const DsmConfig& cfg = cfg_override ? *cfg_override : model.dsm_cfg;
    std::vector<double> preds;
    for (const auto& in : inputs) {
        Tape tape;
        DsmForward f = dsm_forward_window(tape, in, table, code_table, model.dsm, cfg);
        preds.insert(preds.end(), f.preds.begin(), f.preds.end());
    }
    return preds;
}

struct TrainOutcome {
    SeedResult result;
    TrainedModel model;
};

inline TrainOutcome train_single(const TrainContext& ctx, const TrainerConfig& cfg, uint64_t seed,
                                 const PreparedSplit& split) {
    cfg.validate();
    const auto& code_matrix = cfg.use_meanpool_codes ? ctx.meanpool_code_table : ctx.code_table;
    if (cfg.dsm.code_branch && code_matrix.empty())
        throw data_error("trainer: code table required but missing");
    if (cfg.problem_backend == "node2vec" && ctx.node2vec_table.empty())
        throw data_error("trainer: node2vec backend selected but no table prepared");

    Tensor code_table = cfg.dsm.code_branch ? detail::matrix_tensor(code_matrix)
                                            : Tensor::zeros(1, 1);

    Rng init_rng = Rng::derive(seed, 41);
    TrainedModel model;
    model.seed = seed;
    model.dsm_cfg = cfg.dsm;
    model.backend = cfg.problem_backend;
    model.gat_trainable = cfg.problem_backend == "gat" && cfg.train_problem_embed;
    model.dsm = DsmParams::init(cfg.dsm, init_rng);
    Tensor frozen_problem_table;  // used when the table does not train
    if (cfg.problem_backend == "gat") {
        model.gat_cfg = cfg.gat;
        model.gat = GatParams::init(cfg.gat, ctx.graph.num_nodes(), init_rng);
        if (!model.gat_trainable) {
            Tape tape;
            frozen_problem_table =
                gat_problem_table(tape, ctx.graph, model.gat, model.gat_cfg).detached_copy();
        }
    } else {
        model.frozen_table = ctx.node2vec_table;
        frozen_problem_table = detail::matrix_tensor(model.frozen_table);
    }

    std::vector<Tensor> params = model.dsm.all();
    if (model.gat_trainable)
        for (const Tensor& t : model.gat.all()) params.push_back(t);
    Adam opt(params, {.lr = cfg.lr});

    SeedResult res;
    res.seed = seed;
    Rng shuffle_rng = Rng::derive(seed, 43);
    std::vector<size_t> order(split.train_inputs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        size_t target_sum = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            size_t end = std::min(order.size(), start + cfg.batch_size);
            Tape tape;
            Tensor table = model.gat_trainable
                               ? gat_problem_table(tape, ctx.graph, model.gat, model.gat_cfg)
                               : frozen_problem_table;
            Tensor loss;
            size_t batch_targets = 0;
            for (size_t k = start; k < end; ++k) {
                const DsmWindowInput& in = split.train_inputs[order[k]];
                DsmForward f = dsm_forward_window(tape, in, table, code_table, model.dsm, cfg.dsm);
                batch_targets += f.targets.size();
                loss = loss.valid() ? tape.add(loss, f.loss) : f.loss;
            }
            if (batch_targets == 0) throw data_error("trainer: batch holds no trainable steps");
            loss = tape.scale(loss, 1.0 / static_cast<double>(batch_targets));
            double loss_val = loss.item();
            if (!std::isfinite(loss_val))
                throw numeric_error("trainer: loss diverged (non-finite) at epoch " +
                                    std::to_string(epoch + 1));
            loss_sum += loss_val * static_cast<double>(batch_targets);
            target_sum += batch_targets;
            if (epoch == 0) res.first_epoch_batch_loss.push_back(loss_val);
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
        }
        res.epoch_train_loss.push_back(loss_sum / static_cast<double>(target_sum));

        std::vector<double> preds =
            predict_windows(model, ctx.graph, split.test_inputs, code_table);
        double epoch_auc = auc(preds, split.test_labels_flat);
        res.epoch_test_auc.push_back(epoch_auc);
        if (epoch_auc > res.auc || epoch == 0) {
            res.auc = epoch_auc;
            res.best_epoch = epoch + 1;
        }
    }
    res.final_auc = res.epoch_test_auc.back();
    TrainOutcome out{std::move(res), std::move(model)};
    return out;
}

struct MultiTrainOutcome {
    EvalReport report;
    std::vector<TrainedModel> models;  // one per seed
};

inline MultiTrainOutcome train_multi(const TrainContext& ctx, const TrainerConfig& cfg) {
    cfg.validate();
    PreparedSplit split = prepare_split(ctx, cfg);
    MultiTrainOutcome out;
    out.report.train_students = split.train_students;
    out.report.test_students = split.test_students;
    out.report.train_windows = split.train_inputs.size();
    out.report.test_windows = split.test_inputs.size();
    out.report.train_targets = split.train_targets;
    out.report.test_targets = split.test_targets;
    double sum = 0.0, sum_final = 0.0;
    for (uint64_t seed : cfg.seeds) {
        TrainOutcome one = train_single(ctx, cfg, seed, split);
        sum += one.result.auc;
        sum_final += one.result.final_auc;
        out.report.per_seed.push_back(one.result);
        out.models.push_back(std::move(one.model));
    }
    out.report.mean_auc = sum / static_cast<double>(cfg.seeds.size());
    out.report.mean_final_auc = sum_final / static_cast<double>(cfg.seeds.size());
    return out;
}

// ---- ablations ----------------------------------------------------------------

struct AblationRow {
    std::string name;
    EvalReport report;
};

inline TrainerConfig apply_variant(TrainerConfig cfg, const std::string& name) {
    if (name == "full") {
    } else if (name == "no_code") {
        cfg.dsm.code_branch = false;
    } else if (name == "no_problem") {
        cfg.dsm.problem_branch = false;
    } else if (name == "no_classification") {
        cfg.use_meanpool_codes = true;
    } else if (name == "node2vec") {
        cfg.problem_backend = "node2vec";
        cfg.train_problem_embed = false;
    } else if (name == "literal_recurrence") {
        cfg.dsm.literal_recurrence = true;
    } else if (name == "no_past_response") {
        cfg.dsm.past_response = false;
    } else {
        throw config_error("unknown ablation variant '" + name + "'");
    }
    return cfg;
}

inline const std::vector<std::string>& default_ablation_variants() {
    static const std::vector<std::string> v{"full", "no_code", "no_problem", "no_classification",
                                            "node2vec", "literal_recurrence", "no_past_response"};
    return v;
}

inline std::vector<AblationRow> run_ablations(const TrainContext& ctx, const TrainerConfig& base,
                                              const std::vector<std::string>& variants) {
    std::vector<AblationRow> rows;
    for (const std::string& name : variants) {
        TrainerConfig cfg = apply_variant(base, name);
        if (name == "no_classification") {
            // code dim follows the unsupervised table
            if (ctx.meanpool_code_table.empty())
                throw data_error("ablation no_classification: meanpool table missing");
            cfg.dsm.code_dim = ctx.meanpool_code_table[0].size();
        }
        MultiTrainOutcome out = train_multi(ctx, cfg);
        rows.push_back({name, std::move(out.report)});
    }
    return rows;
}

// ---- lambda sweep ----------------------------------------------------------------

struct SweepRow {
    double lambda = 0.0;
    std::string mode;  // "on" | "off"
    uint64_t seed = 0;
    double auc = 0.0;
};

// Mean AUC per (lambda, mode) plus the per-seed rows for the CSV.
struct SweepResult {
    std::vector<SweepRow> rows;                       // per seed
    std::vector<std::pair<std::pair<double, std::string>, double>> means;
    std::vector<TrainedModel> lambda30_on_models;     // kept for the convergence check
};

inline SweepResult sweep_lambda(const TrainContext& ctx, const TrainerConfig& base,
                                const std::vector<double>& grid,
                                const std::vector<std::string>& modes) {
    bool has_zero = false, has_large = false;
    for (double l : grid) {
        if (l == 0.0) has_zero = true;
        if (l >= 30.0) has_large = true;
    }
    if (!has_zero || !has_large)
        throw config_error("sweep: lambda grid must include 0 and a value >= 30");
    for (const std::string& m : modes)
        if (m != "on" && m != "off") throw config_error("sweep: modes must be on|off");

    SweepResult out;
    for (double lambda : grid) {
        for (const std::string& mode : modes) {
            TrainerConfig cfg = base;
            cfg.dsm.lambda = lambda;
            cfg.dsm.attention = mode == "on";
            MultiTrainOutcome mt = train_multi(ctx, cfg);
            double mean = 0.0;
            for (size_t i = 0; i < mt.report.per_seed.size(); ++i) {
                const SeedResult& r = mt.report.per_seed[i];
                out.rows.push_back({lambda, mode, r.seed, r.auc});
                mean += r.auc;
            }
            mean /= static_cast<double>(mt.report.per_seed.size());
            out.means.push_back({{lambda, mode}, mean});
            if (lambda >= 30.0 && mode == "on") out.lambda30_on_models = std::move(mt.models);
        }
    }
    return out;
}

// ---- checkpoints ----------------------------------------------------------------

inline void save_checkpoint(const TrainedModel& model, const std::string& config_echo,
                            const std::string& path) {
    ArtifactWriter w(path, "checkpoint");
    w.put_string("config", config_echo);
    w.put_i64("seed", static_cast<int64_t>(model.seed));
    w.put_string("backend", model.backend);
    w.put_i64("gat_trainable", model.gat_trainable ? 1 : 0);

    const DsmConfig& d = model.dsm_cfg;
    w.put_i64("dsm_problem_dim", static_cast<int64_t>(d.problem_dim));
    w.put_i64("dsm_code_dim", static_cast<int64_t>(d.code_dim));
    w.put_i64("dsm_hidden", static_cast<int64_t>(d.hidden));
    w.put_i64("dsm_fusion_dim", static_cast<int64_t>(d.fusion_dim));
    w.put_f64("dsm_lambda", d.lambda);
    w.put_i64("dsm_attention", d.attention ? 1 : 0);
    w.put_i64("dsm_past_response", d.past_response ? 1 : 0);
    w.put_i64("dsm_literal_recurrence", d.literal_recurrence ? 1 : 0);
    w.put_i64("dsm_problem_branch", d.problem_branch ? 1 : 0);
    w.put_i64("dsm_code_branch", d.code_branch ? 1 : 0);
    w.put_string("dsm_single_branch_attention", d.single_branch_attention);

    auto put_opt = [&](const char* name, const Tensor& t) {
        if (t.valid()) w.put_tensor(name, t);
    };
    put_opt("Wg", model.dsm.Wg); put_opt("Ug", model.dsm.Ug); put_opt("bg", model.dsm.bg);
    put_opt("Wh", model.dsm.Wh); put_opt("Uh", model.dsm.Uh); put_opt("bh", model.dsm.bh);
    put_opt("Qg", model.dsm.Qg); put_opt("Qg_b", model.dsm.Qg_b);
    put_opt("Qh", model.dsm.Qh); put_opt("Qh_b", model.dsm.Qh_b);
    put_opt("Fg", model.dsm.Fg); put_opt("Fg_b", model.dsm.Fg_b);
    put_opt("Fh", model.dsm.Fh); put_opt("Fh_b", model.dsm.Fh_b);
    put_opt("out_w", model.dsm.out_w); put_opt("out_b", model.dsm.out_b);

    if (model.backend == "gat") {
        const GatConfig& g = model.gat_cfg;
        w.put_i64("gat_layers", static_cast<int64_t>(g.layers));
        w.put_i64("gat_heads", static_cast<int64_t>(g.heads));
        w.put_i64("gat_feature_dim", static_cast<int64_t>(g.feature_dim));
        w.put_i64("gat_hidden_dim", static_cast<int64_t>(g.hidden_dim));
        w.put_i64("gat_out_dim", static_cast<int64_t>(g.out_dim));
        w.put_f64("gat_leaky_slope", g.leaky_slope);
        w.put_tensor("gat_features", model.gat.features);
        for (size_t l = 0; l < model.gat.layers.size(); ++l)
            for (size_t h = 0; h < model.gat.layers[l].W.size(); ++h) {
                std::string sfx = std::to_string(l) + "_" + std::to_string(h);
                w.put_tensor("gat_W" + sfx, model.gat.layers[l].W[h]);
                w.put_tensor("gat_asrc" + sfx, model.gat.layers[l].a_src[h]);
                w.put_tensor("gat_adst" + sfx, model.gat.layers[l].a_dst[h]);
            }
    } else {
        w.put_matrix("frozen_table", model.frozen_table);
    }
    w.finish();
}

inline TrainedModel load_checkpoint(const std::string& path, std::string* config_echo = nullptr) {
    Artifact a = Artifact::load(path, "checkpoint");
    TrainedModel m;
    if (config_echo) *config_echo = a.str("config");
    m.seed = static_cast<uint64_t>(a.i64("seed"));
    m.backend = a.str("backend");
    m.gat_trainable = a.i64("gat_trainable") != 0;

    DsmConfig& d = m.dsm_cfg;
    d.problem_dim = static_cast<size_t>(a.i64("dsm_problem_dim"));
    d.code_dim = static_cast<size_t>(a.i64("dsm_code_dim"));
    d.hidden = static_cast<size_t>(a.i64("dsm_hidden"));
    d.fusion_dim = static_cast<size_t>(a.i64("dsm_fusion_dim"));
    d.lambda = a.f64("dsm_lambda");
    d.attention = a.i64("dsm_attention") != 0;
    d.past_response = a.i64("dsm_past_response") != 0;
    d.literal_recurrence = a.i64("dsm_literal_recurrence") != 0;
    d.problem_branch = a.i64("dsm_problem_branch") != 0;
    d.code_branch = a.i64("dsm_code_branch") != 0;
    d.single_branch_attention = a.str("dsm_single_branch_attention");

    auto get_opt = [&](const char* name, Tensor& t) {
        if (a.has(name)) t = a.tensor(name, true);
    };
    get_opt("Wg", m.dsm.Wg); get_opt("Ug", m.dsm.Ug); get_opt("bg", m.dsm.bg);
    get_opt("Wh", m.dsm.Wh); get_opt("Uh", m.dsm.Uh); get_opt("bh", m.dsm.bh);
    get_opt("Qg", m.dsm.Qg); get_opt("Qg_b", m.dsm.Qg_b);
    get_opt("Qh", m.dsm.Qh); get_opt("Qh_b", m.dsm.Qh_b);
    get_opt("Fg", m.dsm.Fg); get_opt("Fg_b", m.dsm.Fg_b);
    get_opt("Fh", m.dsm.Fh); get_opt("Fh_b", m.dsm.Fh_b);
    get_opt("out_w", m.dsm.out_w); get_opt("out_b", m.dsm.out_b);

    if (m.backend == "gat") {
        GatConfig& g = m.gat_cfg;
        g.layers = static_cast<size_t>(a.i64("gat_layers"));
        g.heads = static_cast<size_t>(a.i64("gat_heads"));
        g.feature_dim = static_cast<size_t>(a.i64("gat_feature_dim"));
        g.hidden_dim = static_cast<size_t>(a.i64("gat_hidden_dim"));
        g.out_dim = static_cast<size_t>(a.i64("gat_out_dim"));
        g.leaky_slope = a.f64("gat_leaky_slope");
        m.gat.features = a.tensor("gat_features", true);
        for (size_t l = 0; l < g.layers; ++l) {
            GatLayerParams lp;
            for (size_t h = 0; h < g.heads; ++h) {
                std::string sfx = std::to_string(l) + "_" + std::to_string(h);
                lp.W.push_back(a.tensor("gat_W" + sfx, true));
                lp.a_src.push_back(a.tensor("gat_asrc" + sfx, true));
                lp.a_dst.push_back(a.tensor("gat_adst" + sfx, true));
            }
            m.gat.layers.push_back(std::move(lp));
        }
    } else {
        m.frozen_table = a.matrix("frozen_table");
    }
    return m;
}

}  // namespace pkt
