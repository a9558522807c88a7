// Supervised code embedding: skip-gram pre-trained token vectors feed a
// verdict classifier (convolutional max-over-time or mean-pool encoder); the
// tanh projection ahead of the class layer is the code embedding. A 2-class
// mode collapses the eight error verdicts to "incorrect".
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "pkt/artifact.hpp"
#include "pkt/data.hpp"
#include "pkt/errors.hpp"
#include "pkt/lexer.hpp"
#include "pkt/optim.hpp"
#include "pkt/rng.hpp"
#include "pkt/sgns.hpp"
#include "pkt/tensor.hpp"
#include "pkt/vocab.hpp"

namespace pkt {

struct CodeEmbedConfig {
    size_t token_dim = 100;   // token embedding width e
    size_t embed_dim = 128;   // code embedding width d0
    size_t max_tokens = 256;  // truncation length T
    size_t min_freq = 2;
    size_t classes = 9;       // 9 or 2
    std::string encoder = "conv";  // conv | meanpool
    size_t conv_filters = 32;
    std::vector<size_t> conv_windows{3, 4, 5};
    size_t epochs = 4;
    size_t batch = 64;
    double lr = 5e-4;
    double train_fraction = 0.8;
    size_t sgns_window = 5;
    size_t sgns_negatives = 5;
    size_t sgns_epochs = 2;

    void validate() const {
        if (classes != 2 && classes != 9) throw config_error("codeembed: classes must be 2 or 9");
        if (encoder != "conv" && encoder != "meanpool")
            throw config_error("codeembed: encoder must be conv|meanpool");
        if (token_dim == 0 || embed_dim == 0 || max_tokens == 0)
            throw config_error("codeembed: zero dimension");
        if (encoder == "conv" && (conv_windows.empty() || conv_filters == 0))
            throw config_error("codeembed: conv encoder needs windows and filters");
        if (train_fraction <= 0.0 || train_fraction >= 1.0)
            throw config_error("codeembed: train_fraction outside (0,1)");
    }
};

struct CodeSample {
    std::vector<size_t> token_ids;
    int label = 0;  // class index: 9-class = Verdict order, 2-class = verdict_to_binary
};

inline int classifier_label(Verdict v, size_t classes) {
    return classes == 2 ? verdict_to_binary(v) : static_cast<int>(v);
}

struct CodeClassifier {
    CodeEmbedConfig cfg;
    TokenVocab vocab;
    Tensor embeddings;  // |V| x e
    std::vector<Tensor> conv_w, conv_b;
    Tensor proj_w, proj_b;  // enc_dim x d0
    Tensor out_w, out_b;    // d0 x classes

    size_t encoder_dim() const {
        return cfg.encoder == "conv" ? cfg.conv_filters * cfg.conv_windows.size() : cfg.token_dim;
    }

    std::vector<Tensor> trainable() const {
        std::vector<Tensor> v{embeddings};
        for (const auto& t : conv_w) v.push_back(t);
        for (const auto& t : conv_b) v.push_back(t);
        v.push_back(proj_w);
        v.push_back(proj_b);
        v.push_back(out_w);
        v.push_back(out_b);
        return v;
    }

    static CodeClassifier init(CodeEmbedConfig cfg, TokenVocab vocab, Rng& rng,
                               const SgnsModel* pretrained = nullptr) {
        cfg.validate();
        CodeClassifier c;
        c.cfg = cfg;
        c.vocab = std::move(vocab);
        c.embeddings = Tensor::uniform_fanin(c.vocab.size(), cfg.token_dim, rng, true);
        if (pretrained) {
            if (pretrained->vocab != c.vocab.size() || pretrained->dim != cfg.token_dim)
                throw contract_error("codeembed: pretrained embedding size mismatch");
            for (size_t i = 0; i < c.vocab.size(); ++i)
                for (size_t j = 0; j < cfg.token_dim; ++j)
                    c.embeddings.at(i, j) = pretrained->in_vec(i)[j];
        }
        if (cfg.encoder == "conv") {
            for (size_t w : cfg.conv_windows) {
                c.conv_w.push_back(Tensor::uniform_fanin(w * cfg.token_dim, cfg.conv_filters, rng, true));
                c.conv_b.push_back(Tensor::zeros(1, cfg.conv_filters, true));
            }
        }
        c.proj_w = Tensor::uniform_fanin(c.encoder_dim(), cfg.embed_dim, rng, true);
        c.proj_b = Tensor::zeros(1, cfg.embed_dim, true);
        c.out_w = Tensor::uniform_fanin(cfg.embed_dim, cfg.classes, rng, true);
        c.out_b = Tensor::zeros(1, cfg.classes, true);
        return c;
    }

    // Token ids clipped to T; empty or too-short inputs are padded with the
    // reserved pad id so the widest conv window always fits.
    std::vector<size_t> prepare_ids(const std::vector<size_t>& ids) const {
        std::vector<size_t> out(ids.begin(),
                                ids.begin() + static_cast<long>(std::min(ids.size(), cfg.max_tokens)));
        size_t need = 1;
        if (cfg.encoder == "conv")
            for (size_t w : cfg.conv_windows) need = std::max(need, w);
        while (out.size() < need) out.push_back(TokenVocab::kPadId);
        return out;
    }

    // The code embedding: tanh projection feeding the class layer.
    Tensor encode(Tape& tape, const std::vector<size_t>& raw_ids) const {
        std::vector<size_t> ids = prepare_ids(raw_ids);
        Tensor e = tape.gather_rows(embeddings, ids);
        Tensor feat;
        if (cfg.encoder == "conv") {
            for (size_t wi = 0; wi < cfg.conv_windows.size(); ++wi) {
                Tensor u = tape.unfold_rows(e, cfg.conv_windows[wi]);
                Tensor conv = tape.relu(tape.add_row(tape.matmul(u, conv_w[wi]), conv_b[wi]));
                Tensor pooled = tape.max_rows(conv);
                feat = feat.valid() ? tape.concat_cols(feat, pooled) : pooled;
            }
        } else {
            feat = tape.mean_rows(e);
        }
        return tape.tanh_t(tape.add_row(tape.matmul(feat, proj_w), proj_b));
    }

    Tensor logits(Tape& tape, const std::vector<size_t>& ids) const {
        return tape.add_row(tape.matmul(encode(tape, ids), out_w), out_b);
    }

    int predict(const std::vector<size_t>& ids) const {
        Tape tape;
        Tensor l = logits(tape, ids);
        size_t best = 0;
        for (size_t j = 1; j < l.cols(); ++j)
            if (l.values()[j] > l.values()[best]) best = j;
        return static_cast<int>(best);
    }

    std::vector<double> embed(const std::vector<size_t>& ids) const {
        Tape tape;
        return encode(tape, ids).values();
    }
};

struct ClassifierReport {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double majority_baseline = 0.0;
    size_t train_size = 0;
    size_t test_size = 0;
    std::vector<size_t> class_counts;
    std::vector<double> epoch_loss;
};

// Stratified train/test split: each class keeps train_fraction of its samples
// (at least one) in train. A class with no samples at all is a
// stratification error.
inline std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const std::vector<CodeSample>& samples, size_t classes, double train_fraction, Rng& rng) {
    std::vector<std::vector<size_t>> by_class(classes);
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].label < 0 || static_cast<size_t>(samples[i].label) >= classes)
            throw contract_error("stratified_split: label out of range");
        by_class[static_cast<size_t>(samples[i].label)].push_back(i);
    }
    std::vector<size_t> train, test;
    for (size_t c = 0; c < classes; ++c) {
        if (by_class[c].empty())
            throw stratification_error("class " + std::to_string(c) +
                                       " absent from the corpus; cannot stratify the training split");
        rng.shuffle(by_class[c]);
        size_t n_train = std::max<size_t>(1, static_cast<size_t>(
                                                 train_fraction * static_cast<double>(by_class[c].size())));
        for (size_t k = 0; k < by_class[c].size(); ++k)
            (k < n_train ? train : test).push_back(by_class[c][k]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

inline SgnsModel pretrain_token_embeddings(const std::vector<std::vector<size_t>>& corpus,
                                           const TokenVocab& vocab, const CodeEmbedConfig& cfg,
                                           uint64_t seed) {
    if (corpus.empty()) throw data_error("pretrain_token_embeddings: empty corpus");
    SgnsConfig sc;
    sc.dim = cfg.token_dim;
    sc.window = cfg.sgns_window;
    sc.negatives = cfg.sgns_negatives;
    sc.epochs = cfg.sgns_epochs;
    return sgns_train(corpus, vocab.size(), vocab.counts(), sc, seed);
}

inline std::pair<CodeClassifier, ClassifierReport> train_classifier(
    const std::vector<CodeSample>& samples, CodeEmbedConfig cfg, TokenVocab vocab, uint64_t seed,
    const SgnsModel* pretrained = nullptr) {
    cfg.validate();
    if (samples.empty()) throw data_error("train_classifier: empty corpus");

    Rng split_rng = Rng::derive(seed, 101);
    auto [train_idx, test_idx] = stratified_split(samples, cfg.classes, cfg.train_fraction, split_rng);

    Rng init_rng = Rng::derive(seed, 102);
    CodeClassifier clf = CodeClassifier::init(cfg, std::move(vocab), init_rng, pretrained);
    Adam opt(clf.trainable(), {.lr = cfg.lr});

    ClassifierReport report;
    report.class_counts.assign(cfg.classes, 0);
    for (const auto& s : samples) ++report.class_counts[static_cast<size_t>(s.label)];
    report.train_size = train_idx.size();
    report.test_size = test_idx.size();

    Rng shuffle_rng = Rng::derive(seed, 103);
    for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < train_idx.size(); start += cfg.batch) {
            size_t end = std::min(train_idx.size(), start + cfg.batch);
            Tape tape;
            Tensor loss;
            for (size_t k = start; k < end; ++k) {
                const CodeSample& s = samples[train_idx[k]];
                Tensor l = tape.ce_loss(clf.logits(tape, s.token_ids),
                                        static_cast<size_t>(s.label));
                loss = loss.valid() ? tape.add(loss, l) : l;
            }
            loss = tape.scale(loss, 1.0 / static_cast<double>(end - start));
            if (!std::isfinite(loss.item()))
                throw numeric_error("train_classifier: loss diverged (non-finite)");
            epoch_loss += loss.item() * static_cast<double>(end - start);
            seen += end - start;
            opt.zero_grad();
            tape.backward(loss);
            opt.step();
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(seen));
    }

    auto accuracy = [&](const std::vector<size_t>& idx) {
        if (idx.empty()) return 0.0;
        size_t hit = 0;
        for (size_t i : idx) hit += clf.predict(samples[i].token_ids) == samples[i].label;
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    };
    report.train_accuracy = accuracy(train_idx);
    report.test_accuracy = accuracy(test_idx);

    // majority baseline: most frequent training class, scored on the test split
    std::vector<size_t> train_counts(cfg.classes, 0);
    for (size_t i : train_idx) ++train_counts[static_cast<size_t>(samples[i].label)];
    size_t majority = 0;
    for (size_t c = 1; c < cfg.classes; ++c)
        if (train_counts[c] > train_counts[majority]) majority = c;
    size_t hit = 0;
    for (size_t i : test_idx) hit += static_cast<size_t>(samples[i].label) == majority;
    report.majority_baseline =
        test_idx.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(test_idx.size());
    return {std::move(clf), report};
}

// Code embedding table: one d0 row per submission, in input order.
inline std::vector<std::vector<double>> embed_codes(const CodeClassifier& clf,
                                                    const std::vector<std::vector<size_t>>& ids) {
    std::vector<std::vector<double>> table;
    table.reserve(ids.size());
    for (const auto& seq : ids) table.push_back(clf.embed(seq));
    return table;
}

// Unsupervised fallback (the "no classification" ablation): mean of raw
// skip-gram token vectors, no supervised signal.
inline std::vector<std::vector<double>> meanpool_embeddings(const SgnsModel& model,
                                                            const std::vector<std::vector<size_t>>& ids) {
    std::vector<std::vector<double>> table;
    table.reserve(ids.size());
    for (const auto& seq : ids) {
        std::vector<double> v(model.dim, 0.0);
        if (!seq.empty()) {
            for (size_t id : seq)
                for (size_t j = 0; j < model.dim; ++j) v[j] += model.in_vec(id)[j];
            for (double& x : v) x /= static_cast<double>(seq.size());
        }
        table.push_back(std::move(v));
    }
    return table;
}

// ---- artifact io -----------------------------------------------------------

inline void save_classifier(const CodeClassifier& clf, const std::string& path) {
    ArtifactWriter w(path, "code-classifier");
    w.put_i64("classes", static_cast<int64_t>(clf.cfg.classes));
    w.put_i64("token_dim", static_cast<int64_t>(clf.cfg.token_dim));
    w.put_i64("embed_dim", static_cast<int64_t>(clf.cfg.embed_dim));
    w.put_i64("max_tokens", static_cast<int64_t>(clf.cfg.max_tokens));
    w.put_string("encoder", clf.cfg.encoder);
    w.put_i64("conv_filters", static_cast<int64_t>(clf.cfg.conv_filters));
    std::vector<int64_t> windows(clf.cfg.conv_windows.begin(), clf.cfg.conv_windows.end());
    w.put_i64_list("conv_windows", windows);
    std::string tokens;
    for (size_t i = 0; i < clf.vocab.size(); ++i) {
        tokens += clf.vocab.token(i);
        tokens += '\n';
    }
    w.put_string("vocab_tokens", tokens);
    w.put_i64_list("vocab_counts", clf.vocab.counts());
    w.put_tensor("embeddings", clf.embeddings);
    for (size_t i = 0; i < clf.conv_w.size(); ++i) {
        w.put_tensor("conv_w" + std::to_string(i), clf.conv_w[i]);
        w.put_tensor("conv_b" + std::to_string(i), clf.conv_b[i]);
    }
    w.put_tensor("proj_w", clf.proj_w);
    w.put_tensor("proj_b", clf.proj_b);
    w.put_tensor("out_w", clf.out_w);
    w.put_tensor("out_b", clf.out_b);
    w.finish();
}

inline CodeClassifier load_classifier(const std::string& path) {
    Artifact a = Artifact::load(path, "code-classifier");
    CodeClassifier clf;
    clf.cfg.classes = static_cast<size_t>(a.i64("classes"));
    clf.cfg.token_dim = static_cast<size_t>(a.i64("token_dim"));
    clf.cfg.embed_dim = static_cast<size_t>(a.i64("embed_dim"));
    clf.cfg.max_tokens = static_cast<size_t>(a.i64("max_tokens"));
    clf.cfg.encoder = a.str("encoder");
    clf.cfg.conv_filters = static_cast<size_t>(a.i64("conv_filters"));
    clf.cfg.conv_windows.clear();
    for (int64_t w : a.i64_list("conv_windows")) clf.cfg.conv_windows.push_back(static_cast<size_t>(w));
    std::vector<std::string> tokens;
    {
        const std::string& blob = a.str("vocab_tokens");
        size_t start = 0;
        while (start < blob.size()) {
            size_t nl = blob.find('\n', start);
            tokens.push_back(blob.substr(start, nl - start));
            start = nl + 1;
        }
    }
    clf.vocab = TokenVocab::from_tokens(std::move(tokens), a.i64_list("vocab_counts"));
    clf.embeddings = a.tensor("embeddings", true);
    for (size_t i = 0; i < clf.cfg.conv_windows.size(); ++i) {
        clf.conv_w.push_back(a.tensor("conv_w" + std::to_string(i), true));
        clf.conv_b.push_back(a.tensor("conv_b" + std::to_string(i), true));
    }
    clf.proj_w = a.tensor("proj_w", true);
    clf.proj_b = a.tensor("proj_b", true);
    clf.out_w = a.tensor("out_w", true);
    clf.out_b = a.tensor("out_b", true);
    return clf;
}

}  // namespace pkt
