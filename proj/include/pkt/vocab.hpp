// Token vocabulary with reserved padding/unknown ids and a minimum-frequency
// cutoff. Id assignment is deterministic: by descending count, ties broken
// lexicographically.
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pkt/errors.hpp"

namespace pkt {

class TokenVocab {
public:
    static constexpr size_t kPadId = 0;
    static constexpr size_t kUnkId = 1;

    TokenVocab() = default;

    static TokenVocab build(const std::vector<std::vector<std::string>>& corpus, size_t min_freq) {
        std::unordered_map<std::string, int64_t> counts;
        for (const auto& toks : corpus)
            for (const auto& t : toks) ++counts[t];
        std::vector<std::pair<std::string, int64_t>> kept;
        kept.reserve(counts.size());
        for (auto& kv : counts)
            if (static_cast<size_t>(kv.second) >= min_freq) kept.emplace_back(kv.first, kv.second);
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        TokenVocab v;
        v.tokens_ = {"<PAD>", "<UNK>"};
        v.counts_ = {0, 0};
        for (auto& kv : kept) {
            v.ids_[kv.first] = v.tokens_.size();
            v.tokens_.push_back(kv.first);
            v.counts_.push_back(kv.second);
        }
        return v;
    }

    size_t size() const { return tokens_.size(); }

    size_t id(const std::string& tok) const {
        auto it = ids_.find(tok);
        return it == ids_.end() ? kUnkId : it->second;
    }

    const std::string& token(size_t id) const {
        if (id >= tokens_.size()) throw index_error("vocab: id " + std::to_string(id) + " out of range");
        return tokens_[id];
    }

    int64_t count(size_t id) const { return counts_[id]; }
    const std::vector<int64_t>& counts() const { return counts_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<size_t> encode(const std::vector<std::string>& toks, size_t max_len) const {
        std::vector<size_t> ids;
        ids.reserve(std::min(toks.size(), max_len));
        for (const auto& t : toks) {
            if (ids.size() == max_len) break;
            ids.push_back(id(t));
        }
        return ids;
    }

    // Rebuild from a serialized token list (artifact load path).
    static TokenVocab from_tokens(std::vector<std::string> tokens, std::vector<int64_t> counts) {
        if (tokens.size() < 2 || tokens[0] != "<PAD>" || tokens[1] != "<UNK>")
            throw data_error("vocab: serialized token list lacks reserved entries");
        TokenVocab v;
        v.tokens_ = std::move(tokens);
        v.counts_ = std::move(counts);
        v.counts_.resize(v.tokens_.size(), 0);
        for (size_t i = 2; i < v.tokens_.size(); ++i) v.ids_[v.tokens_[i]] = i;
        return v;
    }

private:
    std::vector<std::string> tokens_;
    std::vector<int64_t> counts_;
    std::unordered_map<std::string, size_t> ids_;
};

}  // namespace pkt
