// Versioned binary artifact container for stage outputs (embeddings,
// classifier weights, checkpoints). Little-endian, doubles stored raw, so a
// save/load round-trip is bit-exact. Loading checks magic, format version,
// and artifact kind and fails loudly on any mismatch.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pkt/errors.hpp"
#include "pkt/tensor.hpp"

namespace pkt {

inline constexpr uint32_t kArtifactVersion = 1;
inline constexpr char kArtifactMagic[4] = {'P', 'K', 'T', 'A'};

namespace detail {

enum class EntryTag : uint8_t { TensorF64 = 0, I64 = 1, F64 = 2, String = 3, I64List = 4 };

template <typename T>
void put_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw data_error(path + ": truncated artifact");
    return v;
}

inline void put_str(std::ostream& os, const std::string& s) {
    put_raw<uint32_t>(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& is, const std::string& path) {
    uint32_t n = get_raw<uint32_t>(is, path);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw data_error(path + ": truncated artifact");
    return s;
}

}  // namespace detail

class ArtifactWriter {
public:
    ArtifactWriter(std::string path, std::string kind) : path_(std::move(path)), kind_(std::move(kind)) {}

    void put_tensor(const std::string& name, const Tensor& t) {
        Entry e;
        e.tag = detail::EntryTag::TensorF64;
        e.rows = t.rows();
        e.cols = t.cols();
        e.f64s = t.values();
        entries_.emplace_back(name, std::move(e));
    }

    void put_matrix(const std::string& name, const std::vector<std::vector<double>>& m) {
        Entry e;
        e.tag = detail::EntryTag::TensorF64;
        e.rows = m.size();
        e.cols = m.empty() ? 0 : m[0].size();
        for (const auto& row : m) {
            if (row.size() != e.cols) throw contract_error("put_matrix: ragged rows");
            e.f64s.insert(e.f64s.end(), row.begin(), row.end());
        }
        entries_.emplace_back(name, std::move(e));
    }

    void put_i64(const std::string& name, int64_t v) {
        Entry e;
        e.tag = detail::EntryTag::I64;
        e.i64 = v;
        entries_.emplace_back(name, std::move(e));
    }

    void put_f64(const std::string& name, double v) {
        Entry e;
        e.tag = detail::EntryTag::F64;
        e.f64 = v;
        entries_.emplace_back(name, std::move(e));
    }

    void put_string(const std::string& name, const std::string& v) {
        Entry e;
        e.tag = detail::EntryTag::String;
        e.str = v;
        entries_.emplace_back(name, std::move(e));
    }

    void put_i64_list(const std::string& name, const std::vector<int64_t>& v) {
        Entry e;
        e.tag = detail::EntryTag::I64List;
        e.i64s = v;
        entries_.emplace_back(name, std::move(e));
    }

    void finish() {
        std::filesystem::path p(path_);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream os(path_, std::ios::binary);
        if (!os) throw data_error("cannot write artifact " + path_);
        os.write(kArtifactMagic, 4);
        detail::put_raw<uint32_t>(os, kArtifactVersion);
        detail::put_str(os, kind_);
        detail::put_raw<uint64_t>(os, entries_.size());
        for (const auto& [name, e] : entries_) {
            detail::put_str(os, name);
            detail::put_raw<uint8_t>(os, static_cast<uint8_t>(e.tag));
            switch (e.tag) {
                case detail::EntryTag::TensorF64:
                    detail::put_raw<uint64_t>(os, e.rows);
                    detail::put_raw<uint64_t>(os, e.cols);
                    os.write(reinterpret_cast<const char*>(e.f64s.data()),
                             static_cast<std::streamsize>(e.f64s.size() * sizeof(double)));
                    break;
                case detail::EntryTag::I64: detail::put_raw<int64_t>(os, e.i64); break;
                case detail::EntryTag::F64: detail::put_raw<double>(os, e.f64); break;
                case detail::EntryTag::String: detail::put_str(os, e.str); break;
                case detail::EntryTag::I64List:
                    detail::put_raw<uint64_t>(os, e.i64s.size());
                    os.write(reinterpret_cast<const char*>(e.i64s.data()),
                             static_cast<std::streamsize>(e.i64s.size() * sizeof(int64_t)));
                    break;
            }
        }
        if (!os) throw data_error("write failed for artifact " + path_);
    }

private:
    struct Entry {
        detail::EntryTag tag = detail::EntryTag::I64;
        uint64_t rows = 0, cols = 0;
        std::vector<double> f64s;
        int64_t i64 = 0;
        double f64 = 0.0;
        std::string str;
        std::vector<int64_t> i64s;
    };

    std::string path_;
    std::string kind_;
    std::vector<std::pair<std::string, Entry>> entries_;
};

class Artifact {
public:
    static Artifact load(const std::string& path, const std::string& expected_kind) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw data_error("missing artifact " + path);
        char magic[4];
        is.read(magic, 4);
        if (!is || std::memcmp(magic, kArtifactMagic, 4) != 0)
            throw data_error(path + ": not a pkt artifact");
        uint32_t version = detail::get_raw<uint32_t>(is, path);
        if (version != kArtifactVersion)
            throw data_error(path + ": artifact format version " + std::to_string(version) +
                             " unsupported (this build reads version " +
                             std::to_string(kArtifactVersion) + ")");
        Artifact a;
        a.path_ = path;
        a.kind_ = detail::get_str(is, path);
        if (a.kind_ != expected_kind)
            throw data_error(path + ": artifact kind '" + a.kind_ + "' does not match expected '" +
                             expected_kind + "'");
        uint64_t count = detail::get_raw<uint64_t>(is, path);
        for (uint64_t i = 0; i < count; ++i) {
            std::string name = detail::get_str(is, path);
            auto tag = static_cast<detail::EntryTag>(detail::get_raw<uint8_t>(is, path));
            Entry e;
            e.tag = tag;
            switch (tag) {
                case detail::EntryTag::TensorF64: {
                    e.rows = detail::get_raw<uint64_t>(is, path);
                    e.cols = detail::get_raw<uint64_t>(is, path);
                    e.f64s.resize(e.rows * e.cols);
                    is.read(reinterpret_cast<char*>(e.f64s.data()),
                            static_cast<std::streamsize>(e.f64s.size() * sizeof(double)));
                    if (!is) throw data_error(path + ": truncated artifact");
                    break;
                }
                case detail::EntryTag::I64: e.i64 = detail::get_raw<int64_t>(is, path); break;
                case detail::EntryTag::F64: e.f64 = detail::get_raw<double>(is, path); break;
                case detail::EntryTag::String: e.str = detail::get_str(is, path); break;
                case detail::EntryTag::I64List: {
                    uint64_t n = detail::get_raw<uint64_t>(is, path);
                    e.i64s.resize(n);
                    is.read(reinterpret_cast<char*>(e.i64s.data()),
                            static_cast<std::streamsize>(n * sizeof(int64_t)));
                    if (!is) throw data_error(path + ": truncated artifact");
                    break;
                }
                default: throw data_error(path + ": unknown entry tag");
            }
            a.entries_.emplace(name, std::move(e));
        }
        return a;
    }

    const std::string& kind() const { return kind_; }
    bool has(const std::string& name) const { return entries_.count(name) > 0; }

    Tensor tensor(const std::string& name, bool requires_grad = false) const {
        const Entry& e = fetch(name, detail::EntryTag::TensorF64);
        Tensor t = Tensor::zeros(e.rows, e.cols, requires_grad);
        t.values() = e.f64s;
        return t;
    }

    std::vector<std::vector<double>> matrix(const std::string& name) const {
        const Entry& e = fetch(name, detail::EntryTag::TensorF64);
        std::vector<std::vector<double>> m(e.rows, std::vector<double>(e.cols));
        for (uint64_t i = 0; i < e.rows; ++i)
            for (uint64_t j = 0; j < e.cols; ++j) m[i][j] = e.f64s[i * e.cols + j];
        return m;
    }

    int64_t i64(const std::string& name) const { return fetch(name, detail::EntryTag::I64).i64; }
    double f64(const std::string& name) const { return fetch(name, detail::EntryTag::F64).f64; }
    const std::string& str(const std::string& name) const {
        return fetch(name, detail::EntryTag::String).str;
    }
    const std::vector<int64_t>& i64_list(const std::string& name) const {
        return fetch(name, detail::EntryTag::I64List).i64s;
    }

private:
    struct Entry {
        detail::EntryTag tag = detail::EntryTag::I64;
        uint64_t rows = 0, cols = 0;
        std::vector<double> f64s;
        int64_t i64 = 0;
        double f64 = 0.0;
        std::string str;
        std::vector<int64_t> i64s;
    };

    const Entry& fetch(const std::string& name, detail::EntryTag want) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw data_error(path_ + ": artifact missing entry '" + name + "'");
        if (it->second.tag != want)
            throw data_error(path_ + ": artifact entry '" + name + "' has the wrong type");
        return it->second;
    }

    std::string path_;
    std::string kind_;
    std::map<std::string, Entry> entries_;
};

}  // namespace pkt
