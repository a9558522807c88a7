// C/C++-style code tokenizer for classifier features. Total and
// deterministic: any byte sequence tokenizes without error, including
// unterminated literals and comments (beginner submissions frequently do not
// compile). Literal bodies collapse to the sentinels <NUM>, <STR>, <CHR>;
// comments are dropped; unknown bytes are skipped.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pkt {

inline constexpr const char* kNumSentinel = "<NUM>";
inline constexpr const char* kStrSentinel = "<STR>";
inline constexpr const char* kChrSentinel = "<CHR>";

namespace detail {

inline bool ident_start(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(unsigned char c) {
    return ident_start(c) || (c >= '0' && c <= '9');
}
inline bool digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Multi-character operators, longest first within each leading character.
inline const std::vector<std::string_view>& multi_ops() {
    static const std::vector<std::string_view> ops = {
        "<<=", ">>=", "...", "->*", "::",  "->", "++", "--", "<<", ">>", "<=", ">=",
        "==",  "!=",  "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=",
        "##",  ".*",
    };
    return ops;
}

}  // namespace detail

inline std::vector<std::string> tokenize(std::string_view code) {
    using namespace detail;
    std::vector<std::string> out;
    size_t i = 0, n = code.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(code[i]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        // comments
        if (c == '/' && i + 1 < n && code[i + 1] == '/') {
            while (i < n && code[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && code[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(code[i] == '*' && code[i + 1] == '/')) ++i;
            i = (i + 1 < n) ? i + 2 : n;  // unterminated: consume to end
            continue;
        }
        if (ident_start(c)) {
            size_t j = i;
            while (j < n && ident_char(static_cast<unsigned char>(code[j]))) ++j;
            out.emplace_back(code.substr(i, j - i));
            i = j;
            continue;
        }
        if (digit(c) || (c == '.' && i + 1 < n && digit(static_cast<unsigned char>(code[i + 1])))) {
            size_t j = i;
            while (j < n) {
                unsigned char d = static_cast<unsigned char>(code[j]);
                if (ident_char(d) || d == '.') {
                    ++j;
                } else if ((d == '+' || d == '-') && j > i) {
                    unsigned char prev = static_cast<unsigned char>(code[j - 1]);
                    if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') ++j;
                    else break;
                } else {
                    break;
                }
            }
            out.emplace_back(kNumSentinel);
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = static_cast<char>(c);
            size_t j = i + 1;
            while (j < n && code[j] != quote) {
                if (code[j] == '\\' && j + 1 < n) ++j;  // escaped char
                ++j;
            }
            i = (j < n) ? j + 1 : n;  // unterminated: consume to end
            out.emplace_back(quote == '"' ? kStrSentinel : kChrSentinel);
            continue;
        }
        // operators and punctuation
        bool matched = false;
        for (std::string_view op : multi_ops()) {
            if (code.substr(i, op.size()) == op) {
                out.emplace_back(op);
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (c >= 0x21 && c <= 0x7e) {
            out.emplace_back(1, static_cast<char>(c));
            ++i;
            continue;
        }
        ++i;  // non-ASCII / control byte: skip
    }
    return out;
}

}  // namespace pkt
