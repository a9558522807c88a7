#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "pkt/lexer.hpp"
#include "pkt/rng.hpp"

using namespace pkt;

TEST_CASE("lexer splits c-style code") {
    auto toks = tokenize("int main(){return 0;}");
    std::vector<std::string> want{"int", "main", "(", ")", "{", "return", "<NUM>", ";", "}"};
    CHECK(toks == want);
}

TEST_CASE("empty input yields no tokens") {
    CHECK(tokenize("").empty());
}

TEST_CASE("unterminated string ends with the sentinel, no error") {
    auto toks = tokenize("int x = \"unterminated");
    REQUIRE(!toks.empty());
    CHECK(toks.back() == "<STR>");
    std::vector<std::string> want{"int", "x", "=", "<STR>"};
    CHECK(toks == want);
}

TEST_CASE("comments dropped, literals collapsed, operators split") {
    auto toks = tokenize("a += b; // trailing\n/* block */ x = 'c' >>= \"s\" 1.5e-3;");
    std::vector<std::string> want{"a", "+=", "b", ";", "x", "=", "<CHR>", ">>=", "<STR>", "<NUM>", ";"};
    CHECK(toks == want);
}

TEST_CASE("unterminated block comment consumes the rest") {
    CHECK(tokenize("x /* never closed").size() == 1);
}

TEST_CASE("total and deterministic on arbitrary bytes") {
    Rng rng(31337);
    for (int it = 0; it < 200; ++it) {
        std::string s;
        size_t n = static_cast<size_t>(rng.uniform_int(0, 300));
        for (size_t i = 0; i < n; ++i)
            s.push_back(static_cast<char>(rng.uniform_int(0, 255)));
        auto a = tokenize(s);
        auto b = tokenize(s);
        CHECK(a == b);
    }
}
