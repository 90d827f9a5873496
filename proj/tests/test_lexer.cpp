#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "svgdet/errors.hpp"
#include "svgdet/lexer.hpp"
#include "svgdet/rng.hpp"

using namespace svgdet;

namespace {

std::vector<std::string> texts(const TokenSequence& ts) {
    std::vector<std::string> out;
    for (const Token& t : ts) out.push_back(t.text);
    return out;
}

// Rebuilds the source as a character grid from token (line, col, text) and
// compares against the input with trailing blanks stripped.  Passing means
// the tokens cover every non-whitespace byte and every position is exact.
void check_grid_round_trip(const std::string& source, const AnalysisConfig& cfg) {
    std::vector<std::string> lines{""};
    for (char c : source) {
        if (c == '\n') lines.emplace_back();
        else lines.back() += c;
    }

    std::vector<std::string> rebuilt(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) rebuilt[i] = std::string(lines[i].size(), ' ');

    for (const Token& t : tokenize(source, cfg).tokens) {
        if (t.kind == TokenKind::BoundaryMarker) continue;  // synthetic positions
        REQUIRE(t.line >= 1);
        REQUIRE(static_cast<size_t>(t.line) <= rebuilt.size());
        std::string& row = rebuilt[t.line - 1];
        REQUIRE(static_cast<size_t>(t.col - 1 + t.text.size()) <= row.size());
        row.replace(t.col - 1, t.text.size(), t.text);
    }

    auto rstrip = [](std::string s) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
        return s;
    };
    for (size_t i = 0; i < lines.size(); ++i) CHECK(rstrip(rebuilt[i]) == rstrip(lines[i]));
}

}  // namespace

TEST_SUITE("lexer") {

TEST_CASE("single statement lexes into eight tokens with markers") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult r = tokenize("a = b + 1;", cfg);
    REQUIRE(r.tokens.size() == 8);
    CHECK(texts(r.tokens) == std::vector<std::string>{"<s>", "a", "=", "b", "+", "1", ";", "</s>"});
    CHECK(r.tokens[0].kind == TokenKind::BoundaryMarker);
    CHECK(r.tokens[1].kind == TokenKind::Identifier);
    CHECK(r.tokens[2].kind == TokenKind::AssignmentOperator);
    CHECK(r.tokens[3].kind == TokenKind::Identifier);
    CHECK(r.tokens[4].kind == TokenKind::Operator);
    CHECK(r.tokens[5].kind == TokenKind::NumberLiteral);
    CHECK(r.tokens[6].kind == TokenKind::Punctuation);
    CHECK(r.tokens[7].kind == TokenKind::BoundaryMarker);
    for (size_t i = 0; i < r.tokens.size(); ++i) CHECK(r.tokens[i].index == static_cast<int>(i));
}

TEST_CASE("call sites become ApiCall only for configured names") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult r = tokenize("x = get_item(k); strcpy(dst, src);", cfg);
    auto kind_of = [&](const std::string& text) {
        for (const Token& t : r.tokens)
            if (t.text == text) return t.kind;
        return TokenKind::BoundaryMarker;
    };
    CHECK(kind_of("get_item") == TokenKind::Identifier);
    CHECK(kind_of("strcpy") == TokenKind::ApiCall);

    cfg.api_any_call = true;
    LexResult any = tokenize("x = get_item(k);", cfg);
    bool found = false;
    for (const Token& t : any.tokens)
        if (t.text == "get_item") {
            found = true;
            CHECK(t.kind == TokenKind::ApiCall);
        }
    CHECK(found);
}

TEST_CASE("keywords, conditionals and literals classify by table") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult r = tokenize("if (x) return 'a'; else s = \"hi\"; while (1) {}", cfg);
    auto kind_of = [&](const std::string& text) {
        for (const Token& t : r.tokens)
            if (t.text == text) return t.kind;
        return TokenKind::BoundaryMarker;
    };
    CHECK(kind_of("if") == TokenKind::ConditionalKeyword);
    CHECK(kind_of("else") == TokenKind::ConditionalKeyword);
    CHECK(kind_of("while") == TokenKind::ConditionalKeyword);
    CHECK(kind_of("return") == TokenKind::Keyword);
    CHECK(kind_of("'a'") == TokenKind::CharLiteral);
    CHECK(kind_of("\"hi\"") == TokenKind::StringLiteral);
}

TEST_CASE("operators use longest match") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult r = tokenize("a >>= b; c == d; e <= f; g++ + h;", cfg);
    std::vector<std::string> t = texts(r.tokens);
    CHECK(std::count(t.begin(), t.end(), ">>=") == 1);
    CHECK(std::count(t.begin(), t.end(), "==") == 1);
    CHECK(std::count(t.begin(), t.end(), "<=") == 1);
    CHECK(std::count(t.begin(), t.end(), "++") == 1);
    for (const Token& tok : r.tokens)
        if (tok.text == ">>=") CHECK(tok.kind == TokenKind::AssignmentOperator);
}

TEST_CASE("number literal forms stay single tokens") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult r = tokenize("a = 0xFFul + 1.5e-3 + 0b101 + 42;", cfg);
    std::vector<std::string> t = texts(r.tokens);
    CHECK(std::count(t.begin(), t.end(), "0xFFul") == 1);
    CHECK(std::count(t.begin(), t.end(), "1.5e-3") == 1);
    CHECK(std::count(t.begin(), t.end(), "0b101") == 1);
}

TEST_CASE("comments and preprocessor lines vanish") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    std::string src =
        "#include <x.h>\n"
        "int f() { // trailing note\n"
        "    /* block\n"
        "       comment */ return 1;\n"
        "}\n";
    LexResult r = tokenize(src, cfg);
    for (const Token& t : r.tokens) {
        CHECK(t.text.find("comment") == std::string::npos);
        CHECK(t.text.find("note") == std::string::npos);
        CHECK(t.text.find("#include") == std::string::npos);
    }
}

TEST_CASE("token positions rebuild the source grid exactly") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    check_grid_round_trip("void f(int n) {\n    int k = n * 2;\n    if (k > 3) { use(k); }\n}\n",
                          cfg);
    check_grid_round_trip("a = \"str with spaces\" ;\nb += 'c';\n", cfg);
}

TEST_CASE("empty and comment-only inputs fail with EmptyInput") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    CHECK_THROWS_AS(tokenize("", cfg), Error);
    CHECK_THROWS_AS(tokenize("   \n\t ", cfg), Error);
    try {
        tokenize("/* only a comment */", cfg);
        FAIL("expected EmptyInput");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyInput");
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("oversize input fails closed unless truncation is on") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    cfg.max_tokens = 10;
    std::string src;
    for (int i = 0; i < 30; ++i) src += "x" + std::to_string(i) + "; ";

    try {
        tokenize(src, cfg);
        FAIL("expected OversizeInput");
    } catch (const Error& e) {
        CHECK(e.code() == "OversizeInput");
        CHECK(e.exit_code() == 3);
    }

    cfg.truncate_oversize = true;
    LexResult r = tokenize(src, cfg);
    CHECK(r.tokens.size() == 10);
    CHECK(r.truncated);
    CHECK(r.tokens.front().text == kBeginMarker);
    CHECK(r.tokens.back().text == kEndMarker);
    CHECK(!r.warnings.empty());
}

TEST_CASE("unterminated constructs warn instead of failing") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    LexResult s = tokenize("a = \"never closed;\n", cfg);
    CHECK(!s.warnings.empty());
    LexResult c = tokenize("x = 1; /* open comment", cfg);
    CHECK(!c.warnings.empty());
    CHECK(c.tokens.size() >= 5);
}

TEST_CASE("tokenization is deterministic and total over fuzzed bytes") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    cfg.truncate_oversize = true;
    Rng rng(99);
    const char alphabet[] = "abcXYZ019 _+-*/=<>!&|^%(){}[];,.\"'#\\\n\t";
    for (int round = 0; round < 200; ++round) {
        std::string src;
        size_t len = 1 + rng.below(80);
        for (size_t i = 0; i < len; ++i) src += alphabet[rng.below(sizeof(alphabet) - 1)];
        try {
            LexResult a = tokenize(src, cfg);
            LexResult b = tokenize(src, cfg);
            REQUIRE(a.tokens.size() == b.tokens.size());
            for (size_t i = 0; i < a.tokens.size(); ++i) {
                CHECK(a.tokens[i].text == b.tokens[i].text);
                CHECK(a.tokens[i].kind == b.tokens[i].kind);
                CHECK(!a.tokens[i].text.empty());
            }
        } catch (const Error& e) {
            CHECK(e.code() == "EmptyInput");  // the only legal failure here
        }
    }
}

TEST_CASE("classify_kind is total and never throws") {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    CHECK(classify_kind("if", std::nullopt, cfg) == TokenKind::ConditionalKeyword);
    CHECK(classify_kind("foo", "(", cfg) == TokenKind::Identifier);
    CHECK(classify_kind("free", "(", cfg) == TokenKind::ApiCall);
    CHECK(classify_kind("@", std::nullopt, cfg) == TokenKind::Punctuation);
    CHECK(classify_kind("<s>", std::nullopt, cfg) == TokenKind::BoundaryMarker);
}

}  // TEST_SUITE
