#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "doctest.h"
#include "svgdet/embed.hpp"
#include "svgdet/errors.hpp"

using namespace svgdet;

namespace {

Token make(const std::string& text, TokenKind kind, int index) {
    return {text, kind, index, 1, 1};
}

double norm(const Matrix& m, int row) {
    double s = 0;
    for (int j = 0; j < m.cols; ++j) s += m(row, j) * m(row, j);
    return std::sqrt(s);
}

bool rows_equal(const Matrix& a, int i, const Matrix& b, int j) {
    for (int c = 0; c < a.cols; ++c)
        if (a(i, c) != b(j, c)) return false;
    return true;
}

std::string row_bits(const std::vector<double>& row) {
    std::string s(row.size() * sizeof(double), '\0');
    std::memcpy(s.data(), row.data(), s.size());
    return s;
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("rows are unit length") {
    HashedProvider p(16, 1);
    TokenSequence toks{make("alpha", TokenKind::Identifier, 0),
                       make("beta", TokenKind::Keyword, 1),
                       make("+", TokenKind::Operator, 2)};
    Matrix E = p.embed(toks);
    REQUIRE(E.rows == 3);
    REQUIRE(E.cols == 16);
    for (int i = 0; i < E.rows; ++i) CHECK(norm(E, i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical lexeme and kind share a row; either differing separates") {
    HashedProvider p(16, 1);
    TokenSequence toks{make("x", TokenKind::Identifier, 0), make("x", TokenKind::Identifier, 1),
                       make("x", TokenKind::Keyword, 2), make("y", TokenKind::Identifier, 3)};
    Matrix E = p.embed(toks);
    CHECK(rows_equal(E, 0, E, 1));
    CHECK(!rows_equal(E, 0, E, 2));
    CHECK(!rows_equal(E, 0, E, 3));
}

TEST_CASE("same seed reproduces bitwise, another seed does not") {
    TokenSequence toks{make("srand", TokenKind::Identifier, 0), make("42", TokenKind::NumberLiteral, 1)};
    Matrix a = HashedProvider(32, 7).embed(toks);
    Matrix b = HashedProvider(32, 7).embed(toks);
    Matrix c = HashedProvider(32, 8).embed(toks);
    CHECK(a.a == b.a);
    CHECK(a.a != c.a);
}

TEST_CASE("ten thousand distinct keys produce ten thousand distinct rows") {
    std::unordered_set<std::string> seen;
    for (int i = 0; i < 10000; ++i)
        seen.insert(row_bits(hashed_row("tok_" + std::to_string(i), TokenKind::Identifier, 8, 1)));
    CHECK(seen.size() == 10000);
}

TEST_CASE("dimension floor and empty input are rejected") {
    try {
        HashedProvider p(4, 1);
        p.embed({make("x", TokenKind::Identifier, 0)});
        FAIL("expected DimensionTooSmall");
    } catch (const Error& e) {
        CHECK(e.code() == "DimensionTooSmall");
        CHECK(e.exit_code() == 4);
    }
    try {
        HashedProvider p(16, 1);
        p.embed({});
        FAIL("expected EmptyTokenList");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyTokenList");
    }
}

TEST_CASE("import provider returns stored rows and hashes the rest") {
    std::string path = "embed_import_test.tsv";
    {
        std::ofstream out(path);
        out << "dim=8\n";
        out << "alpha\t1 0 0 0 0 0 0 0\n";
        out << "beta\t0 0.5 0 0 0 0 0 0.25\n";
    }
    ImportProvider p(path, 9);
    CHECK(p.table_size() == 2);
    TokenSequence toks{make("alpha", TokenKind::Identifier, 0),
                       make("beta", TokenKind::Identifier, 1),
                       make("gamma", TokenKind::Identifier, 2)};
    Matrix E = p.embed(toks);
    CHECK(E(0, 0) == 1.0);
    CHECK(E(1, 1) == 0.5);
    CHECK(E(1, 7) == 0.25);

    // unknown key falls back to the hashed row for the same (text, kind, seed)
    std::vector<double> want = hashed_row("gamma", TokenKind::Identifier, 8, 9);
    for (int j = 0; j < 8; ++j) CHECK(E(2, j) == want[static_cast<size_t>(j)]);
}

TEST_CASE("import provider rejects malformed tables") {
    std::string bad_header = "embed_import_bad1.tsv";
    {
        std::ofstream out(bad_header);
        out << "rows=8\nalpha\t1 2 3\n";
    }
    CHECK_THROWS_AS(ImportProvider(bad_header, 1), Error);

    std::string bad_width = "embed_import_bad2.tsv";
    {
        std::ofstream out(bad_width);
        out << "dim=8\nalpha\t1 2 3\n";
    }
    try {
        ImportProvider p(bad_width, 1);
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(e.exit_code() == 3);
    }

    CHECK_THROWS_AS(ImportProvider("no_such_embedding_file.tsv", 1), Error);
}

}  // TEST_SUITE
