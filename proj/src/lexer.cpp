#include "svgdet/lexer.hpp"

#include <array>
#include <cctype>

#include "svgdet/errors.hpp"

namespace svgdet {
namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

// Multi-character operators, longest first so greedy matching is correct.
constexpr std::array kOperators3 = {"<<=", ">>=", "..."};
constexpr std::array kOperators2 = {"+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "==", "!=",
                                    "<=", ">=", "&&", "||", "<<", ">>", "->", "++", "--", "::"};

constexpr std::array kAssignment = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="};

bool is_assignment(std::string_view s) {
    for (const char* op : kAssignment)
        if (s == op) return true;
    return false;
}

bool is_punct_char(char c) {
    return c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']' || c == ';' || c == ',';
}

// Raw lexeme plus position; kinds are assigned in a second pass (call-site
// detection needs to peek at the following lexeme).
struct RawLexeme {
    std::string text;
    int line, col;
};

class Scanner {
public:
    Scanner(std::string_view src, std::vector<std::string>& warnings)
        : src_(src), warnings_(warnings) {}

    std::vector<RawLexeme> run() {
        std::vector<RawLexeme> out;
        while (!eof()) {
            skip_blank();
            if (eof()) break;
            int line = line_, col = col_;
            std::string lexeme = scan_one();
            if (!lexeme.empty()) out.push_back({std::move(lexeme), line, col});
        }
        return out;
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    // Whitespace, comments, and preprocessor lines all vanish here.
    void skip_blank() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '\n') {
                advance();
                at_line_start_ = true;
            } else if (c == '/' && peek(1) == '/') {
                while (!eof() && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                advance();
                advance();
                bool closed = false;
                while (!eof()) {
                    if (peek() == '*' && peek(1) == '/') {
                        advance();
                        advance();
                        closed = true;
                        break;
                    }
                    advance();
                }
                if (!closed) warnings_.push_back("unterminated block comment");
            } else if (c == '#' && at_line_start_) {
                // preprocessor directive: swallow the line, honoring \-continuations
                while (!eof()) {
                    if (peek() == '\\' && peek(1) == '\n') {
                        advance();
                        advance();
                        continue;
                    }
                    if (peek() == '\n') break;
                    advance();
                }
            } else {
                at_line_start_ = false;
                return;
            }
        }
    }

    std::string scan_one() {
        char c = peek();
        if (is_ident_start(c)) return scan_ident();
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return scan_number();
        if (c == '"') return scan_quoted('"');
        if (c == '\'') return scan_quoted('\'');
        return scan_symbol();
    }

    std::string scan_ident() {
        std::string s;
        while (!eof() && is_ident_char(peek())) s += advance();
        return s;
    }

    // Accepts the usual C zoo: hex/bin/octal prefixes, decimals, exponents,
    // and integer/float suffixes.  Precision is not needed, only token unity.
    std::string scan_number() {
        std::string s;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'b' || peek(1) == 'B')) {
            s += advance();
            s += advance();
            while (!eof() && (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '\'')) s += advance();
        } else {
            while (!eof() && (is_digit(peek()) || peek() == '.' || peek() == '\'')) s += advance();
            if (!eof() && (peek() == 'e' || peek() == 'E')) {
                s += advance();
                if (!eof() && (peek() == '+' || peek() == '-')) s += advance();
                while (!eof() && is_digit(peek())) s += advance();
            }
        }
        while (!eof() && (peek() == 'u' || peek() == 'U' || peek() == 'l' || peek() == 'L' ||
                          peek() == 'f' || peek() == 'F'))
            s += advance();
        return s;
    }

    // Entire literal, quotes included.  An unterminated literal runs to the
    // end of the line rather than swallowing the rest of the input.
    std::string scan_quoted(char quote) {
        std::string s;
        s += advance();  // opening quote
        while (!eof()) {
            char c = peek();
            if (c == '\\' && pos_ + 1 < src_.size()) {
                s += advance();
                s += advance();
                continue;
            }
            if (c == '\n') {
                warnings_.push_back("unterminated literal");
                return s;
            }
            s += advance();
            if (c == quote) return s;
        }
        warnings_.push_back("unterminated literal");
        return s;
    }

    std::string scan_symbol() {
        if (pos_ + 3 <= src_.size()) {
            std::string_view three = src_.substr(pos_, 3);
            for (const char* op : kOperators3)
                if (three == op) {
                    advance(); advance(); advance();
                    return std::string(three);
                }
        }
        if (pos_ + 2 <= src_.size()) {
            std::string_view two = src_.substr(pos_, 2);
            for (const char* op : kOperators2)
                if (two == op) {
                    advance(); advance();
                    return std::string(two);
                }
        }
        std::string s;
        s += advance();
        return s;
    }

    std::string_view src_;
    std::vector<std::string>& warnings_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    bool at_line_start_ = true;
};

}  // namespace

TokenKind classify_kind(std::string_view lexeme, std::optional<std::string_view> lookahead,
                        const AnalysisConfig& cfg) {
    if (lexeme.empty()) return TokenKind::Punctuation;
    if (lexeme == kBeginMarker || lexeme == kEndMarker) return TokenKind::BoundaryMarker;

    char c = lexeme[0];
    if (is_ident_start(c)) {
        std::string name(lexeme);
        if (cfg.conditional_keywords.count(name)) return TokenKind::ConditionalKeyword;
        if (cfg.keywords.count(name)) return TokenKind::Keyword;
        if (lookahead && *lookahead == "(" && (cfg.api_any_call || cfg.is_known_api(name)))
            return TokenKind::ApiCall;
        return TokenKind::Identifier;
    }
    if (is_digit(c) || (c == '.' && lexeme.size() > 1 && is_digit(lexeme[1])))
        return TokenKind::NumberLiteral;
    if (c == '"') return TokenKind::StringLiteral;
    if (c == '\'') return TokenKind::CharLiteral;
    if (is_assignment(lexeme)) return TokenKind::AssignmentOperator;
    if (lexeme.size() == 1 && is_punct_char(c)) return TokenKind::Punctuation;
    for (const char* op : kOperators3)
        if (lexeme == op) return TokenKind::Operator;
    for (const char* op : kOperators2)
        if (lexeme == op) return TokenKind::Operator;
    if (std::string_view("+-*/%<>!~&|^?:.").find(c) != std::string_view::npos)
        return TokenKind::Operator;
    return TokenKind::Punctuation;  // total fallback: never reject a character
}

LexResult tokenize(std::string_view source, const AnalysisConfig& cfg) {
    LexResult result;
    std::vector<RawLexeme> raw = Scanner(source, result.warnings).run();
    if (raw.empty()) throw empty_input("no tokens after comment stripping");

    TokenSequence& tokens = result.tokens;
    tokens.reserve(raw.size() + 2);
    tokens.push_back({kBeginMarker, TokenKind::BoundaryMarker, 0, 1, 1});
    for (size_t i = 0; i < raw.size(); ++i) {
        std::optional<std::string_view> next;
        if (i + 1 < raw.size()) next = raw[i + 1].text;
        Token t;
        t.text = raw[i].text;
        t.kind = classify_kind(t.text, next, cfg);
        t.index = static_cast<int>(tokens.size());
        t.line = raw[i].line;
        t.col = raw[i].col;
        tokens.push_back(std::move(t));
    }
    const RawLexeme& last = raw.back();
    tokens.push_back({kEndMarker, TokenKind::BoundaryMarker, static_cast<int>(tokens.size()),
                      last.line, last.col + static_cast<int>(last.text.size())});

    if (static_cast<int>(tokens.size()) > cfg.max_tokens) {
        if (!cfg.truncate_oversize)
            throw oversize_input("sequence has " + std::to_string(tokens.size()) +
                                 " tokens, limit is " + std::to_string(cfg.max_tokens));
        // Keep the first max_tokens-1 tokens and close with the end marker so
        // downstream stages still see a well-formed, bounded sequence.
        tokens.resize(cfg.max_tokens - 1);
        Token end = {kEndMarker, TokenKind::BoundaryMarker, cfg.max_tokens - 1,
                     tokens.back().line, tokens.back().col + static_cast<int>(tokens.back().text.size())};
        tokens.push_back(std::move(end));
        result.truncated = true;
        result.warnings.push_back("input truncated to " + std::to_string(cfg.max_tokens) + " tokens");
    }
    return result;
}

}  // namespace svgdet
