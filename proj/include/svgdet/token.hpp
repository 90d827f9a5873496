#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace svgdet {

enum class TokenKind {
    Identifier,
    Keyword,
    ConditionalKeyword,  // if / else / while / for / switch
    Operator,
    AssignmentOperator,  // = += -= *= /= %= <<= >>= &= |= ^=
    Punctuation,
    NumberLiteral,
    StringLiteral,
    CharLiteral,
    ApiCall,         // identifier at a call site whose name is in the configured API lists
    BoundaryMarker,  // synthetic <s> / </s> wrapping every token sequence
};

struct Token {
    std::string text;  // verbatim lexeme
    TokenKind kind = TokenKind::Identifier;
    int index = 0;  // 0-based position in the sequence
    int line = 1;   // 1-based
    int col = 1;    // 1-based, in bytes
};

using TokenSequence = std::vector<Token>;

inline constexpr const char* kBeginMarker = "<s>";
inline constexpr const char* kEndMarker = "</s>";

const char* kind_name(TokenKind kind);

// Concatenates non-marker token texts with single spaces; used by round-trip checks
// and to rebuild a source line for diagnostics.
std::string join_tokens(const TokenSequence& tokens);

}  // namespace svgdet
