#include "svgdet/token.hpp"

namespace svgdet {

const char* kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Identifier: return "Identifier";
        case TokenKind::Keyword: return "Keyword";
        case TokenKind::ConditionalKeyword: return "ConditionalKeyword";
        case TokenKind::Operator: return "Operator";
        case TokenKind::AssignmentOperator: return "AssignmentOperator";
        case TokenKind::Punctuation: return "Punctuation";
        case TokenKind::NumberLiteral: return "NumberLiteral";
        case TokenKind::StringLiteral: return "StringLiteral";
        case TokenKind::CharLiteral: return "CharLiteral";
        case TokenKind::ApiCall: return "ApiCall";
        case TokenKind::BoundaryMarker: return "BoundaryMarker";
    }
    return "Identifier";
}

std::string join_tokens(const TokenSequence& tokens) {
    std::string out;
    for (const Token& t : tokens) {
        if (t.kind == TokenKind::BoundaryMarker) continue;
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

}  // namespace svgdet
