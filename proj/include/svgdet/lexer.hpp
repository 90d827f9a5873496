#pragma once

#include <optional>
#include <string_view>

#include "svgdet/config.hpp"
#include "svgdet/token.hpp"

namespace svgdet {

struct LexResult {
    TokenSequence tokens;  // wrapped in <s> ... </s>
    bool truncated = false;
    std::vector<std::string> warnings;
};

// Classifies a single lexeme given the next lexeme (call-site detection needs
// one token of lookahead).  Never fails: unrecognized input degrades to
// Punctuation so downstream stages always see a total kind assignment.
TokenKind classify_kind(std::string_view lexeme, std::optional<std::string_view> lookahead,
                        const AnalysisConfig& cfg);

// Scans a C/C++ function (or bare body) into a token sequence.  Comments and
// preprocessor lines are skipped; string/char literals stay single tokens; the
// result is wrapped in boundary markers.  Throws EmptyInput when nothing
// remains after comment stripping, OversizeInput when the sequence exceeds
// cfg.max_tokens and truncation is off.
LexResult tokenize(std::string_view source, const AnalysisConfig& cfg);

}  // namespace svgdet
