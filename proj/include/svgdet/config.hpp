#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace svgdet {

// Knobs shared by the lexer and the graph builders.  Loadable from a plain
// key = value text file (see configs/default.cfg for the documented format);
// every field has a shipped default so no file is required.
struct AnalysisConfig {
    // --- lexer ---
    int max_tokens = 400;          // hard cap on sequence length, markers included
    bool truncate_oversize = false;  // true: clip to max_tokens instead of failing
    bool api_any_call = false;       // true: every identifier at a call site becomes ApiCall

    // --- graph ---
    int window = 1;  // sequential-flow distance: token i links to i+1..i+window

    // Name lists.  Entries may end in '*' for prefix matching (e.g. "exec*").
    std::vector<std::string> unsafe_apis;     // data-processing poacher sources
    std::vector<std::string> execution_apis;  // access-control poacher sources
    std::vector<std::string> free_apis;       // end an argument's usable scope
    // acquire/release pairs for the resource-management stack, e.g. {"malloc","free"}
    std::vector<std::pair<std::string, std::string>> resource_pairs;

    std::unordered_set<std::string> keywords;
    std::unordered_set<std::string> conditional_keywords;

    static AnalysisConfig defaults();

    bool is_unsafe_api(const std::string& name) const;
    bool is_execution_api(const std::string& name) const;
    bool is_free_api(const std::string& name) const;
    bool is_acquire(const std::string& name) const;
    // index into resource_pairs or -1
    int acquire_pair(const std::string& name) const;
    int release_pair(const std::string& name) const;
    // true when `name` appears in any configured API list (call-site classification)
    bool is_known_api(const std::string& name) const;
};

// Parses the key = value config format; unknown keys fail with ConfigError so
// typos do not silently fall back to defaults.  Missing keys keep defaults.
AnalysisConfig load_config(const std::string& path);

}  // namespace svgdet
