#include "svgdet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "svgdet/errors.hpp"

namespace svgdet {
namespace {

// unordered pair key for dedup sets
uint64_t pair_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

// index of the matching close delimiter, -1 when the input runs out first
int find_matching(const TokenSequence& tokens, int open_idx, const char* open, const char* close) {
    int depth = 0;
    for (int i = open_idx; i < static_cast<int>(tokens.size()); ++i) {
        if (tokens[i].text == open) ++depth;
        else if (tokens[i].text == close) {
            if (--depth == 0) return i;
        }
    }
    return -1;
}

// Identifier tokens inside a call's parentheses.  `call_idx` points at the
// callee; returns empty when no argument list follows.
std::vector<int> call_argument_identifiers(const TokenSequence& tokens, int call_idx,
                                           std::vector<std::string>* diagnostics) {
    std::vector<int> args;
    int n = static_cast<int>(tokens.size());
    if (call_idx + 1 >= n || tokens[call_idx + 1].text != "(") return args;
    int close = find_matching(tokens, call_idx + 1, "(", ")");
    if (close < 0) {
        if (diagnostics)
            diagnostics->push_back("UnbalancedDelimiters: unclosed argument list for '" +
                                   tokens[call_idx].text + "' at " + std::to_string(tokens[call_idx].line) +
                                   ":" + std::to_string(tokens[call_idx].col));
        close = n;  // degrade: scan to the end
    }
    for (int j = call_idx + 2; j < close; ++j)
        if (tokens[j].kind == TokenKind::Identifier) args.push_back(j);
    return args;
}

}  // namespace

const char* edge_kind_name(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::SequentialFlow: return "SequentialFlow";
        case EdgeKind::DataFlow: return "DataFlow";
        case EdgeKind::ControlFlow: return "ControlFlow";
        case EdgeKind::PoacherDataProcessing: return "PoacherDataProcessing";
        case EdgeKind::PoacherAccessControl: return "PoacherAccessControl";
        case EdgeKind::PoacherResourceManagement: return "PoacherResourceManagement";
    }
    return "SequentialFlow";
}

bool is_poacher(EdgeKind kind) {
    return kind == EdgeKind::PoacherDataProcessing || kind == EdgeKind::PoacherAccessControl ||
           kind == EdgeKind::PoacherResourceManagement;
}

bool SvgGraph::adjacent(int i, int j) const {
    if (i < 0 || j < 0 || i >= node_count() || j >= node_count()) return false;
    const std::vector<int>& ni = neighbors[i];
    return std::find(ni.begin(), ni.end(), j) != ni.end();
}

Matrix SvgGraph::dense_adjacency() const {
    int n = node_count();
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j : neighbors[i]) A(i, j) = 1.0;
    return A;
}

std::map<EdgeKind, int> SvgGraph::edge_counts() const {
    std::map<EdgeKind, int> counts;
    for (const TypedEdge& e : edges) counts[e.kind]++;
    return counts;
}

std::vector<TypedEdge> build_sequential_edges(const TokenSequence& tokens, int window) {
    std::vector<TypedEdge> edges;
    int n = static_cast<int>(tokens.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j <= i + window && j < n; ++j)
            edges.push_back({i, j, EdgeKind::SequentialFlow});
    return edges;
}

std::vector<TypedEdge> build_data_flow_edges(const TokenSequence& tokens) {
    std::vector<TypedEdge> edges;
    std::unordered_set<uint64_t> seen;
    int n = static_cast<int>(tokens.size());

    auto add = [&](int src, int dst) {
        if (src == dst) return;
        if (seen.insert(pair_key(src, dst)).second) edges.push_back({src, dst, EdgeKind::DataFlow});
    };

    // def-use chain: each identifier occurrence links back to its most recent
    // prior occurrence of the same spelling
    std::unordered_map<std::string, int> last_seen;
    for (int i = 0; i < n; ++i) {
        if (tokens[i].kind != TokenKind::Identifier) continue;
        auto it = last_seen.find(tokens[i].text);
        if (it != last_seen.end()) add(i, it->second);
        last_seen[tokens[i].text] = i;
    }

    // assignment: left-hand token links to every identifier on the right,
    // up to the statement terminator
    for (int i = 1; i < n; ++i) {
        if (tokens[i].kind != TokenKind::AssignmentOperator) continue;
        int lhs = i - 1;
        if (tokens[lhs].kind == TokenKind::BoundaryMarker) continue;
        for (int j = i + 1; j < n; ++j) {
            if (tokens[j].text == ";" || tokens[j].kind == TokenKind::BoundaryMarker) break;
            if (tokens[j].kind == TokenKind::Identifier) add(lhs, j);
        }
    }
    return edges;
}

std::vector<TypedEdge> build_control_flow_edges(const TokenSequence& tokens,
                                                std::vector<std::string>* diagnostics) {
    std::vector<TypedEdge> edges;
    std::unordered_set<uint64_t> seen;
    int n = static_cast<int>(tokens.size());

    auto add = [&](int src, int dst) {
        if (src == dst || dst < 0 || dst >= n) return;
        if (seen.insert(pair_key(src, dst)).second) edges.push_back({src, dst, EdgeKind::ControlFlow});
    };
    auto diag = [&](const Token& t, const std::string& what) {
        if (diagnostics)
            diagnostics->push_back("UnbalancedDelimiters: " + what + " for '" + t.text + "' at " +
                                   std::to_string(t.line) + ":" + std::to_string(t.col));
    };

    for (int c = 0; c < n; ++c) {
        if (tokens[c].kind != TokenKind::ConditionalKeyword) continue;

        // where the guarded block begins
        int b;
        if (tokens[c].text == "else") {
            b = c + 1;
        } else {
            if (c + 1 >= n || tokens[c + 1].text != "(") {
                diag(tokens[c], "missing condition");
                continue;
            }
            int close = find_matching(tokens, c + 1, "(", ")");
            if (close < 0) {
                diag(tokens[c], "unmatched parenthesis");
                continue;
            }
            b = close + 1;
        }
        if (b >= n) continue;

        // block extent: brace-delimited, or a single statement up to ';'
        int first = -1, after = -1;
        if (tokens[b].text == "{") {
            int close = find_matching(tokens, b, "{", "}");
            if (close < 0) {
                diag(tokens[c], "unmatched brace");
                continue;
            }
            if (close > b + 1) first = b + 1;
            after = close + 1;
        } else {
            if (tokens[b].kind != TokenKind::BoundaryMarker) first = b;
            int depth = 0;
            for (int j = b; j < n; ++j) {
                const std::string& t = tokens[j].text;
                if (t == "(" || t == "[") ++depth;
                else if (t == ")" || t == "]") --depth;
                else if (t == "{" && depth == 0) {
                    // statement carries its own brace block (e.g. "else if (...) { ... }")
                    int close = find_matching(tokens, j, "{", "}");
                    if (close < 0) {
                        diag(tokens[c], "unmatched brace");
                        first = -1;
                    } else {
                        after = close + 1;
                    }
                    break;
                } else if (t == ";" && depth == 0) {
                    after = j + 1;
                    break;
                }
            }
        }

        if (first >= 0) add(c, first);                    // branch taken
        if (after >= 0 && after < n) add(c, after);       // fall-through successor
    }
    return edges;
}

std::vector<TypedEdge> data_processing_edges(const TokenSequence& tokens, const AnalysisConfig& cfg) {
    std::vector<TypedEdge> edges;
    std::unordered_set<uint64_t> seen;
    int n = static_cast<int>(tokens.size());

    auto add = [&](int src, int dst) {
        if (src == dst) return;
        if (seen.insert(pair_key(src, dst)).second)
            edges.push_back({src, dst, EdgeKind::PoacherDataProcessing});
    };

    for (int i = 0; i < n; ++i) {
        if (tokens[i].kind == TokenKind::AssignmentOperator && i > 0 &&
            tokens[i - 1].kind != TokenKind::BoundaryMarker) {
            for (int j = i + 1; j < n; ++j) {
                if (tokens[j].text == ";" || tokens[j].kind == TokenKind::BoundaryMarker) break;
                if (tokens[j].kind == TokenKind::Identifier) add(i - 1, j);
            }
        }
        if (tokens[i].kind == TokenKind::ApiCall && cfg.is_unsafe_api(tokens[i].text)) {
            for (int arg : call_argument_identifiers(tokens, i, nullptr)) add(i, arg);
        }
    }
    return edges;
}

std::vector<TypedEdge> access_control_edges(const TokenSequence& tokens, const AnalysisConfig& cfg,
                                            const std::vector<std::string>& fun_params) {
    std::vector<TypedEdge> edges;
    if (fun_params.empty()) return edges;
    std::unordered_set<uint64_t> seen;
    std::unordered_set<std::string> params(fun_params.begin(), fun_params.end());
    int n = static_cast<int>(tokens.size());

    // texts mentioned inside each conditional's parenthesized condition
    std::vector<std::pair<int, std::unordered_set<std::string>>> conditions;
    for (int c = 0; c < n; ++c) {
        if (tokens[c].kind != TokenKind::ConditionalKeyword || tokens[c].text == "else") continue;
        if (c + 1 >= n || tokens[c + 1].text != "(") continue;
        int close = find_matching(tokens, c + 1, "(", ")");
        if (close < 0) close = n;
        std::unordered_set<std::string> mentioned;
        for (int j = c + 2; j < close; ++j)
            if (tokens[j].kind == TokenKind::Identifier) mentioned.insert(tokens[j].text);
        conditions.emplace_back(c, std::move(mentioned));
    }

    for (int i = 0; i < n; ++i) {
        if (tokens[i].kind != TokenKind::ApiCall || !cfg.is_execution_api(tokens[i].text)) continue;
        for (int arg : call_argument_identifiers(tokens, i, nullptr)) {
            const std::string& name = tokens[arg].text;
            if (!params.count(name)) continue;
            bool checked = false;
            for (const auto& [c, mentioned] : conditions) {
                if (c >= i) break;
                if (mentioned.count(name)) {
                    checked = true;
                    break;
                }
            }
            if (checked) continue;
            if (seen.insert(pair_key(i, arg)).second)
                edges.push_back({i, arg, EdgeKind::PoacherAccessControl});
        }
    }
    return edges;
}

std::vector<TypedEdge> resource_management_edges(const TokenSequence& tokens,
                                                 const AnalysisConfig& cfg) {
    std::vector<TypedEdge> edges;
    std::unordered_set<uint64_t> seen;
    int n = static_cast<int>(tokens.size());

    auto add = [&](int src, int dst) {
        if (src == dst) return;
        if (seen.insert(pair_key(src, dst)).second)
            edges.push_back({src, dst, EdgeKind::PoacherResourceManagement});
    };

    // ended[name] = {index of the releasing call, index of the released arg};
    // any occurrence past the argument itself is a use after release
    struct FreeSite { int call, arg; };
    std::unordered_map<std::string, FreeSite> ended;
    // unmatched acquisitions: {token index, resource_pairs index}
    std::vector<std::pair<int, int>> open_stack;

    for (int i = 0; i < n; ++i) {
        const Token& t = tokens[i];
        if (t.kind == TokenKind::Identifier) {
            auto it = ended.find(t.text);
            if (it != ended.end() && i > it->second.arg) add(it->second.call, i);
            continue;
        }
        if (t.kind != TokenKind::ApiCall) continue;

        if (cfg.is_free_api(t.text)) {
            std::vector<int> args = call_argument_identifiers(tokens, i, nullptr);
            if (!args.empty()) {
                const Token& arg = tokens[args.front()];
                auto it = ended.find(arg.text);
                // releasing an already released name is itself a use after release
                if (it != ended.end() && args.front() > it->second.arg)
                    add(it->second.call, args.front());
                ended[arg.text] = {i, args.front()};
            }
        }
        int rel = cfg.release_pair(t.text);
        if (rel >= 0) {
            for (auto it = open_stack.rbegin(); it != open_stack.rend(); ++it) {
                if (it->second == rel) {
                    open_stack.erase(std::next(it).base());
                    break;
                }
            }
        }
        int acq = cfg.acquire_pair(t.text);
        if (acq >= 0) open_stack.emplace_back(i, acq);
    }

    // anything still held at the end of the function leaks across it
    for (const auto& [idx, pair] : open_stack) add(idx, n - 1);
    return edges;
}

std::vector<std::string> extract_parameters(const TokenSequence& tokens) {
    std::vector<std::string> params;
    int n = static_cast<int>(tokens.size());

    // the signature is everything before the first top-level '{'
    int body = -1, depth = 0;
    for (int i = 0; i < n; ++i) {
        const std::string& t = tokens[i].text;
        if (t == "(" || t == "[") ++depth;
        else if (t == ")" || t == "]") --depth;
        else if (t == "{" && depth == 0) {
            body = i;
            break;
        }
    }
    if (body <= 0) return params;

    // a real signature has no statements or conditionals before the brace
    int open = -1, close = -1;
    for (int i = 0; i < body; ++i) {
        const Token& t = tokens[i];
        if (t.text == ";" || t.kind == TokenKind::ConditionalKeyword ||
            t.kind == TokenKind::AssignmentOperator)
            return params;
        if (t.text == "(" && open < 0) {
            open = i;
            close = find_matching(tokens, i, "(", ")");
        }
    }
    if (open < 0 || close < 0 || close > body) return params;

    // last identifier in each comma-separated segment is the parameter name
    int last_ident = -1;
    depth = 0;
    for (int i = open + 1; i < close; ++i) {
        const std::string& t = tokens[i].text;
        if (t == "(" || t == "[") ++depth;
        else if (t == ")" || t == "]") --depth;
        else if (t == "," && depth == 0) {
            if (last_ident >= 0) params.push_back(tokens[last_ident].text);
            last_ident = -1;
        } else if (tokens[i].kind == TokenKind::Identifier) {
            last_ident = i;
        }
    }
    if (last_ident >= 0) params.push_back(tokens[last_ident].text);
    return params;
}

SvgGraph assemble_svg(const TokenSequence& tokens, const AnalysisConfig& cfg) {
    SvgGraph g;
    g.nodes = tokens;
    int n = g.node_count();
    g.neighbors.resize(n);

    auto connect = [&](int i, int j) {
        if (i == j || g.adjacent(i, j)) return;
        g.neighbors[i].push_back(j);
        g.neighbors[j].push_back(i);
    };
    auto take = [&](std::vector<TypedEdge>&& batch) {
        for (TypedEdge& e : batch) {
            connect(e.src, e.dst);
            g.edges.push_back(e);
        }
    };

    std::vector<std::string> params = extract_parameters(tokens);
    take(build_data_flow_edges(tokens));
    take(build_control_flow_edges(tokens, &g.diagnostics));
    take(data_processing_edges(tokens, cfg));
    take(access_control_edges(tokens, cfg, params));
    take(resource_management_edges(tokens, cfg));

    // sequential edges come last and skip pairs an earlier kind already holds
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j <= i + cfg.window && j < n; ++j) {
            if (g.adjacent(i, j)) continue;
            g.neighbors[i].push_back(j);
            g.neighbors[j].push_back(i);
            g.edges.push_back({i, j, EdgeKind::SequentialFlow});
        }
    }
    for (std::vector<int>& ns : g.neighbors) std::sort(ns.begin(), ns.end());
    return g;
}

Matrix normalize_adjacency(const Matrix& adjacency) {
    if (adjacency.rows != adjacency.cols)
        throw shape_mismatch("adjacency must be square, got " + std::to_string(adjacency.rows) +
                             "x" + std::to_string(adjacency.cols));
    int n = adjacency.rows;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (adjacency(i, j) != adjacency(j, i))
                throw non_symmetric_input("adjacency differs at (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");

    // self loops keep every degree positive, then scale both sides by
    // the inverse square root of the degree
    std::vector<double> inv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        double deg = 1.0;
        for (int j = 0; j < n; ++j) deg += adjacency(i, j);
        inv_sqrt[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double hat = adjacency(i, j) + (i == j ? 1.0 : 0.0);
            if (hat != 0.0) out(i, j) = hat * inv_sqrt[i] * inv_sqrt[j];
        }
    return out;
}

}  // namespace svgdet
