#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "svgdet/config.hpp"
#include "svgdet/matrix.hpp"
#include "svgdet/token.hpp"

namespace svgdet {

enum class EdgeKind {
    SequentialFlow,
    DataFlow,
    ControlFlow,
    PoacherDataProcessing,
    PoacherAccessControl,
    PoacherResourceManagement,
};

const char* edge_kind_name(EdgeKind kind);
bool is_poacher(EdgeKind kind);

struct TypedEdge {
    int src = 0;
    int dst = 0;
    EdgeKind kind = EdgeKind::SequentialFlow;

    bool operator==(const TypedEdge& o) const {
        return src == o.src && dst == o.dst && kind == o.kind;
    }
};

// Token-level semantic vulnerability graph: the typed edges record why two
// tokens are linked, while the adjacency is their untyped symmetric union
// (kept as neighbor lists so building stays linear in the token count).
struct SvgGraph {
    TokenSequence nodes;
    std::vector<TypedEdge> edges;          // in generation order
    std::vector<std::vector<int>> neighbors;  // symmetric, no self loops
    std::vector<std::string> diagnostics;  // non-fatal degradations

    int node_count() const { return static_cast<int>(nodes.size()); }
    bool adjacent(int i, int j) const;
    // dense 0/1 adjacency, row-major n*n, zero diagonal
    Matrix dense_adjacency() const;
    std::map<EdgeKind, int> edge_counts() const;
};

// Individual edge generators, exposed for testing.  Each returns deduplicated
// edges of its own kind; none mutates the token sequence.
std::vector<TypedEdge> build_sequential_edges(const TokenSequence& tokens, int window);
std::vector<TypedEdge> build_data_flow_edges(const TokenSequence& tokens);
std::vector<TypedEdge> build_control_flow_edges(const TokenSequence& tokens,
                                                std::vector<std::string>* diagnostics = nullptr);
std::vector<TypedEdge> data_processing_edges(const TokenSequence& tokens, const AnalysisConfig& cfg);
std::vector<TypedEdge> access_control_edges(const TokenSequence& tokens, const AnalysisConfig& cfg,
                                            const std::vector<std::string>& fun_params);
std::vector<TypedEdge> resource_management_edges(const TokenSequence& tokens, const AnalysisConfig& cfg);

// Parameter names from a leading signature, empty for a bare body.
std::vector<std::string> extract_parameters(const TokenSequence& tokens);

// Runs the full composition: data flow, control flow, poacher (processing,
// access, resource), then sequential edges which skip any pair an earlier
// generator already connected.
SvgGraph assemble_svg(const TokenSequence& tokens, const AnalysisConfig& cfg);

// Symmetric renormalization: with self loops added, scales each entry by the
// inverse square roots of both endpoint degrees.  Input must be square,
// symmetric, and zero-diagonal.
Matrix normalize_adjacency(const Matrix& adjacency);

// Graphviz rendering; edge colors: sequential gray, data black, control blue,
// poacher red.
std::string to_dot(const SvgGraph& graph);
// JSON with nodes (index, text, kind, line, col) and typed edges.
std::string to_json(const SvgGraph& graph);

}  // namespace svgdet
