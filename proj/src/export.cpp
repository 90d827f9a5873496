#include <nlohmann/json.hpp>

#include "svgdet/graph.hpp"

namespace svgdet {
namespace {

const char* edge_color(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::SequentialFlow: return "gray";
        case EdgeKind::DataFlow: return "black";
        case EdgeKind::ControlFlow: return "blue";
        default: return "red";  // all poacher kinds
    }
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string to_dot(const SvgGraph& graph) {
    std::string out = "graph svg {\n  node [shape=box fontname=\"monospace\"];\n";
    for (const Token& t : graph.nodes) {
        out += "  n" + std::to_string(t.index) + " [label=\"" + dot_escape(t.text) + "\"];\n";
    }
    for (const TypedEdge& e : graph.edges) {
        out += "  n" + std::to_string(e.src) + " -- n" + std::to_string(e.dst) + " [color=" +
               edge_color(e.kind) + " tooltip=\"" + edge_kind_name(e.kind) + "\"];\n";
    }
    out += "}\n";
    return out;
}

std::string to_json(const SvgGraph& graph) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const Token& t : graph.nodes) {
        j["nodes"].push_back({{"index", t.index},
                              {"text", t.text},
                              {"kind", kind_name(t.kind)},
                              {"line", t.line},
                              {"col", t.col}});
    }
    j["edges"] = nlohmann::json::array();
    for (const TypedEdge& e : graph.edges)
        j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"kind", edge_kind_name(e.kind)}});
    j["diagnostics"] = graph.diagnostics;
    return j.dump(2) + "\n";
}

}  // namespace svgdet
