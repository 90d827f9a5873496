#include "svgdet/embed.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "svgdet/errors.hpp"

namespace svgdet {
namespace {

// FNV-1a over the text, a separator, and the kind byte.
uint64_t fnv1a(const std::string& text, TokenKind kind) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (char c : text) mix(static_cast<unsigned char>(c));
    mix(0xff);
    mix(static_cast<unsigned char>(kind));
    return h;
}

// splitmix64: tiny counter-based generator, bit-stable everywhere
uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double to_unit_interval(uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void check_dim(int dim) {
    if (dim < 8) throw dimension_too_small("embedding dim must be at least 8, got " + std::to_string(dim));
}

}  // namespace

uint64_t embed_key(const std::string& text, TokenKind kind) { return fnv1a(text, kind); }

std::vector<double> hashed_row(const std::string& text, TokenKind kind, int dim, uint64_t seed) {
    check_dim(dim);
    uint64_t state = embed_key(text, kind) ^ (seed * 0x2545f4914f6cdd1dull);
    std::vector<double> row(dim);
    double norm_sq = 0.0;
    for (int j = 0; j < dim; ++j) {
        double v = 2.0 * to_unit_interval(splitmix64(state)) - 1.0;
        row[j] = v;
        norm_sq += v * v;
    }
    // all-zero draw is practically impossible, but normalization must not divide by 0
    if (norm_sq == 0.0) {
        row[0] = 1.0;
        norm_sq = 1.0;
    }
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : row) v *= inv;
    return row;
}

HashedProvider::HashedProvider(int dim, uint64_t seed) : dim_(dim), seed_(seed) { check_dim(dim); }

Matrix HashedProvider::embed(const TokenSequence& tokens) const {
    if (tokens.empty()) throw empty_token_list("cannot embed an empty token sequence");
    Matrix E(static_cast<int>(tokens.size()), dim_);
    // identical (text, kind) pairs reuse one computed row
    std::unordered_map<uint64_t, std::vector<double>> cache;
    for (size_t i = 0; i < tokens.size(); ++i) {
        uint64_t key = embed_key(tokens[i].text, tokens[i].kind);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, hashed_row(tokens[i].text, tokens[i].kind, dim_, seed_)).first;
        for (int j = 0; j < dim_; ++j) E(static_cast<int>(i), j) = it->second[j];
    }
    return E;
}

ImportProvider::ImportProvider(const std::string& path, uint64_t fallback_seed)
    : fallback_seed_(fallback_seed) {
    std::ifstream in(path);
    if (!in) throw file_unreadable("cannot open embedding file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("dim=", 0) != 0)
        throw format_error("embedding file must start with a dim=<d> header");
    dim_ = std::stoi(line.substr(4));
    check_dim(dim_);

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw format_error("embedding line " + std::to_string(lineno) + " has no tab separator");
        std::string key = line.substr(0, tab);
        std::vector<double> row;
        row.reserve(dim_);
        std::istringstream values(line.substr(tab + 1));
        double v;
        while (values >> v) row.push_back(v);
        if (static_cast<int>(row.size()) != dim_)
            throw format_error("embedding line " + std::to_string(lineno) + " has " +
                               std::to_string(row.size()) + " values, expected " + std::to_string(dim_));
        table_[key] = std::move(row);
    }
}

Matrix ImportProvider::embed(const TokenSequence& tokens) const {
    if (tokens.empty()) throw empty_token_list("cannot embed an empty token sequence");
    Matrix E(static_cast<int>(tokens.size()), dim_);
    for (size_t i = 0; i < tokens.size(); ++i) {
        auto it = table_.find(tokens[i].text);
        if (it != table_.end()) {
            for (int j = 0; j < dim_; ++j) E(static_cast<int>(i), j) = it->second[j];
        } else {
            std::vector<double> row = hashed_row(tokens[i].text, tokens[i].kind, dim_, fallback_seed_);
            for (int j = 0; j < dim_; ++j) E(static_cast<int>(i), j) = row[j];
        }
    }
    return E;
}

std::unique_ptr<EmbeddingProvider> make_hashed_provider(int dim, uint64_t seed) {
    return std::make_unique<HashedProvider>(dim, seed);
}

}  // namespace svgdet
