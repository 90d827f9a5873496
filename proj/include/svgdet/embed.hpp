#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "svgdet/matrix.hpp"
#include "svgdet/token.hpp"

namespace svgdet {

// Stable 64-bit key for a (text, kind) pair; identical inputs hash identically
// on every platform so embeddings are reproducible across runs and machines.
uint64_t embed_key(const std::string& text, TokenKind kind);

// Deterministic pseudo-random unit-norm row for one token key.
std::vector<double> hashed_row(const std::string& text, TokenKind kind, int dim, uint64_t seed);

// Maps a token sequence to an n x d feature matrix.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual const char* name() const = 0;
    virtual int dim() const = 0;
    virtual Matrix embed(const TokenSequence& tokens) const = 0;
};

// Default provider: rows derived from a seeded generator keyed by
// (token text, token kind), normalized to unit L2 length.
class HashedProvider : public EmbeddingProvider {
public:
    explicit HashedProvider(int dim = 768, uint64_t seed = 1);
    const char* name() const override { return "hashed"; }
    int dim() const override { return dim_; }
    Matrix embed(const TokenSequence& tokens) const override;
    uint64_t seed() const { return seed_; }

private:
    int dim_;
    uint64_t seed_;
};

// Reads pre-computed vectors from a text file: a "dim=<d>" header line, then
// one record per token text ("text<TAB>v1 v2 ... vd").  Tokens missing from
// the file fall back to the hashed provider's row for the same key.
class ImportProvider : public EmbeddingProvider {
public:
    ImportProvider(const std::string& path, uint64_t fallback_seed = 1);
    const char* name() const override { return "import"; }
    int dim() const override { return dim_; }
    Matrix embed(const TokenSequence& tokens) const override;
    size_t table_size() const { return table_.size(); }

private:
    int dim_;
    uint64_t fallback_seed_;
    std::unordered_map<std::string, std::vector<double>> table_;
};

std::unique_ptr<EmbeddingProvider> make_hashed_provider(int dim, uint64_t seed);

}  // namespace svgdet
