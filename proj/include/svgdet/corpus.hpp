#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace svgdet {

struct LabeledSample {
    std::string id;
    std::string func;  // raw source text
    int target = 0;    // 0 benign, 1 vulnerable
    std::optional<std::string> cwe;          // e.g. "CWE-119"; absent for benign
    std::optional<std::string> description;  // free-text note
    std::string raw;  // original JSONL line, preserved for byte-exact round trips
};

struct RejectedLine {
    int line = 0;
    std::string reason;
    std::string content;
};

struct Corpus {
    std::vector<LabeledSample> samples;
    std::vector<RejectedLine> rejects;

    int count_target(int target) const;
    // distinct CWE tags in first-seen order
    std::vector<std::string> cwe_tags() const;
};

enum class Split { Train, Val, Test };

// sample index -> split, stratified by target with an 80:10:10 allocation
struct SplitMap {
    std::vector<Split> assignment;
    std::vector<int> indices(Split s) const;
};

// One JSON object per line with fields id, func, target, cwe, description.
// Malformed lines land in rejects with a reason; an input with no usable line
// fails with AllLinesRejected.
Corpus load_jsonl(const std::string& path);
// Writes samples back out of their preserved raw lines.
void save_jsonl(const Corpus& corpus, const std::string& path);
// rejects as JSONL: {"line":..,"reason":..,"content":..}
void save_rejects(const Corpus& corpus, const std::string& path);

// Seeded stratified split.  Requires at least 10 samples.
SplitMap split_corpus(const Corpus& corpus, uint64_t seed);

// Class-balance report as TSV (counts, benign:vulnerable ratio, CWE counts).
std::string corpus_stats(const Corpus& corpus);

// Synthesizes n tiny functions at the given benign:vulnerable ratio (e.g. 9.0
// means nine benign per vulnerable).  Vulnerable samples carry one of three
// planted defect shapes (unchecked strcpy, use after free, unchecked
// system(param)) and the matching CWE tag; benign samples use guarded
// counterparts.  Identical seeds reproduce the corpus byte for byte.
Corpus synth_imbalanced(int n, double benign_per_vulnerable, uint64_t seed);

}  // namespace svgdet
