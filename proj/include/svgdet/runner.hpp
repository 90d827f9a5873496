#pragma once

#include <string>

#include "svgdet/checkpoint.hpp"
#include "svgdet/manifest.hpp"
#include "svgdet/nn.hpp"

namespace svgdet {

// Command implementations shared by the CLI binary and the test suites, so
// both exercise exactly the same code paths.  Each run_* writes its outputs
// plus a manifest describing every resolved setting; *_from_manifest rebuilds
// the option struct so a run can be replayed byte for byte.

struct TokenizeOptions {
    std::string source_path;
    std::string config_path;  // optional analysis config
    AnalysisConfig analysis = AnalysisConfig::defaults();
};
std::string run_tokenize(const TokenizeOptions& opt);  // TSV: index kind text line col

struct GraphOptions {
    std::string source_path;
    std::string out_prefix;   // writes <prefix>.dot and <prefix>.json
    std::string config_path;
    AnalysisConfig analysis = AnalysisConfig::defaults();
    std::string manifest_path;  // default <prefix>.manifest
};
std::string run_graph(const GraphOptions& opt);  // returns the edge summary

struct TrainOptions {
    std::string corpus_path;
    std::string checkpoint_path;
    std::string log_path;       // default <checkpoint>.log.tsv
    std::string manifest_path;  // default <checkpoint>.manifest
    std::string config_path;
    TrainConfig cfg;
};
TrainResult run_train(const TrainOptions& opt);
TrainOptions train_options_from_manifest(const Manifest& manifest);

struct EvalOptions {
    std::string corpus_path;
    std::string checkpoint_path;
    std::string report_path;
    std::string manifest_path;  // default <report>.manifest
    std::string config_path;
    std::string split = "test";  // train | val | test | all
    std::string import_path;     // embeddings file when the checkpoint used "import"
    AnalysisConfig analysis;
    bool analysis_set = false;  // false: use training defaults (truncation on)
};
Metrics run_eval(const EvalOptions& opt);
EvalOptions eval_options_from_manifest(const Manifest& manifest);

struct PredictOptions {
    std::string source_path;
    std::string checkpoint_path;
    std::string config_path;
    std::string import_path;
    AnalysisConfig analysis;
    bool analysis_set = false;
};
std::string run_predict(const PredictOptions& opt);  // formatted verdict + edges

struct SynthOptions {
    int n = 2000;
    double ratio = 9.0;  // benign per vulnerable
    uint64_t seed = 1;
    std::string out_path;
    std::string manifest_path;  // default <out>.manifest
};
void run_synth(const SynthOptions& opt);

struct ExportOptions {
    std::string corpus_path;
    std::string stats_path;
    std::string rejects_path;  // optional
    std::string manifest_path;
};
std::string run_export(const ExportOptions& opt);  // returns the stats TSV

// Report/formatting helpers (all end with a trailing newline).
std::string format_tokens(const TokenSequence& tokens);
std::string format_edge_summary(const SvgGraph& graph);
std::string format_metrics_report(const Metrics& metrics);
std::string format_train_log(const std::vector<EpochLog>& log);
std::string format_prediction(const Prediction& prediction, const std::vector<std::string>& labels);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace svgdet
