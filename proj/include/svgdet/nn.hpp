#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svgdet/config.hpp"
#include "svgdet/corpus.hpp"
#include "svgdet/graph.hpp"
#include "svgdet/matrix.hpp"
#include "svgdet/token.hpp"

namespace svgdet {

enum class Readout { Mean, Boundary };      // graph vector: row mean, or the <s> row
enum class AlphaMode { Fixed, Inverse };    // Inverse: alpha = negative fraction of the train split

struct FocalConfig {
    double alpha = 0.25;  // weight on the targeted class term
    double gamma = 2.0;   // focusing exponent; 0 with alpha 1 gives plain cross-entropy
};

std::vector<double> softmax(const std::vector<double>& logits);

// -alpha * (1 - p[y])^gamma * log(p[y]), with p[y] clamped to [1e-12, 1-1e-12].
// p must sum to 1 within 1e-6 (InvalidDistribution otherwise).
double focal_loss(const std::vector<double>& p, int y, const FocalConfig& cfg);

// One graph-convolution step: relu(astar * H * W), plus the input when
// residual is set (shapes must already agree for the sum).
Matrix gcn_layer(const Matrix& H, const Matrix& astar, const Matrix& W, bool residual);

// All trainable state.  Bias "vectors" are stored as 1 x n matrices so every
// parameter flows through the same named-tensor machinery (Adam, checkpoints,
// finite-difference checks).
struct ModelParams {
    int dim = 64, hidden = 128, classes = 41;
    Readout readout = Readout::Mean;
    Matrix w_in, b_in;    // dim x hidden projection in front of the first residual layer
    Matrix w1, b1, w2, b2;        // two graph-convolution layers
    Matrix w_det, b_det;  // hidden x 2 detection head
    Matrix w_cwe, b_cwe;  // hidden x classes description head

    // learned-lookup embedding table (provider "lookup"); rows keyed by (text, kind)
    bool has_lookup = false;
    std::vector<std::pair<std::string, TokenKind>> vocab;
    Matrix lookup;

    static ModelParams init(int dim, int hidden, int classes, uint64_t seed,
                            Readout readout = Readout::Mean);
    // fixed iteration order; lookup last when present
    std::vector<std::pair<std::string, Matrix*>> tensors();
    std::vector<std::pair<std::string, const Matrix*>> tensors() const;
};

ModelParams zeros_like(const ModelParams& params);

// One sample, ready for the network.
struct GraphInput {
    Matrix astar;     // normalized adjacency
    Matrix features;  // n x dim static features (hashed or imported rows)
    std::vector<int> lookup_rows;  // lookup mode: per-node row into params.lookup, -1 = keep static row
};

struct ForwardTrace {
    Matrix E, P0, H0, U1, H1, U2, H2;  // P0/U1/U2 are pre-activations
    std::vector<double> pooled;
    std::vector<double> det_logits, det_prob;  // 2
    std::vector<double> cwe_logits, cwe_prob;  // classes
};

ForwardTrace forward(const ModelParams& params, const GraphInput& input);

// Per-class alpha resolved once per run (Inverse mode needs split counts).
struct ResolvedFocal {
    double alpha_pos = 1.0, alpha_neg = 1.0, gamma = 0.0;
    FocalConfig for_target(int target) const {
        return {target == 1 ? alpha_pos : alpha_neg, gamma};
    }
};

struct LossConfig {
    FocalConfig focal;
    AlphaMode alpha_mode = AlphaMode::Inverse;
    double lambda = 1e-4;  // L2 coefficient over weight matrices, biases excluded
};

ResolvedFocal resolve_focal(const LossConfig& cfg, long n_pos, long n_neg);

struct BatchSample {
    const GraphInput* input = nullptr;
    int target = 0;
    int cwe_class = 0;     // index into the label registry; 0 = benign
    bool has_cwe = false;  // false: the description term is skipped
};

// Sum of focal detection and description terms over the batch plus
// lambda/2 * sum of squared Frobenius norms of the weight matrices.
double total_loss(const ModelParams& params, const std::vector<BatchSample>& batch,
                  const ResolvedFocal& focal, double lambda);

// Adds this sample's analytic gradients into `grads` (same shapes as params).
// Returns the sample's detection/description loss values.
struct SampleLoss {
    double l_det = 0.0, l_cwe = 0.0;
};
SampleLoss sample_backward(const ModelParams& params, const GraphInput& input,
                           const ForwardTrace& trace, const BatchSample& sample,
                           const ResolvedFocal& focal, ModelParams& grads);

class AdamState {
public:
    void init(const ModelParams& params, double lr);
    // applies one update; throws NonFiniteGradient naming the offending tensor
    void step(ModelParams& params, const ModelParams& grads);

private:
    double lr_ = 5e-4;
    long t_ = 0;
    std::vector<Matrix> m_, v_;
};

struct Metrics {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, f1_benign = 0;
    bool precision_defined = true, recall_defined = true, f1_defined = true,
         f1_benign_defined = true;
    double cwe_accuracy = 0;
    bool cwe_defined = false;
    std::vector<std::pair<std::string, double>> cwe_f1;  // per observed tag
};

// Detection-head rates from a confusion matrix; *_defined flags drop to false
// (value 0) whenever a denominator vanishes instead of dividing by zero.
Metrics metrics_from_counts(long tp, long fp, long tn, long fn);

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;   // 512 mirrors the reference large-scale setup
    int dim = 64;          // 768 mirrors the large-scale setup
    int hidden = 128;
    int min_classes = 41;  // description head width floor
    double lr = 5e-4;
    LossConfig loss;
    Readout readout = Readout::Mean;
    uint64_t seed = 1;
    std::string provider = "hashed";  // hashed | lookup | import
    std::string import_path;
    int threads = 1;  // per-sample gradients in parallel, summed in fixed order
    // fixed gradient-summation order: bit-identical results for any thread count
    bool det_reduction = true;
    AnalysisConfig analysis = AnalysisConfig::defaults();

    TrainConfig() { analysis.truncate_oversize = true; }  // long functions clip, not fail
};

struct PreparedSample {
    std::string id;
    int corpus_index = -1;
    GraphInput input;
    int target = 0;
    int cwe_class = 0;
    bool has_cwe = false;
};

struct EpochLog {
    int epoch = 0;
    double l_det = 0, l_cwe = 0, reg = 0;  // l_* are per-sample means over the train split
    Metrics val;
};

struct TrainResult {
    ModelParams params;
    std::vector<std::string> labels;  // class index -> tag, labels[0] == "benign"
    std::vector<EpochLog> log;
    SplitMap split;
    std::vector<std::string> skipped;  // samples that failed to lex/build, with reasons
};

TrainResult train(const Corpus& corpus, const TrainConfig& cfg);

Metrics evaluate(const ModelParams& params, const std::vector<PreparedSample>& samples,
                 const std::vector<std::string>& labels);

// Shared by train/evaluate/predict: lex, build the graph, normalize, embed.
// Samples that fail to tokenize are skipped with a reason when `skipped` is
// given; with nullptr the error propagates.
std::vector<PreparedSample> prepare_samples(const Corpus& corpus, const std::vector<int>& indices,
                                            const TrainConfig& cfg,
                                            const std::vector<std::string>& labels,
                                            const ModelParams* params_for_vocab,
                                            std::vector<std::string>* skipped);

// Builds the class registry: "benign" plus the corpus's tags (sorted), padded
// with placeholders up to min_classes.
std::vector<std::string> build_labels(const Corpus& corpus, int min_classes);

struct Prediction {
    double vulnerable_probability = 0.0;
    std::vector<double> cwe_distribution;
    int cwe_label = 0;  // argmax over the full distribution
    std::vector<TypedEdge> contributing_edges;  // the graph's poacher edges
    SvgGraph graph;     // kept so callers can format edge endpoints
};

Prediction predict(const ModelParams& params, const std::vector<std::string>& labels,
                   const std::string& source, const TrainConfig& cfg);

}  // namespace svgdet
