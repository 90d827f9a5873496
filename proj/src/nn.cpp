#include "svgdet/nn.hpp"

#include <algorithm>
#include <cmath>

#include "svgdet/embed.hpp"
#include "svgdet/errors.hpp"
#include "svgdet/rng.hpp"

namespace svgdet {
namespace {

constexpr double kProbClamp = 1e-12;

void glorot_fill(Matrix& m, Rng& rng) {
    double s = std::sqrt(6.0 / (m.rows + m.cols));
    for (double& v : m.a) v = rng.range(-s, s);
}

// astar * H * W + b, the shared pre-activation of both convolution layers
Matrix layer_pre(const Matrix& H, const Matrix& astar, const Matrix& W, const Matrix* b) {
    Matrix out = matmul(matmul(astar, H), W);
    if (b) add_row_vector(out, *b);
    return out;
}

std::vector<double> head_logits(const std::vector<double>& pooled, const Matrix& W, const Matrix& b) {
    std::vector<double> z(W.cols, 0.0);
    for (int k = 0; k < W.cols; ++k) {
        double s = b(0, k);
        for (int j = 0; j < W.rows; ++j) s += pooled[j] * W(j, k);
        z[k] = s;
    }
    return z;
}

// dL/dlogits for focal loss on top of softmax probabilities
std::vector<double> focal_logit_grad(const std::vector<double>& p, int y, const FocalConfig& cfg) {
    double pt = std::clamp(p[y], kProbClamp, 1.0 - kProbClamp);
    double dl_dpt;
    if (cfg.gamma == 0.0) {
        dl_dpt = -cfg.alpha / pt;
    } else {
        double one_minus = 1.0 - pt;
        dl_dpt = -cfg.alpha *
                 (-cfg.gamma * std::pow(one_minus, cfg.gamma - 1.0) * std::log(pt) +
                  std::pow(one_minus, cfg.gamma) / pt);
    }
    std::vector<double> dz(p.size());
    for (size_t j = 0; j < p.size(); ++j) {
        double indicator = (static_cast<int>(j) == y) ? 1.0 : 0.0;
        dz[j] = dl_dpt * pt * (indicator - p[j]);
    }
    return dz;
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double focal_loss(const std::vector<double>& p, int y, const FocalConfig& cfg) {
    if (y < 0 || y >= static_cast<int>(p.size()))
        throw shape_mismatch("focal_loss label " + std::to_string(y) + " outside " +
                             std::to_string(p.size()) + " classes");
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        throw config_error("focal alpha must lie in [0,1]");
    if (cfg.gamma < 0.0) throw config_error("focal gamma must be non-negative");
    double sum = 0.0;
    for (double v : p) {
        if (v < -1e-9) throw invalid_distribution("negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw invalid_distribution("probabilities sum to " + std::to_string(sum));

    double pt = std::clamp(p[y], kProbClamp, 1.0 - kProbClamp);
    double modulator = cfg.gamma == 0.0 ? 1.0 : std::pow(1.0 - pt, cfg.gamma);
    return -cfg.alpha * modulator * std::log(pt);
}

Matrix gcn_layer(const Matrix& H, const Matrix& astar, const Matrix& W, bool residual) {
    Matrix out = relu(layer_pre(H, astar, W, nullptr));
    if (residual) {
        if (!out.same_shape(H))
            throw shape_mismatch("residual needs matching shapes; W must be square");
        out.add_scaled(H, 1.0);
    }
    return out;
}

ModelParams ModelParams::init(int dim, int hidden, int classes, uint64_t seed, Readout readout) {
    if (dim < 8) throw dimension_too_small("model dim must be at least 8");
    if (hidden < 1 || classes < 2) throw config_error("hidden and classes must be positive");
    ModelParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.classes = classes;
    p.readout = readout;
    p.w_in = Matrix(dim, hidden);
    p.b_in = Matrix(1, hidden);
    p.w1 = Matrix(hidden, hidden);
    p.b1 = Matrix(1, hidden);
    p.w2 = Matrix(hidden, hidden);
    p.b2 = Matrix(1, hidden);
    p.w_det = Matrix(hidden, 2);
    p.b_det = Matrix(1, 2);
    p.w_cwe = Matrix(hidden, classes);
    p.b_cwe = Matrix(1, classes);

    Rng rng(seed);
    glorot_fill(p.w_in, rng);
    glorot_fill(p.w1, rng);
    glorot_fill(p.w2, rng);
    glorot_fill(p.w_det, rng);
    glorot_fill(p.w_cwe, rng);
    return p;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
    std::vector<std::pair<std::string, Matrix*>> t = {
        {"w_in", &w_in}, {"b_in", &b_in}, {"w1", &w1},       {"b1", &b1},
        {"w2", &w2},     {"b2", &b2},     {"w_det", &w_det}, {"b_det", &b_det},
        {"w_cwe", &w_cwe}, {"b_cwe", &b_cwe}};
    if (has_lookup) t.emplace_back("lookup", &lookup);
    return t;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
    std::vector<std::pair<std::string, const Matrix*>> t = {
        {"w_in", &w_in}, {"b_in", &b_in}, {"w1", &w1},       {"b1", &b1},
        {"w2", &w2},     {"b2", &b2},     {"w_det", &w_det}, {"b_det", &b_det},
        {"w_cwe", &w_cwe}, {"b_cwe", &b_cwe}};
    if (has_lookup) t.emplace_back("lookup", &lookup);
    return t;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z = params;
    for (auto& [name, tensor] : z.tensors()) tensor->fill(0.0);
    return z;
}

ForwardTrace forward(const ModelParams& params, const GraphInput& input) {
    if (input.features.rows == 0) throw empty_token_list("forward on empty graph");
    if (input.features.cols != params.dim)
        throw shape_mismatch("feature dim " + std::to_string(input.features.cols) +
                             " does not match model dim " + std::to_string(params.dim));
    if (input.astar.rows != input.features.rows)
        throw shape_mismatch("adjacency and feature row counts differ");

    ForwardTrace t;
    t.E = input.features;
    if (params.has_lookup) {
        for (size_t i = 0; i < input.lookup_rows.size(); ++i) {
            int r = input.lookup_rows[i];
            if (r < 0) continue;  // unseen key keeps its static fallback row
            for (int j = 0; j < params.dim; ++j) t.E(static_cast<int>(i), j) = params.lookup(r, j);
        }
    }

    t.P0 = matmul(t.E, params.w_in);
    add_row_vector(t.P0, params.b_in);
    t.H0 = relu(t.P0);

    t.U1 = layer_pre(t.H0, input.astar, params.w1, &params.b1);
    t.H1 = relu(t.U1);
    t.H1.add_scaled(t.H0, 1.0);

    t.U2 = layer_pre(t.H1, input.astar, params.w2, &params.b2);
    t.H2 = relu(t.U2);
    t.H2.add_scaled(t.H1, 1.0);

    if (params.readout == Readout::Mean) {
        t.pooled = row_mean(t.H2);
    } else {
        t.pooled.assign(params.hidden, 0.0);
        for (int j = 0; j < params.hidden; ++j) t.pooled[j] = t.H2(0, j);
    }

    t.det_logits = head_logits(t.pooled, params.w_det, params.b_det);
    t.det_prob = softmax(t.det_logits);
    t.cwe_logits = head_logits(t.pooled, params.w_cwe, params.b_cwe);
    t.cwe_prob = softmax(t.cwe_logits);
    return t;
}

ResolvedFocal resolve_focal(const LossConfig& cfg, long n_pos, long n_neg) {
    ResolvedFocal r;
    r.gamma = cfg.focal.gamma;
    if (cfg.alpha_mode == AlphaMode::Fixed) {
        r.alpha_pos = r.alpha_neg = cfg.focal.alpha;
    } else {
        // weight each class by the other's share so the rare class counts more
        long total = n_pos + n_neg;
        if (total <= 0 || n_pos == 0 || n_neg == 0) {
            r.alpha_pos = r.alpha_neg = 1.0;
        } else {
            r.alpha_pos = static_cast<double>(n_neg) / total;
            r.alpha_neg = static_cast<double>(n_pos) / total;
        }
    }
    return r;
}

double total_loss(const ModelParams& params, const std::vector<BatchSample>& batch,
                  const ResolvedFocal& focal, double lambda) {
    double loss = 0.0;
    for (const BatchSample& s : batch) {
        ForwardTrace t = forward(params, *s.input);
        FocalConfig fc = focal.for_target(s.target);
        loss += focal_loss(t.det_prob, s.target, fc);
        if (s.has_cwe) loss += focal_loss(t.cwe_prob, s.cwe_class, fc);
    }
    double reg = 0.0;
    for (const Matrix* w : {&params.w_in, &params.w1, &params.w2, &params.w_det, &params.w_cwe})
        reg += w->frobenius_squared();
    return loss + 0.5 * lambda * reg;
}

SampleLoss sample_backward(const ModelParams& params, const GraphInput& input,
                           const ForwardTrace& t, const BatchSample& sample,
                           const ResolvedFocal& focal, ModelParams& grads) {
    FocalConfig fc = focal.for_target(sample.target);
    SampleLoss loss;
    loss.l_det = focal_loss(t.det_prob, sample.target, fc);
    std::vector<double> ddet = focal_logit_grad(t.det_prob, sample.target, fc);
    std::vector<double> dcwe(params.classes, 0.0);
    if (sample.has_cwe) {
        loss.l_cwe = focal_loss(t.cwe_prob, sample.cwe_class, fc);
        dcwe = focal_logit_grad(t.cwe_prob, sample.cwe_class, fc);
    }

    // heads
    std::vector<double> dpooled(params.hidden, 0.0);
    for (int k = 0; k < 2; ++k) {
        grads.b_det(0, k) += ddet[k];
        for (int j = 0; j < params.hidden; ++j) {
            grads.w_det(j, k) += t.pooled[j] * ddet[k];
            dpooled[j] += params.w_det(j, k) * ddet[k];
        }
    }
    if (sample.has_cwe) {
        for (int k = 0; k < params.classes; ++k) {
            grads.b_cwe(0, k) += dcwe[k];
            for (int j = 0; j < params.hidden; ++j) {
                grads.w_cwe(j, k) += t.pooled[j] * dcwe[k];
                dpooled[j] += params.w_cwe(j, k) * dcwe[k];
            }
        }
    }

    // readout
    int n = t.H2.rows;
    Matrix dH2(n, params.hidden);
    if (params.readout == Readout::Mean) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < params.hidden; ++j) dH2(i, j) = dpooled[j] / n;
    } else {
        for (int j = 0; j < params.hidden; ++j) dH2(0, j) = dpooled[j];
    }

    // layer 2: H2 = H1 + relu(U2), U2 = A* H1 W2 + b2
    Matrix dU2 = relu_backward(dH2, t.U2);
    Matrix AH1 = matmul(input.astar, t.H1);
    grads.w2.add_scaled(matmul_tn(AH1, dU2), 1.0);
    {
        std::vector<double> cs = column_sums(dU2);
        for (int j = 0; j < params.hidden; ++j) grads.b2(0, j) += cs[j];
    }
    Matrix dH1 = matmul(input.astar, matmul_nt(dU2, params.w2));  // A* is symmetric
    dH1.add_scaled(dH2, 1.0);

    // layer 1
    Matrix dU1 = relu_backward(dH1, t.U1);
    Matrix AH0 = matmul(input.astar, t.H0);
    grads.w1.add_scaled(matmul_tn(AH0, dU1), 1.0);
    {
        std::vector<double> cs = column_sums(dU1);
        for (int j = 0; j < params.hidden; ++j) grads.b1(0, j) += cs[j];
    }
    Matrix dH0 = matmul(input.astar, matmul_nt(dU1, params.w1));
    dH0.add_scaled(dH1, 1.0);

    // input projection: H0 = relu(E w_in + b_in)
    Matrix dP0 = relu_backward(dH0, t.P0);
    grads.w_in.add_scaled(matmul_tn(t.E, dP0), 1.0);
    {
        std::vector<double> cs = column_sums(dP0);
        for (int j = 0; j < params.hidden; ++j) grads.b_in(0, j) += cs[j];
    }

    if (params.has_lookup && grads.has_lookup) {
        Matrix dE = matmul_nt(dP0, params.w_in);
        for (size_t i = 0; i < input.lookup_rows.size(); ++i) {
            int r = input.lookup_rows[i];
            if (r < 0) continue;
            for (int j = 0; j < params.dim; ++j)
                grads.lookup(r, j) += dE(static_cast<int>(i), j);
        }
    }
    return loss;
}

void AdamState::init(const ModelParams& params, double lr) {
    lr_ = lr;
    t_ = 0;
    m_.clear();
    v_.clear();
    for (const auto& [name, tensor] : params.tensors()) {
        m_.emplace_back(tensor->rows, tensor->cols);
        v_.emplace_back(tensor->rows, tensor->cols);
    }
}

void AdamState::step(ModelParams& params, const ModelParams& grads) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    auto param_tensors = params.tensors();
    auto grad_tensors = grads.tensors();
    if (param_tensors.size() != grad_tensors.size() || param_tensors.size() != m_.size())
        throw shape_mismatch("optimizer state does not match parameter set");

    for (size_t i = 0; i < grad_tensors.size(); ++i)
        if (!all_finite(*grad_tensors[i].second))
            throw non_finite_gradient("non-finite gradient in tensor '" + grad_tensors[i].first + "'");

    ++t_;
    double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (size_t i = 0; i < param_tensors.size(); ++i) {
        Matrix& w = *param_tensors[i].second;
        const Matrix& g = *grad_tensors[i].second;
        Matrix& m = m_[i];
        Matrix& v = v_[i];
        for (size_t k = 0; k < w.a.size(); ++k) {
            m.a[k] = kBeta1 * m.a[k] + (1.0 - kBeta1) * g.a[k];
            v.a[k] = kBeta2 * v.a[k] + (1.0 - kBeta2) * g.a[k] * g.a[k];
            double mhat = m.a[k] / bc1;
            double vhat = v.a[k] / bc2;
            w.a[k] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
        }
    }
}

}  // namespace svgdet
