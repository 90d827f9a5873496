#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "svgdet/embed.hpp"
#include "svgdet/errors.hpp"
#include "svgdet/lexer.hpp"
#include "svgdet/nn.hpp"
#include "svgdet/rng.hpp"

namespace svgdet {
namespace {

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::unique_ptr<EmbeddingProvider> make_provider(const TrainConfig& cfg) {
    if (cfg.provider == "import") return std::make_unique<ImportProvider>(cfg.import_path, cfg.seed);
    // "lookup" uses hashed rows as static fallbacks; trainable rows are gathered in forward()
    return std::make_unique<HashedProvider>(cfg.dim, cfg.seed);
}

int label_index(const std::vector<std::string>& labels, const std::string& tag) {
    auto it = std::find(labels.begin(), labels.end(), tag);
    return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

struct BatchResult {
    ModelParams grads;
    double l_det = 0, l_cwe = 0;
};

// Per-sample gradients, optionally in parallel.  Each chunk owns its own
// accumulator; partials merge in chunk order.  With det_reduction the chunk
// layout is fixed by the batch alone, so the summation order — and hence the
// bits — cannot depend on the worker count; without it chunks follow the
// thread count (stable for a fixed count, a little less allocation).
BatchResult batch_gradients(const ModelParams& params,
                            const std::vector<const PreparedSample*>& batch,
                            const ResolvedFocal& focal, int threads, bool det_reduction) {
    int n = static_cast<int>(batch.size());
    int t = std::max(1, std::min(threads, n));
    int chunk = det_reduction ? 8 : (n + t - 1) / t;
    int n_chunks = (n + chunk - 1) / chunk;

    std::vector<BatchResult> partial;
    partial.reserve(n_chunks);
    for (int i = 0; i < n_chunks; ++i) partial.push_back({zeros_like(params), 0, 0});

    std::atomic<int> next{0};
    auto work = [&] {
        for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
            BatchResult& acc = partial[c];
            int hi = std::min(n, (c + 1) * chunk);
            for (int i = c * chunk; i < hi; ++i) {
                const PreparedSample& s = *batch[i];
                BatchSample bs{&s.input, s.target, s.cwe_class, s.has_cwe};
                ForwardTrace trace = forward(params, s.input);
                SampleLoss loss = sample_backward(params, s.input, trace, bs, focal, acc.grads);
                acc.l_det += loss.l_det;
                acc.l_cwe += loss.l_cwe;
            }
        }
    };

    if (t == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < t; ++i) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    BatchResult out = std::move(partial[0]);
    for (int i = 1; i < n_chunks; ++i) {
        auto dst = out.grads.tensors();
        auto src = partial[i].grads.tensors();
        for (size_t k = 0; k < dst.size(); ++k) dst[k].second->add_scaled(*src[k].second, 1.0);
        out.l_det += partial[i].l_det;
        out.l_cwe += partial[i].l_cwe;
    }
    return out;
}

}  // namespace

std::vector<std::string> build_labels(const Corpus& corpus, int min_classes) {
    std::vector<std::string> tags = corpus.cwe_tags();
    std::sort(tags.begin(), tags.end());
    std::vector<std::string> labels;
    labels.reserve(std::max<size_t>(tags.size() + 1, min_classes));
    labels.push_back("benign");
    labels.insert(labels.end(), tags.begin(), tags.end());
    while (static_cast<int>(labels.size()) < min_classes)
        labels.push_back("unused-" + std::to_string(labels.size()));
    return labels;
}

std::vector<PreparedSample> prepare_samples(const Corpus& corpus, const std::vector<int>& indices,
                                            const TrainConfig& cfg,
                                            const std::vector<std::string>& labels,
                                            const ModelParams* params_for_vocab,
                                            std::vector<std::string>* skipped) {
    std::unique_ptr<EmbeddingProvider> provider = make_provider(cfg);

    std::unordered_map<uint64_t, int> vocab_index;
    if (params_for_vocab && params_for_vocab->has_lookup) {
        for (size_t r = 0; r < params_for_vocab->vocab.size(); ++r) {
            const auto& [text, kind] = params_for_vocab->vocab[r];
            vocab_index[embed_key(text, kind)] = static_cast<int>(r);
        }
    }

    std::vector<PreparedSample> out;
    out.reserve(indices.size());
    for (int idx : indices) {
        const LabeledSample& sample = corpus.samples[idx];
        try {
            LexResult lex = tokenize(sample.func, cfg.analysis);
            SvgGraph graph = assemble_svg(lex.tokens, cfg.analysis);

            PreparedSample p;
            p.id = sample.id;
            p.corpus_index = idx;
            p.target = sample.target;
            p.input.astar = normalize_adjacency(graph.dense_adjacency());
            p.input.features = provider->embed(lex.tokens);
            if (!vocab_index.empty()) {
                p.input.lookup_rows.assign(lex.tokens.size(), -1);
                for (size_t i = 0; i < lex.tokens.size(); ++i) {
                    auto it = vocab_index.find(embed_key(lex.tokens[i].text, lex.tokens[i].kind));
                    if (it != vocab_index.end()) p.input.lookup_rows[i] = it->second;
                }
            }
            if (sample.target == 0) {
                p.cwe_class = 0;
                p.has_cwe = true;  // benign contributes through the benign class
            } else if (sample.cwe) {
                int cls = label_index(labels, *sample.cwe);
                p.has_cwe = cls >= 0;
                p.cwe_class = std::max(cls, 0);
            }
            out.push_back(std::move(p));
        } catch (const Error& e) {
            if (!skipped) throw;
            skipped->push_back(sample.id + ": " + e.what());
        }
    }
    return out;
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg) {
    TrainResult result;
    result.labels = build_labels(corpus, cfg.min_classes);
    result.split = split_corpus(corpus, cfg.seed);

    int classes = static_cast<int>(result.labels.size());
    result.params = ModelParams::init(cfg.dim, cfg.hidden, classes, cfg.seed, cfg.readout);

    if (cfg.provider == "lookup") {
        // vocabulary in first-seen order over the whole corpus, rows seeded
        // exactly like the hashed provider so training starts from its values
        ModelParams& p = result.params;
        p.has_lookup = true;
        std::unordered_map<uint64_t, int> seen;
        std::vector<std::vector<double>> rows;
        for (const LabeledSample& s : corpus.samples) {
            LexResult lex;
            try {
                lex = tokenize(s.func, cfg.analysis);
            } catch (const Error&) {
                continue;  // unlexable samples are reported by prepare_samples
            }
            for (const Token& t : lex.tokens) {
                uint64_t key = embed_key(t.text, t.kind);
                if (seen.emplace(key, static_cast<int>(p.vocab.size())).second) {
                    p.vocab.emplace_back(t.text, t.kind);
                    rows.push_back(hashed_row(t.text, t.kind, cfg.dim, cfg.seed));
                }
            }
        }
        p.lookup = Matrix(static_cast<int>(rows.size()), cfg.dim);
        for (size_t r = 0; r < rows.size(); ++r)
            for (int j = 0; j < cfg.dim; ++j) p.lookup(static_cast<int>(r), j) = rows[r][j];
    }

    std::vector<int> all_indices(corpus.samples.size());
    for (size_t i = 0; i < all_indices.size(); ++i) all_indices[i] = static_cast<int>(i);
    std::vector<PreparedSample> prepared =
        prepare_samples(corpus, all_indices, cfg, result.labels, &result.params, &result.skipped);

    std::vector<const PreparedSample*> train_set, val_set;
    long n_pos = 0, n_neg = 0;
    for (const PreparedSample& p : prepared) {
        switch (result.split.assignment[p.corpus_index]) {
            case Split::Train:
                train_set.push_back(&p);
                (p.target == 1 ? n_pos : n_neg)++;
                break;
            case Split::Val:
                val_set.push_back(&p);
                break;
            case Split::Test:
                break;
        }
    }
    if (train_set.empty()) throw too_few_samples("training split is empty");

    ResolvedFocal focal = resolve_focal(cfg.loss, n_pos, n_neg);
    AdamState adam;
    adam.init(result.params, cfg.lr);
    Rng shuffle_rng(cfg.seed ^ 0x5eedf00dull);

    std::vector<PreparedSample> val_samples;  // evaluate() takes values, keep copies once
    for (const PreparedSample* p : val_set) val_samples.push_back(*p);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train_set);
        double sum_det = 0, sum_cwe = 0;
        for (size_t start = 0; start < train_set.size(); start += cfg.batch_size) {
            size_t stop = std::min(train_set.size(), start + cfg.batch_size);
            std::vector<const PreparedSample*> batch(train_set.begin() + start,
                                                     train_set.begin() + stop);
            BatchResult br =
                batch_gradients(result.params, batch, focal, cfg.threads, cfg.det_reduction);
            // regularizer gradient: lambda * W on weight matrices, biases untouched
            br.grads.w_in.add_scaled(result.params.w_in, cfg.loss.lambda);
            br.grads.w1.add_scaled(result.params.w1, cfg.loss.lambda);
            br.grads.w2.add_scaled(result.params.w2, cfg.loss.lambda);
            br.grads.w_det.add_scaled(result.params.w_det, cfg.loss.lambda);
            br.grads.w_cwe.add_scaled(result.params.w_cwe, cfg.loss.lambda);
            adam.step(result.params, br.grads);
            sum_det += br.l_det;
            sum_cwe += br.l_cwe;
        }

        EpochLog log;
        log.epoch = epoch;
        log.l_det = sum_det / train_set.size();
        log.l_cwe = sum_cwe / train_set.size();
        double reg = 0.0;
        for (const Matrix* w : {&result.params.w_in, &result.params.w1, &result.params.w2,
                                &result.params.w_det, &result.params.w_cwe})
            reg += w->frobenius_squared();
        log.reg = 0.5 * cfg.loss.lambda * reg;
        log.val = evaluate(result.params, val_samples, result.labels);
        result.log.push_back(log);
    }
    return result;
}

Metrics metrics_from_counts(long tp, long fp, long tn, long fn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    long total = tp + fp + tn + fn;
    m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    m.precision_defined = (tp + fp) > 0;
    m.precision = m.precision_defined ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall_defined = (tp + fn) > 0;
    m.recall = m.recall_defined ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1_defined = m.precision_defined && m.recall_defined && (m.precision + m.recall) > 0;
    m.f1 = m.f1_defined ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;

    // benign treated as the positive class
    double pb_den = static_cast<double>(tn + fn), rb_den = static_cast<double>(tn + fp);
    m.f1_benign_defined = pb_den > 0 && rb_den > 0;
    if (m.f1_benign_defined) {
        double pb = tn / pb_den, rb = tn / rb_den;
        m.f1_benign_defined = (pb + rb) > 0;
        m.f1_benign = m.f1_benign_defined ? 2.0 * pb * rb / (pb + rb) : 0.0;
    }
    return m;
}

Metrics evaluate(const ModelParams& params, const std::vector<PreparedSample>& samples,
                 const std::vector<std::string>& labels) {
    Metrics m;
    int classes = static_cast<int>(labels.size());
    std::vector<long> cwe_tp(classes, 0), cwe_fp(classes, 0), cwe_fn(classes, 0);
    long cwe_total = 0, cwe_correct = 0;
    std::vector<bool> cwe_seen(classes, false);

    for (const PreparedSample& s : samples) {
        ForwardTrace t = forward(params, s.input);
        int pred = argmax(t.det_prob);
        if (s.target == 1 && pred == 1) m.tp++;
        else if (s.target == 1 && pred == 0) m.fn++;
        else if (s.target == 0 && pred == 1) m.fp++;
        else m.tn++;

        if (s.has_cwe) {
            int cpred = argmax(t.cwe_prob);
            cwe_total++;
            cwe_seen[s.cwe_class] = true;
            if (cpred == s.cwe_class) {
                cwe_correct++;
                cwe_tp[s.cwe_class]++;
            } else {
                cwe_fn[s.cwe_class]++;
                if (cpred < classes) cwe_fp[cpred]++;
            }
        }
    }

    Metrics rates = metrics_from_counts(m.tp, m.fp, m.tn, m.fn);
    m.accuracy = rates.accuracy;
    m.precision = rates.precision;
    m.precision_defined = rates.precision_defined;
    m.recall = rates.recall;
    m.recall_defined = rates.recall_defined;
    m.f1 = rates.f1;
    m.f1_defined = rates.f1_defined;
    m.f1_benign = rates.f1_benign;
    m.f1_benign_defined = rates.f1_benign_defined;

    m.cwe_defined = cwe_total > 0;
    m.cwe_accuracy = m.cwe_defined ? static_cast<double>(cwe_correct) / cwe_total : 0.0;
    for (int c = 0; c < classes; ++c) {
        if (!cwe_seen[c]) continue;
        double p_den = cwe_tp[c] + cwe_fp[c], r_den = cwe_tp[c] + cwe_fn[c];
        double f1 = 0.0;
        if (p_den > 0 && r_den > 0) {
            double p = cwe_tp[c] / p_den, r = cwe_tp[c] / r_den;
            if (p + r > 0) f1 = 2.0 * p * r / (p + r);
        }
        m.cwe_f1.emplace_back(labels[c], f1);
    }
    return m;
}

Prediction predict(const ModelParams& params, const std::vector<std::string>& labels,
                   const std::string& source, const TrainConfig& cfg) {
    LexResult lex = tokenize(source, cfg.analysis);
    SvgGraph graph = assemble_svg(lex.tokens, cfg.analysis);

    GraphInput input;
    input.astar = normalize_adjacency(graph.dense_adjacency());
    input.features = make_provider(cfg)->embed(lex.tokens);
    if (params.has_lookup) {
        std::unordered_map<uint64_t, int> vocab_index;
        for (size_t r = 0; r < params.vocab.size(); ++r)
            vocab_index[embed_key(params.vocab[r].first, params.vocab[r].second)] =
                static_cast<int>(r);
        input.lookup_rows.assign(lex.tokens.size(), -1);
        for (size_t i = 0; i < lex.tokens.size(); ++i) {
            auto it = vocab_index.find(embed_key(lex.tokens[i].text, lex.tokens[i].kind));
            if (it != vocab_index.end()) input.lookup_rows[i] = it->second;
        }
    }

    ForwardTrace t = forward(params, input);
    Prediction pred;
    pred.vulnerable_probability = t.det_prob[1];
    pred.cwe_distribution = t.cwe_prob;
    pred.cwe_label = argmax(t.cwe_prob);
    for (const TypedEdge& e : graph.edges)
        if (is_poacher(e.kind)) pred.contributing_edges.push_back(e);
    pred.graph = std::move(graph);
    (void)labels;
    return pred;
}

}  // namespace svgdet
