#include "svgdet/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "svgdet/errors.hpp"
#include "svgdet/lexer.hpp"

namespace svgdet {
namespace {

std::string fmt4(double v) {
    char b[48];
    std::snprintf(b, sizeof(b), "%.4f", v);
    return b;
}
std::string fmt6(double v) {
    char b[48];
    std::snprintf(b, sizeof(b), "%.6f", v);
    return b;
}
// doubles round-trip exactly through %.17g
std::string fmt_exact(double v) {
    char b[64];
    std::snprintf(b, sizeof(b), "%.17g", v);
    return b;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (const std::string& s : items) {
        if (!out.empty()) out += ",";
        out += s;
    }
    return out;
}

std::string join_pairs(const std::vector<std::pair<std::string, std::string>>& items) {
    std::string out;
    for (const auto& [a, b] : items) {
        if (!out.empty()) out += ",";
        out += a + ":" + b;
    }
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string get_or(const Manifest& m, const std::string& key, const std::string& fallback) {
    auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

void analysis_to_manifest(const AnalysisConfig& a, Manifest& m) {
    m["max_tokens"] = std::to_string(a.max_tokens);
    m["truncate_oversize"] = a.truncate_oversize ? "true" : "false";
    m["api_any_call"] = a.api_any_call ? "true" : "false";
    m["window"] = std::to_string(a.window);
    m["unsafe_apis"] = join_list(a.unsafe_apis);
    m["execution_apis"] = join_list(a.execution_apis);
    m["free_apis"] = join_list(a.free_apis);
    m["resource_pairs"] = join_pairs(a.resource_pairs);
    m["keywords"] = join_list({a.keywords.begin(), a.keywords.end()});
    m["conditional_keywords"] = join_list({a.conditional_keywords.begin(), a.conditional_keywords.end()});
}

AnalysisConfig analysis_from_manifest(const Manifest& m) {
    AnalysisConfig a = AnalysisConfig::defaults();
    a.max_tokens = std::stoi(get_or(m, "max_tokens", std::to_string(a.max_tokens)));
    a.truncate_oversize = get_or(m, "truncate_oversize", "false") == "true";
    a.api_any_call = get_or(m, "api_any_call", "false") == "true";
    a.window = std::stoi(get_or(m, "window", std::to_string(a.window)));
    if (m.count("unsafe_apis")) a.unsafe_apis = split_list(m.at("unsafe_apis"));
    if (m.count("execution_apis")) a.execution_apis = split_list(m.at("execution_apis"));
    if (m.count("free_apis")) a.free_apis = split_list(m.at("free_apis"));
    if (m.count("resource_pairs")) {
        a.resource_pairs.clear();
        for (const std::string& item : split_list(m.at("resource_pairs"))) {
            size_t colon = item.find(':');
            if (colon == std::string::npos)
                throw format_error("manifest resource_pairs entry '" + item + "' is not a:b");
            a.resource_pairs.emplace_back(item.substr(0, colon), item.substr(colon + 1));
        }
    }
    if (m.count("keywords")) {
        auto items = split_list(m.at("keywords"));
        a.keywords = {items.begin(), items.end()};
    }
    if (m.count("conditional_keywords")) {
        auto items = split_list(m.at("conditional_keywords"));
        a.conditional_keywords = {items.begin(), items.end()};
    }
    return a;
}

std::string escape_tsv(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\t') out += "\\t";
        else if (c == '\n') out += "\\n";
        else out += c;
    }
    return out;
}

TrainConfig inference_config(const Checkpoint& ck, const AnalysisConfig* analysis,
                             const std::string& import_path) {
    TrainConfig cfg;  // constructor turns truncation on, the training default
    cfg.dim = ck.params.dim;
    cfg.hidden = ck.params.hidden;
    cfg.min_classes = ck.params.classes;
    cfg.seed = ck.seed;
    cfg.provider = ck.provider;
    cfg.import_path = import_path;
    cfg.readout = ck.params.readout;
    if (analysis) cfg.analysis = *analysis;
    return cfg;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw file_unreadable("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_tokens(const TokenSequence& tokens) {
    std::string out = "index\tkind\ttext\tline\tcol\n";
    for (const Token& t : tokens) {
        out += std::to_string(t.index) + "\t" + kind_name(t.kind) + "\t" + escape_tsv(t.text) +
               "\t" + std::to_string(t.line) + "\t" + std::to_string(t.col) + "\n";
    }
    return out;
}

std::string format_edge_summary(const SvgGraph& graph) {
    auto counts = graph.edge_counts();
    static const EdgeKind kAll[] = {
        EdgeKind::SequentialFlow,       EdgeKind::DataFlow,
        EdgeKind::ControlFlow,          EdgeKind::PoacherDataProcessing,
        EdgeKind::PoacherAccessControl, EdgeKind::PoacherResourceManagement};
    std::string out = "nodes\t" + std::to_string(graph.node_count()) + "\n";
    int total = 0;
    for (EdgeKind k : kAll) {
        int c = counts.count(k) ? counts.at(k) : 0;
        total += c;
        out += std::string(edge_kind_name(k)) + "\t" + std::to_string(c) + "\n";
    }
    out += "total\t" + std::to_string(total) + "\n";
    for (const std::string& d : graph.diagnostics) out += "diagnostic\t" + escape_tsv(d) + "\n";
    return out;
}

std::string format_metrics_report(const Metrics& m) {
    auto row = [](const std::string& name, double value, bool defined) {
        return name + "\t" + fmt4(value) + (defined ? "" : "\tundefined") + "\n";
    };
    std::string out;
    out += row("accuracy", m.accuracy, true);
    out += row("precision", m.precision, m.precision_defined);
    out += row("recall", m.recall, m.recall_defined);
    out += row("f1", m.f1, m.f1_defined);
    out += row("f1_benign", m.f1_benign, m.f1_benign_defined);
    out += "tp\t" + std::to_string(m.tp) + "\n";
    out += "fp\t" + std::to_string(m.fp) + "\n";
    out += "fn\t" + std::to_string(m.fn) + "\n";
    out += "tn\t" + std::to_string(m.tn) + "\n";
    out += row("cwe_accuracy", m.cwe_accuracy, m.cwe_defined);
    for (const auto& [tag, f1] : m.cwe_f1) out += "cwe_f1:" + tag + "\t" + fmt4(f1) + "\n";
    return out;
}

std::string format_train_log(const std::vector<EpochLog>& log) {
    std::string out =
        "epoch\tl_det\tl_cwe\treg\tval_accuracy\tval_precision\tval_recall\tval_f1\n";
    for (const EpochLog& e : log) {
        out += std::to_string(e.epoch) + "\t" + fmt6(e.l_det) + "\t" + fmt6(e.l_cwe) + "\t" +
               fmt6(e.reg) + "\t" + fmt4(e.val.accuracy) + "\t" + fmt4(e.val.precision) + "\t" +
               fmt4(e.val.recall) + "\t" + fmt4(e.val.f1) + "\n";
    }
    return out;
}

std::string format_prediction(const Prediction& p, const std::vector<std::string>& labels) {
    std::string out;
    if (p.vulnerable_probability >= 0.5) {
        // name the most likely non-benign category
        int best = 1;
        for (size_t k = 2; k < p.cwe_distribution.size(); ++k)
            if (p.cwe_distribution[k] > p.cwe_distribution[best]) best = static_cast<int>(k);
        std::string tag = best < static_cast<int>(labels.size()) ? labels[best] : "unknown";
        out += "VULNERABLE " + tag + " p=" + fmt4(p.vulnerable_probability) + "\n";
    } else {
        out += "BENIGN p=" + fmt4(p.vulnerable_probability) + "\n";
    }
    out += "contributing_edges\t" + std::to_string(p.contributing_edges.size()) + "\n";
    for (const TypedEdge& e : p.contributing_edges) {
        const Token& s = p.graph.nodes[e.src];
        const Token& d = p.graph.nodes[e.dst];
        out += std::string(edge_kind_name(e.kind)) + "\t" + escape_tsv(s.text) + "@" +
               std::to_string(s.line) + ":" + std::to_string(s.col) + "\t" + escape_tsv(d.text) +
               "@" + std::to_string(d.line) + ":" + std::to_string(d.col) + "\n";
    }
    return out;
}

std::string run_tokenize(const TokenizeOptions& opt) {
    AnalysisConfig analysis =
        opt.config_path.empty() ? opt.analysis : load_config(opt.config_path);
    LexResult lex = tokenize(read_text_file(opt.source_path), analysis);
    std::string out = format_tokens(lex.tokens);
    for (const std::string& w : lex.warnings) out += "warning\t" + escape_tsv(w) + "\n";
    return out;
}

std::string run_graph(const GraphOptions& opt) {
    AnalysisConfig analysis =
        opt.config_path.empty() ? opt.analysis : load_config(opt.config_path);
    LexResult lex = tokenize(read_text_file(opt.source_path), analysis);
    SvgGraph graph = assemble_svg(lex.tokens, analysis);

    write_text_file(opt.out_prefix + ".dot", to_dot(graph));
    write_text_file(opt.out_prefix + ".json", to_json(graph));

    Manifest m;
    m["command"] = "graph";
    m["format_version"] = "1";
    m["source"] = opt.source_path;
    m["out_prefix"] = opt.out_prefix;
    m["config_source"] = opt.config_path;
    analysis_to_manifest(analysis, m);
    write_manifest(opt.manifest_path.empty() ? opt.out_prefix + ".manifest" : opt.manifest_path, m);

    return format_edge_summary(graph);
}

TrainResult run_train(const TrainOptions& opt) {
    TrainOptions o = opt;
    if (o.log_path.empty()) o.log_path = o.checkpoint_path + ".log.tsv";
    if (o.manifest_path.empty()) o.manifest_path = o.checkpoint_path + ".manifest";

    Corpus corpus = load_jsonl(o.corpus_path);
    TrainResult result = train(corpus, o.cfg);

    save_checkpoint(o.checkpoint_path, result.params, o.cfg.seed, o.cfg.provider, result.labels);
    std::string log = format_train_log(result.log);
    for (const std::string& s : result.skipped) log += "skipped\t" + escape_tsv(s) + "\n";
    write_text_file(o.log_path, log);

    Manifest m;
    m["command"] = "train";
    m["format_version"] = "1";
    m["corpus"] = o.corpus_path;
    m["checkpoint"] = o.checkpoint_path;
    m["log"] = o.log_path;
    m["config_source"] = o.config_path;
    m["seed"] = std::to_string(o.cfg.seed);
    m["dim"] = std::to_string(o.cfg.dim);
    m["hidden"] = std::to_string(o.cfg.hidden);
    m["min_classes"] = std::to_string(o.cfg.min_classes);
    m["epochs"] = std::to_string(o.cfg.epochs);
    m["batch_size"] = std::to_string(o.cfg.batch_size);
    m["lr"] = fmt_exact(o.cfg.lr);
    m["lambda"] = fmt_exact(o.cfg.loss.lambda);
    m["alpha"] = fmt_exact(o.cfg.loss.focal.alpha);
    m["gamma"] = fmt_exact(o.cfg.loss.focal.gamma);
    m["alpha_mode"] = o.cfg.loss.alpha_mode == AlphaMode::Fixed ? "fixed" : "inverse";
    m["readout"] = o.cfg.readout == Readout::Boundary ? "boundary" : "mean";
    m["provider"] = o.cfg.provider;
    m["import_path"] = o.cfg.import_path;
    m["threads"] = std::to_string(o.cfg.threads);
    m["det_reduction"] = o.cfg.det_reduction ? "true" : "false";
    analysis_to_manifest(o.cfg.analysis, m);
    write_manifest(o.manifest_path, m);
    return result;
}

TrainOptions train_options_from_manifest(const Manifest& m) {
    if (get_or(m, "command", "") != "train")
        throw config_error("manifest does not describe a train run");
    TrainOptions o;
    o.corpus_path = get_or(m, "corpus", "");
    o.checkpoint_path = get_or(m, "checkpoint", "");
    o.log_path = get_or(m, "log", "");
    o.config_path = get_or(m, "config_source", "");
    o.cfg.seed = std::stoull(get_or(m, "seed", "1"));
    o.cfg.dim = std::stoi(get_or(m, "dim", "64"));
    o.cfg.hidden = std::stoi(get_or(m, "hidden", "128"));
    o.cfg.min_classes = std::stoi(get_or(m, "min_classes", "41"));
    o.cfg.epochs = std::stoi(get_or(m, "epochs", "100"));
    o.cfg.batch_size = std::stoi(get_or(m, "batch_size", "32"));
    o.cfg.lr = std::stod(get_or(m, "lr", "0.0005"));
    o.cfg.loss.lambda = std::stod(get_or(m, "lambda", "0.0001"));
    o.cfg.loss.focal.alpha = std::stod(get_or(m, "alpha", "0.25"));
    o.cfg.loss.focal.gamma = std::stod(get_or(m, "gamma", "2"));
    o.cfg.loss.alpha_mode =
        get_or(m, "alpha_mode", "inverse") == "fixed" ? AlphaMode::Fixed : AlphaMode::Inverse;
    o.cfg.readout = get_or(m, "readout", "mean") == "boundary" ? Readout::Boundary : Readout::Mean;
    o.cfg.provider = get_or(m, "provider", "hashed");
    o.cfg.import_path = get_or(m, "import_path", "");
    o.cfg.threads = std::stoi(get_or(m, "threads", "1"));
    o.cfg.det_reduction = get_or(m, "det_reduction", "true") == "true";
    o.cfg.analysis = analysis_from_manifest(m);
    return o;
}

Metrics run_eval(const EvalOptions& opt) {
    EvalOptions o = opt;
    if (o.manifest_path.empty()) o.manifest_path = o.report_path + ".manifest";
    if (!o.config_path.empty()) {
        o.analysis = load_config(o.config_path);
        o.analysis_set = true;
    }

    Checkpoint ck = load_checkpoint(o.checkpoint_path);
    Corpus corpus = load_jsonl(o.corpus_path);
    TrainConfig cfg = inference_config(ck, o.analysis_set ? &o.analysis : nullptr, o.import_path);

    std::vector<int> indices;
    if (o.split == "all") {
        for (size_t i = 0; i < corpus.samples.size(); ++i) indices.push_back(static_cast<int>(i));
    } else {
        SplitMap split = split_corpus(corpus, ck.seed);
        Split want = o.split == "train" ? Split::Train : o.split == "val" ? Split::Val : Split::Test;
        if (o.split != "train" && o.split != "val" && o.split != "test")
            throw config_error("unknown split '" + o.split + "'");
        indices = split.indices(want);
    }

    std::vector<std::string> skipped;
    std::vector<PreparedSample> prepared =
        prepare_samples(corpus, indices, cfg, ck.labels, &ck.params, &skipped);
    Metrics metrics = evaluate(ck.params, prepared, ck.labels);

    std::string report = format_metrics_report(metrics);
    report += "samples\t" + std::to_string(prepared.size()) + "\n";
    report += "skipped\t" + std::to_string(skipped.size()) + "\n";
    write_text_file(o.report_path, report);

    Manifest m;
    m["command"] = "eval";
    m["format_version"] = "1";
    m["corpus"] = o.corpus_path;
    m["checkpoint"] = o.checkpoint_path;
    m["report"] = o.report_path;
    m["config_source"] = o.config_path;
    m["split"] = o.split;
    m["import_path"] = o.import_path;
    analysis_to_manifest(cfg.analysis, m);
    write_manifest(o.manifest_path, m);
    return metrics;
}

EvalOptions eval_options_from_manifest(const Manifest& m) {
    if (get_or(m, "command", "") != "eval")
        throw config_error("manifest does not describe an eval run");
    EvalOptions o;
    o.corpus_path = get_or(m, "corpus", "");
    o.checkpoint_path = get_or(m, "checkpoint", "");
    o.report_path = get_or(m, "report", "");
    o.split = get_or(m, "split", "test");
    o.import_path = get_or(m, "import_path", "");
    o.analysis = analysis_from_manifest(m);
    o.analysis_set = true;
    return o;
}

std::string run_predict(const PredictOptions& opt) {
    Checkpoint ck = load_checkpoint(opt.checkpoint_path);
    AnalysisConfig analysis = opt.analysis;
    bool analysis_set = opt.analysis_set;
    if (!opt.config_path.empty()) {
        analysis = load_config(opt.config_path);
        analysis_set = true;
    }
    TrainConfig cfg = inference_config(ck, analysis_set ? &analysis : nullptr, opt.import_path);
    Prediction p = predict(ck.params, ck.labels, read_text_file(opt.source_path), cfg);
    return format_prediction(p, ck.labels);
}

void run_synth(const SynthOptions& opt) {
    Corpus corpus = synth_imbalanced(opt.n, opt.ratio, opt.seed);
    save_jsonl(corpus, opt.out_path);

    Manifest m;
    m["command"] = "synth";
    m["format_version"] = "1";
    m["n"] = std::to_string(opt.n);
    m["ratio"] = fmt_exact(opt.ratio);
    m["seed"] = std::to_string(opt.seed);
    m["out"] = opt.out_path;
    write_manifest(opt.manifest_path.empty() ? opt.out_path + ".manifest" : opt.manifest_path, m);
}

std::string run_export(const ExportOptions& opt) {
    Corpus corpus = load_jsonl(opt.corpus_path);
    std::string stats = corpus_stats(corpus);
    if (!opt.stats_path.empty()) write_text_file(opt.stats_path, stats);
    if (!opt.rejects_path.empty()) save_rejects(corpus, opt.rejects_path);

    if (!opt.stats_path.empty()) {
        Manifest m;
        m["command"] = "export";
        m["format_version"] = "1";
        m["corpus"] = opt.corpus_path;
        m["stats"] = opt.stats_path;
        m["rejects"] = opt.rejects_path;
        write_manifest(opt.manifest_path.empty() ? opt.stats_path + ".manifest" : opt.manifest_path,
                       m);
    }
    return stats;
}

}  // namespace svgdet
