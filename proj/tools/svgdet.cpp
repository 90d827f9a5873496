#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "svgdet/errors.hpp"
#include "svgdet/runner.hpp"

namespace {

using namespace svgdet;

// Shared lexer/graph knobs.  Returns the option handles so commands that care
// can tell "user set this" apart from "default" (eval/predict must not clobber
// the analysis settings baked into a replayed run unless asked).
struct AnalysisFlags {
    CLI::Option* max_tokens = nullptr;
    CLI::Option* truncate = nullptr;
    CLI::Option* any_call = nullptr;
    CLI::Option* window = nullptr;

    bool any_set() const {
        return max_tokens->count() || truncate->count() || any_call->count() || window->count();
    }
};

AnalysisFlags add_analysis_flags(CLI::App* cmd, AnalysisConfig& a) {
    AnalysisFlags f;
    f.max_tokens = cmd->add_option("--max-tokens", a.max_tokens, "token cap, boundary markers included");
    f.truncate = cmd->add_flag("--truncate", a.truncate_oversize, "clip oversize input instead of failing");
    f.any_call = cmd->add_flag("--api-any-call", a.api_any_call, "treat every identifier at a call site as an API call");
    f.window = cmd->add_option("--window", a.window, "sequential-flow link distance");
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"token-graph vulnerability detector"};
    app.require_subcommand(1);

    // ---- tokenize ----
    auto* tok = app.add_subcommand("tokenize", "lex a function into a token table");
    TokenizeOptions tok_opt;
    tok->add_option("source", tok_opt.source_path, "C/C++ source file")->required();
    tok->add_option("--config", tok_opt.config_path, "analysis config file");
    add_analysis_flags(tok, tok_opt.analysis);
    tok->callback([&] { std::cout << run_tokenize(tok_opt); });

    // ---- graph ----
    auto* gr = app.add_subcommand("graph", "build the semantic graph, write .dot/.json");
    GraphOptions gr_opt;
    gr->add_option("source", gr_opt.source_path, "C/C++ source file")->required();
    gr->add_option("--out", gr_opt.out_prefix, "output prefix")->required();
    gr->add_option("--config", gr_opt.config_path, "analysis config file");
    gr->add_option("--manifest", gr_opt.manifest_path, "manifest path (default <out>.manifest)");
    add_analysis_flags(gr, gr_opt.analysis);
    gr->callback([&] { std::cout << run_graph(gr_opt); });

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train a detector on a JSONL corpus");
    TrainOptions tr_opt;
    std::string tr_manifest_in, alpha_mode = "inverse", readout = "mean";
    tr->add_option("--corpus", tr_opt.corpus_path, "JSONL corpus");
    tr->add_option("--checkpoint", tr_opt.checkpoint_path, "checkpoint output path");
    tr->add_option("--log", tr_opt.log_path, "epoch log path (default <checkpoint>.log.tsv)");
    tr->add_option("--manifest", tr_opt.manifest_path, "manifest path (default <checkpoint>.manifest)");
    tr->add_option("--config", tr_opt.config_path, "analysis config file");
    tr->add_option("--from-manifest", tr_manifest_in, "replay a previous run's manifest");
    tr->add_option("--epochs", tr_opt.cfg.epochs, "training epochs");
    tr->add_option("--batch-size", tr_opt.cfg.batch_size, "samples per update");
    tr->add_option("--dim", tr_opt.cfg.dim, "embedding width");
    tr->add_option("--hidden", tr_opt.cfg.hidden, "hidden width");
    tr->add_option("--min-classes", tr_opt.cfg.min_classes, "description-head width floor");
    tr->add_option("--lr", tr_opt.cfg.lr, "learning rate");
    tr->add_option("--lambda", tr_opt.cfg.loss.lambda, "L2 coefficient");
    tr->add_option("--alpha", tr_opt.cfg.loss.focal.alpha, "focal alpha (fixed mode)");
    tr->add_option("--gamma", tr_opt.cfg.loss.focal.gamma, "focal gamma");
    tr->add_option("--alpha-mode", alpha_mode, "fixed | inverse")
        ->check(CLI::IsMember({"fixed", "inverse"}));
    tr->add_option("--readout", readout, "mean | boundary")->check(CLI::IsMember({"mean", "boundary"}));
    tr->add_option("--provider", tr_opt.cfg.provider, "hashed | lookup | import")
        ->check(CLI::IsMember({"hashed", "lookup", "import"}));
    tr->add_option("--import", tr_opt.cfg.import_path, "embedding table for provider=import");
    tr->add_option("--threads", tr_opt.cfg.threads, "gradient worker threads");
    tr->add_flag("--det-reduction,!--no-det-reduction", tr_opt.cfg.det_reduction,
                 "fixed gradient-summation order independent of --threads (default on)");
    tr->add_option("--seed", tr_opt.cfg.seed, "run seed");
    AnalysisFlags tr_flags = add_analysis_flags(tr, tr_opt.cfg.analysis);
    tr->callback([&] {
        if (!tr_manifest_in.empty()) {
            TrainOptions replay = train_options_from_manifest(read_manifest(tr_manifest_in));
            // command-line paths override so a replay can redirect its outputs
            if (!tr_opt.corpus_path.empty()) replay.corpus_path = tr_opt.corpus_path;
            if (!tr_opt.checkpoint_path.empty()) {
                replay.checkpoint_path = tr_opt.checkpoint_path;
                replay.log_path = tr_opt.log_path;  // re-derive from the new checkpoint
                replay.manifest_path = tr_opt.manifest_path;
            } else {
                if (!tr_opt.log_path.empty()) replay.log_path = tr_opt.log_path;
                if (!tr_opt.manifest_path.empty()) replay.manifest_path = tr_opt.manifest_path;
            }
            tr_opt = replay;
        } else if (tr_opt.corpus_path.empty() || tr_opt.checkpoint_path.empty()) {
            throw config_error("train needs --corpus and --checkpoint (or --from-manifest)");
        }
        if (tr_manifest_in.empty()) {
            tr_opt.cfg.loss.alpha_mode = alpha_mode == "fixed" ? AlphaMode::Fixed : AlphaMode::Inverse;
            tr_opt.cfg.readout = readout == "boundary" ? Readout::Boundary : Readout::Mean;
            if (!tr_opt.config_path.empty()) {
                AnalysisConfig from_file = load_config(tr_opt.config_path);
                // explicit flags still win over the file
                if (!tr_flags.max_tokens->count()) tr_opt.cfg.analysis.max_tokens = from_file.max_tokens;
                if (!tr_flags.truncate->count())
                    tr_opt.cfg.analysis.truncate_oversize = from_file.truncate_oversize;
                if (!tr_flags.any_call->count()) tr_opt.cfg.analysis.api_any_call = from_file.api_any_call;
                if (!tr_flags.window->count()) tr_opt.cfg.analysis.window = from_file.window;
                tr_opt.cfg.analysis.unsafe_apis = from_file.unsafe_apis;
                tr_opt.cfg.analysis.execution_apis = from_file.execution_apis;
                tr_opt.cfg.analysis.free_apis = from_file.free_apis;
                tr_opt.cfg.analysis.resource_pairs = from_file.resource_pairs;
                tr_opt.cfg.analysis.keywords = from_file.keywords;
                tr_opt.cfg.analysis.conditional_keywords = from_file.conditional_keywords;
            }
        }
        TrainResult result = run_train(tr_opt);
        const EpochLog& last = result.log.back();
        std::printf("epochs=%zu val_accuracy=%.4f val_f1=%.4f skipped=%zu\n", result.log.size(),
                    last.val.accuracy, last.val.f1, result.skipped.size());
    });

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "score a checkpoint on a corpus split");
    EvalOptions ev_opt;
    std::string ev_manifest_in;
    ev->add_option("--corpus", ev_opt.corpus_path, "JSONL corpus");
    ev->add_option("--checkpoint", ev_opt.checkpoint_path, "trained checkpoint");
    ev->add_option("--report", ev_opt.report_path, "metrics report path");
    ev->add_option("--manifest", ev_opt.manifest_path, "manifest path (default <report>.manifest)");
    ev->add_option("--config", ev_opt.config_path, "analysis config file");
    ev->add_option("--split", ev_opt.split, "train | val | test | all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    ev->add_option("--import", ev_opt.import_path, "embedding table for provider=import");
    ev->add_option("--from-manifest", ev_manifest_in, "replay a previous run's manifest");
    AnalysisFlags ev_flags = add_analysis_flags(ev, ev_opt.analysis);
    ev->callback([&] {
        if (!ev_manifest_in.empty()) {
            EvalOptions replay = eval_options_from_manifest(read_manifest(ev_manifest_in));
            if (!ev_opt.report_path.empty()) {
                replay.report_path = ev_opt.report_path;
                replay.manifest_path = ev_opt.manifest_path;
            }
            ev_opt = replay;
        } else {
            if (ev_opt.corpus_path.empty() || ev_opt.checkpoint_path.empty() ||
                ev_opt.report_path.empty())
                throw config_error("eval needs --corpus, --checkpoint and --report (or --from-manifest)");
            ev_opt.analysis_set = ev_flags.any_set();
        }
        Metrics m = run_eval(ev_opt);
        std::printf("accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f\n", m.accuracy, m.precision,
                    m.recall, m.f1);
    });

    // ---- predict ----
    auto* pr = app.add_subcommand("predict", "classify one function");
    PredictOptions pr_opt;
    pr->add_option("source", pr_opt.source_path, "C/C++ source file")->required();
    pr->add_option("--checkpoint", pr_opt.checkpoint_path, "trained checkpoint")->required();
    pr->add_option("--config", pr_opt.config_path, "analysis config file");
    pr->add_option("--import", pr_opt.import_path, "embedding table for provider=import");
    AnalysisFlags pr_flags = add_analysis_flags(pr, pr_opt.analysis);
    pr->callback([&] {
        pr_opt.analysis_set = pr_flags.any_set();
        std::cout << run_predict(pr_opt);
    });

    // ---- synth ----
    auto* sy = app.add_subcommand("synth", "generate an imbalanced synthetic corpus");
    SynthOptions sy_opt;
    sy->add_option("--out", sy_opt.out_path, "JSONL output path")->required();
    sy->add_option("--n", sy_opt.n, "sample count");
    sy->add_option("--ratio", sy_opt.ratio, "benign samples per vulnerable one");
    sy->add_option("--seed", sy_opt.seed, "generator seed");
    sy->add_option("--manifest", sy_opt.manifest_path, "manifest path (default <out>.manifest)");
    sy->callback([&] {
        run_synth(sy_opt);
        std::printf("wrote %s\n", sy_opt.out_path.c_str());
    });

    // ---- export ----
    auto* ex = app.add_subcommand("export", "corpus statistics and reject listing");
    ExportOptions ex_opt;
    ex->add_option("--corpus", ex_opt.corpus_path, "JSONL corpus")->required();
    ex->add_option("--stats", ex_opt.stats_path, "stats TSV output path");
    ex->add_option("--rejects", ex_opt.rejects_path, "rejected-line JSONL output path");
    ex->add_option("--manifest", ex_opt.manifest_path, "manifest path");
    ex->callback([&] { std::cout << run_export(ex_opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
