#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "svgdet/checkpoint.hpp"
#include "svgdet/errors.hpp"
#include "svgdet/runner.hpp"

using namespace svgdet;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(SVGDET_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// one small trained model shared by the eval/predict cases
struct TrainedFixture {
    std::string corpus_path = "runner_corpus.jsonl";
    std::string checkpoint_path = "runner_model.ckpt";
    TrainResult result;

    TrainedFixture() {
        SynthOptions synth;
        synth.n = 60;
        synth.ratio = 2.0;
        synth.seed = 7;
        synth.out_path = corpus_path;
        run_synth(synth);

        TrainOptions opt;
        opt.corpus_path = corpus_path;
        opt.checkpoint_path = checkpoint_path;
        opt.cfg.epochs = 60;
        opt.cfg.dim = 16;
        opt.cfg.hidden = 24;
        opt.cfg.min_classes = 5;
        opt.cfg.lr = 0.01;
        opt.cfg.seed = 3;
        result = run_train(opt);
    }
};

TrainedFixture& trained() {
    static TrainedFixture f;
    return f;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("tokenize command renders the token table") {
    TokenizeOptions opt;
    opt.source_path = fixture_path("fig_like.c");
    std::string out = run_tokenize(opt);
    CHECK(out.rfind("index\tkind\ttext\tline\tcol\n", 0) == 0);
    CHECK(out.find("\tApiCall\tgets\t") != std::string::npos);
    CHECK(out.find("\tBoundaryMarker\t<s>\t") != std::string::npos);
}

TEST_CASE("graph command writes dot, json and a manifest beside the outputs") {
    GraphOptions opt;
    opt.source_path = fixture_path("fig_like.c");
    opt.out_prefix = "runner_graph_out";
    std::string summary = run_graph(opt);
    CHECK(summary.find("nodes\t62") != std::string::npos);
    CHECK(summary.find("SequentialFlow\t61") != std::string::npos);
    CHECK(summary.find("total\t68") != std::string::npos);

    CHECK(slurp("runner_graph_out.dot").rfind("graph svg {", 0) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp("runner_graph_out.json"));
    CHECK(j["nodes"].size() == 62);
    Manifest m = read_manifest("runner_graph_out.manifest");
    CHECK(m.at("command") == "graph");
    CHECK(m.at("window") == "1");
}

TEST_CASE("train writes checkpoint, log and manifest") {
    TrainedFixture& f = trained();
    CHECK(f.result.log.size() == 60);
    CHECK(!f.result.labels.empty());
    CHECK(f.result.labels[0] == "benign");

    Checkpoint ck = load_checkpoint(f.checkpoint_path);
    CHECK(ck.params.dim == 16);
    CHECK(ck.params.hidden == 24);
    CHECK(ck.params.classes == 5);
    CHECK(ck.seed == 3);
    CHECK(ck.provider == "hashed");
    CHECK(ck.labels == f.result.labels);

    std::string log = slurp(f.checkpoint_path + ".log.tsv");
    CHECK(log.rfind("epoch\t", 0) == 0);
    Manifest m = read_manifest(f.checkpoint_path + ".manifest");
    CHECK(m.at("command") == "train");
    CHECK(m.at("seed") == "3");
    CHECK(m.at("epochs") == "60");
}

TEST_CASE("replaying the train manifest reproduces every output byte") {
    TrainedFixture& f = trained();
    TrainOptions replay = train_options_from_manifest(read_manifest(f.checkpoint_path + ".manifest"));
    replay.checkpoint_path = "runner_model_replay.ckpt";
    replay.log_path = "";       // re-derive beside the new checkpoint
    replay.manifest_path = "";
    run_train(replay);
    CHECK(slurp("runner_model_replay.ckpt") == slurp(f.checkpoint_path));
    CHECK(slurp("runner_model_replay.ckpt.log.tsv") == slurp(f.checkpoint_path + ".log.tsv"));
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
    TrainedFixture& f = trained();
    Checkpoint ck = load_checkpoint(f.checkpoint_path);
    save_checkpoint("runner_model_copy.ckpt", ck.params, ck.seed, ck.provider, ck.labels);
    CHECK(slurp("runner_model_copy.ckpt") == slurp(f.checkpoint_path));

    std::string corrupt = slurp(f.checkpoint_path);
    corrupt[0] = 'X';
    write_text_file("runner_model_bad.ckpt", corrupt);
    try {
        load_checkpoint("runner_model_bad.ckpt");
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(e.exit_code() == 3);
    }
    CHECK_THROWS_AS(load_checkpoint("no_such_model.ckpt"), Error);
}

TEST_CASE("eval scores a split and writes report plus manifest") {
    TrainedFixture& f = trained();
    EvalOptions opt;
    opt.corpus_path = f.corpus_path;
    opt.checkpoint_path = f.checkpoint_path;
    opt.report_path = "runner_eval_report.tsv";
    opt.split = "train";
    Metrics m = run_eval(opt);
    CHECK(m.accuracy >= 0.95);  // the fixture converges on its own training data

    std::string report = slurp("runner_eval_report.tsv");
    CHECK(report.find("accuracy\t") != std::string::npos);
    CHECK(report.find("cwe_accuracy\t") != std::string::npos);
    Manifest man = read_manifest("runner_eval_report.tsv.manifest");
    CHECK(man.at("command") == "eval");
    CHECK(man.at("split") == "train");

    EvalOptions all = opt;
    all.report_path = "runner_eval_all.tsv";
    all.split = "all";
    run_eval(all);
    CHECK(slurp("runner_eval_all.tsv").find("samples\t60") != std::string::npos);

    EvalOptions bad = opt;
    bad.split = "nope";
    CHECK_THROWS_AS(run_eval(bad), Error);
}

TEST_CASE("replaying the eval manifest reproduces the report") {
    TrainedFixture& f = trained();
    (void)f;
    EvalOptions replay = eval_options_from_manifest(read_manifest("runner_eval_report.tsv.manifest"));
    replay.report_path = "runner_eval_replay.tsv";
    replay.manifest_path = "";
    run_eval(replay);
    CHECK(slurp("runner_eval_replay.tsv") == slurp("runner_eval_report.tsv"));
}

TEST_CASE("predict names the planted category and cites poacher edges") {
    TrainedFixture& f = trained();
    write_text_file("runner_vul.c",
                    "void copy_packet(char *dst, char *src) {\n"
                    "    int n = 3;\n"
                    "    strcpy(dst, src);\n"
                    "    note_event(n);\n"
                    "}\n");
    PredictOptions opt;
    opt.source_path = "runner_vul.c";
    opt.checkpoint_path = f.checkpoint_path;
    std::string out = run_predict(opt);
    CHECK(out.rfind("VULNERABLE", 0) == 0);
    CHECK(out.find("CWE-119") != std::string::npos);
    CHECK(out.find("PoacherDataProcessing\tstrcpy@3:5") != std::string::npos);

    write_text_file("runner_ben.c",
                    "void copy_guarded(char *dst, char *src, int cap) {\n"
                    "    if (cap > 1) {\n"
                    "        strncpy(dst, src, cap);\n"
                    "        dst[cap - 1] = 0;\n"
                    "    }\n"
                    "}\n");
    PredictOptions ben = opt;
    ben.source_path = "runner_ben.c";
    std::string bout = run_predict(ben);
    CHECK(bout.rfind("BENIGN", 0) == 0);
    CHECK(bout.find("contributing_edges\t0") != std::string::npos);
}

TEST_CASE("export writes stats and reject listings") {
    TrainedFixture& f = trained();
    ExportOptions opt;
    opt.corpus_path = f.corpus_path;
    opt.stats_path = "runner_stats.tsv";
    opt.rejects_path = "runner_rejects.jsonl";
    std::string stats = run_export(opt);
    CHECK(stats.find("total\t60") != std::string::npos);
    CHECK(stats.find("ratio\t2:1") != std::string::npos);
    CHECK(slurp("runner_stats.tsv") == stats);
}

TEST_CASE("manifests round-trip and reject malformed lines") {
    Manifest m{{"b", "2"}, {"a", "1"}, {"path", "/x/y z"}};
    write_manifest("runner_manifest_test", m);
    CHECK(slurp("runner_manifest_test") == "a=1\nb=2\npath=/x/y z\n");
    CHECK(read_manifest("runner_manifest_test") == m);

    write_text_file("runner_manifest_bad", "a=1\njust words\n");
    try {
        read_manifest("runner_manifest_bad");
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(e.exit_code() == 3);
    }
}

TEST_CASE("error families map onto process exit codes") {
    CHECK(empty_input("x").exit_code() == 2);
    CHECK(file_unreadable("x").exit_code() == 2);
    CHECK(oversize_input("x").exit_code() == 3);
    CHECK(format_error("x").exit_code() == 3);
    CHECK(all_lines_rejected("x").exit_code() == 3);
    CHECK(shape_mismatch("x").exit_code() == 4);
    CHECK(config_error("x").exit_code() == 4);
    CHECK(too_few_samples("x").exit_code() == 4);
    CHECK(non_symmetric_input("x").exit_code() == 5);
    CHECK(invalid_distribution("x").exit_code() == 5);
    CHECK(non_finite_gradient("x").exit_code() == 5);
}

#ifdef SVGDET_BIN
TEST_CASE("the command-line binary surfaces the documented exit codes") {
    auto run = [](const std::string& args) {
        std::string cmd = std::string(SVGDET_BIN) + " " + args + " >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    CHECK(run("tokenize " + fixture_path("fig_like.c")) == 0);
    CHECK(run("tokenize no_such_source_file.c") == 2);           // unreadable input
    write_text_file("runner_empty.c", "/* nothing */");
    CHECK(run("tokenize runner_empty.c") == 2);                  // empty after stripping
    CHECK(run("tokenize " + fixture_path("fig_like.c") + " --max-tokens 5") == 3);  // oversize
    write_text_file("runner_bad.cfg", "no_such_key = 1\n");
    CHECK(run("tokenize " + fixture_path("fig_like.c") + " --config runner_bad.cfg") == 4);
    CHECK(run("synth --out runner_cli_synth.jsonl --n 30 --ratio 0") == 4);  // bad ratio
}
#endif

}  // TEST_SUITE
