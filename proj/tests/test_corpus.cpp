#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "svgdet/config.hpp"
#include "svgdet/corpus.hpp"
#include "svgdet/errors.hpp"
#include "svgdet/graph.hpp"
#include "svgdet/lexer.hpp"

using namespace svgdet;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "corpus_test_" + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int poacher_edges(const std::string& func) {
    AnalysisConfig cfg = AnalysisConfig::defaults();
    SvgGraph g = assemble_svg(tokenize(func, cfg).tokens, cfg);
    int n = 0;
    for (const TypedEdge& e : g.edges)
        if (is_poacher(e.kind)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("loads documented fields and preserves raw lines byte for byte") {
    std::string content =
        "{\"id\": \"s1\", \"func\": \"int f() { return 1; }\", \"target\": 0}\n"
        "{\"target\":1,\"cwe\":\"CWE-119\",\"func\":\"void g() { strcpy(a,b); }\",\"id\":\"s2\","
        "\"description\":\"overflow\"}\n";
    std::string path = write_temp("roundtrip.jsonl", content);
    Corpus c = load_jsonl(path);
    REQUIRE(c.samples.size() == 2);
    CHECK(c.rejects.empty());
    CHECK(c.samples[0].id == "s1");
    CHECK(c.samples[0].target == 0);
    CHECK(!c.samples[0].cwe.has_value());
    CHECK(c.samples[1].cwe.value() == "CWE-119");
    CHECK(c.samples[1].description.value() == "overflow");
    CHECK(c.count_target(0) == 1);
    CHECK(c.count_target(1) == 1);
    CHECK(c.cwe_tags() == std::vector<std::string>{"CWE-119"});

    std::string out = write_temp("roundtrip_out.jsonl", "");
    save_jsonl(c, out);
    CHECK(slurp(out) == content);
}

TEST_CASE("missing ids are synthesized from the line number") {
    std::string path = write_temp("noid.jsonl",
                                  "{\"func\": \"int f() { return 1; }\", \"target\": 0}\n");
    Corpus c = load_jsonl(path);
    REQUIRE(c.samples.size() == 1);
    CHECK(c.samples[0].id == "line-1");
}

TEST_CASE("malformed lines are rejected with reasons, good lines survive") {
    std::string content =
        "{\"id\":\"ok\",\"func\":\"a = 1;\",\"target\":0}\n"
        "not json at all\n"
        "{\"id\":\"nofunc\",\"target\":1}\n"
        "{\"id\":\"badlabel\",\"func\":\"x;\",\"target\":7}\n"
        "{\"id\":\"notarget\",\"func\":\"x;\"}\n"
        "{\"id\":\"benigncwe\",\"func\":\"x;\",\"target\":0,\"cwe\":\"CWE-119\"}\n"
        "{\"id\":\"ok\",\"func\":\"dup;\",\"target\":1,\"cwe\":\"CWE-78\"}\n";
    Corpus c = load_jsonl(write_temp("rejects.jsonl", content));
    CHECK(c.samples.size() == 1);
    REQUIRE(c.rejects.size() == 6);

    std::set<std::string> reasons;
    for (const RejectedLine& r : c.rejects) reasons.insert(r.reason);
    CHECK(reasons.count("invalid json"));
    CHECK(reasons.count("missing or empty func"));
    CHECK(reasons.count("missing target"));
    CHECK(reasons.count("label out of range"));
    CHECK(reasons.count("benign sample with cwe tag"));
    CHECK(reasons.count("duplicate id"));

    std::string rej = write_temp("rejects_out.jsonl", "");
    save_rejects(c, rej);
    std::string listing = slurp(rej);
    CHECK(listing.find("duplicate id") != std::string::npos);
}

TEST_CASE("a file with no usable line fails loudly") {
    std::string path = write_temp("allbad.jsonl", "garbage\n{\"target\":0}\n");
    try {
        load_jsonl(path);
        FAIL("expected AllLinesRejected");
    } catch (const Error& e) {
        CHECK(e.code() == "AllLinesRejected");
        CHECK(e.exit_code() == 3);
    }
    CHECK_THROWS_AS(load_jsonl("really_not_a_file.jsonl"), Error);
}

TEST_CASE("stats report counts and the class ratio") {
    Corpus c = synth_imbalanced(20, 9.0, 3);  // 18 benign : 2 vulnerable
    std::string stats = corpus_stats(c);
    CHECK(stats.find("total\t20") != std::string::npos);
    CHECK(stats.find("benign\t18") != std::string::npos);
    CHECK(stats.find("vulnerable\t2") != std::string::npos);
    CHECK(stats.find("ratio\t9:1") != std::string::npos);

    Corpus none = synth_imbalanced(10, 1.0, 3);
    for (LabeledSample& s : none.samples) {
        s.target = 0;
        s.cwe.reset();
    }
    CHECK(corpus_stats(none).find("undefined") != std::string::npos);
}

TEST_CASE("stratified split allocates 80:10:10 per class") {
    Corpus c = synth_imbalanced(100, 4.0, 9);  // 80 benign, 20 vulnerable
    REQUIRE(c.count_target(0) == 80);
    REQUIRE(c.count_target(1) == 20);

    SplitMap split = split_corpus(c, 42);
    REQUIRE(split.assignment.size() == 100);
    CHECK(split.indices(Split::Train).size() == 80);
    CHECK(split.indices(Split::Val).size() == 10);
    CHECK(split.indices(Split::Test).size() == 10);

    auto class_count = [&](Split s, int target) {
        int n = 0;
        for (int idx : split.indices(s))
            if (c.samples[static_cast<size_t>(idx)].target == target) ++n;
        return n;
    };
    CHECK(class_count(Split::Val, 0) == 8);
    CHECK(class_count(Split::Val, 1) == 2);
    CHECK(class_count(Split::Test, 0) == 8);
    CHECK(class_count(Split::Test, 1) == 2);
}

TEST_CASE("splits are seed-deterministic and seed-sensitive") {
    Corpus c = synth_imbalanced(60, 2.0, 4);
    SplitMap a = split_corpus(c, 7);
    SplitMap b = split_corpus(c, 7);
    CHECK(a.assignment == b.assignment);
    SplitMap other = split_corpus(c, 8);
    CHECK(a.assignment != other.assignment);
}

TEST_CASE("splitting needs at least ten samples") {
    Corpus c = synth_imbalanced(9, 2.0, 4);
    try {
        split_corpus(c, 1);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.code() == "TooFewSamples");
        CHECK(e.exit_code() == 4);
    }
}

TEST_CASE("synthesis hits the requested imbalance exactly") {
    Corpus c = synth_imbalanced(200, 9.0, 5);
    CHECK(c.samples.size() == 200);
    CHECK(c.count_target(1) == 20);
    CHECK(c.count_target(0) == 180);
    CHECK(c.samples[0].id == "synth-00000");
    CHECK(c.samples[199].id == "synth-00199");

    std::vector<std::string> tag_list = c.cwe_tags();
    std::set<std::string> tags(tag_list.begin(), tag_list.end());
    CHECK(tags == std::set<std::string>{"CWE-119", "CWE-416", "CWE-78"});
    for (const LabeledSample& s : c.samples) {
        if (s.target == 1) CHECK(s.cwe.has_value());
        else CHECK(!s.cwe.has_value());
    }
}

TEST_CASE("synthesis is deterministic per seed") {
    Corpus a = synth_imbalanced(50, 3.0, 11);
    Corpus b = synth_imbalanced(50, 3.0, 11);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].id == b.samples[i].id);
        CHECK(a.samples[i].func == b.samples[i].func);
        CHECK(a.samples[i].target == b.samples[i].target);
    }
    Corpus other = synth_imbalanced(50, 3.0, 12);
    bool differs = false;
    for (size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].target != other.samples[i].target) differs = true;
    CHECK(differs);
}

TEST_CASE("planted vulnerable samples carry a poacher edge, benign ones none") {
    Corpus c = synth_imbalanced(60, 2.0, 21);
    for (const LabeledSample& s : c.samples) {
        if (s.target == 1) CHECK(poacher_edges(s.func) >= 1);
        else CHECK(poacher_edges(s.func) == 0);
    }
}

TEST_CASE("invalid synthesis parameters are rejected") {
    CHECK_THROWS_AS(synth_imbalanced(100, 0.0, 1), Error);
    CHECK_THROWS_AS(synth_imbalanced(100, -2.0, 1), Error);
    try {
        synth_imbalanced(1, 9.0, 1);
        FAIL("expected an error for n below 2");
    } catch (const Error& e) {
        CHECK(e.family() == ErrorFamily::Config);
    }
}

TEST_CASE("saving a synthetic corpus and reloading preserves every sample") {
    Corpus c = synth_imbalanced(30, 2.0, 8);
    std::string path = write_temp("synth_out.jsonl", "");
    save_jsonl(c, path);
    Corpus back = load_jsonl(path);
    REQUIRE(back.samples.size() == 30);
    for (size_t i = 0; i < back.samples.size(); ++i) {
        CHECK(back.samples[i].id == c.samples[i].id);
        CHECK(back.samples[i].func == c.samples[i].func);
        CHECK(back.samples[i].target == c.samples[i].target);
    }
}

}  // TEST_SUITE
