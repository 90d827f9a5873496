#include "svgdet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "svgdet/errors.hpp"
#include "svgdet/rng.hpp"

namespace svgdet {
namespace {

std::string canonical_line(const LabeledSample& s) {
    nlohmann::json j;  // nlohmann objects serialize with sorted keys
    j["id"] = s.id;
    j["func"] = s.func;
    j["target"] = s.target;
    if (s.cwe) j["cwe"] = *s.cwe;
    if (s.description) j["description"] = *s.description;
    return j.dump();
}

}  // namespace

int Corpus::count_target(int target) const {
    int n = 0;
    for (const LabeledSample& s : samples)
        if (s.target == target) ++n;
    return n;
}

std::vector<std::string> Corpus::cwe_tags() const {
    std::vector<std::string> tags;
    std::unordered_set<std::string> seen;
    for (const LabeledSample& s : samples)
        if (s.cwe && *s.cwe != "benign" && seen.insert(*s.cwe).second) tags.push_back(*s.cwe);
    return tags;
}

std::vector<int> SplitMap::indices(Split s) const {
    std::vector<int> out;
    for (size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == s) out.push_back(static_cast<int>(i));
    return out;
}

Corpus load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw file_unreadable("cannot open corpus file: " + path);

    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;

        auto reject = [&](const std::string& reason) {
            corpus.rejects.push_back({lineno, reason, line});
        };

        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            reject("invalid json");
            continue;
        }

        LabeledSample s;
        s.raw = line;

        if (!j.contains("func") || !j["func"].is_string() || j["func"].get<std::string>().empty()) {
            reject("missing or empty func");
            continue;
        }
        s.func = j["func"].get<std::string>();

        if (!j.contains("target")) {
            reject("missing target");
            continue;
        }
        if (j["target"].is_number_integer()) {
            s.target = j["target"].get<int>();
        } else if (j["target"].is_string()) {
            const std::string& t = j["target"].get<std::string>();
            if (t == "0") s.target = 0;
            else if (t == "1") s.target = 1;
            else s.target = -1;
        } else {
            s.target = -1;
        }
        if (s.target != 0 && s.target != 1) {
            reject("label out of range");
            continue;
        }

        if (j.contains("cwe") && j["cwe"].is_string() && !j["cwe"].get<std::string>().empty())
            s.cwe = j["cwe"].get<std::string>();
        if (s.target == 0 && s.cwe && *s.cwe != "benign") {
            reject("benign sample with cwe tag");
            continue;
        }
        if (j.contains("description") && j["description"].is_string())
            s.description = j["description"].get<std::string>();

        s.id = (j.contains("id") && j["id"].is_string()) ? j["id"].get<std::string>()
                                                         : "line-" + std::to_string(lineno);
        if (!ids.insert(s.id).second) {
            reject("duplicate id");
            continue;
        }
        corpus.samples.push_back(std::move(s));
    }

    if (corpus.samples.empty())
        throw all_lines_rejected("no usable sample in " + path + " (" +
                                 std::to_string(corpus.rejects.size()) + " lines rejected)");
    return corpus;
}

void save_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write corpus file: " + path);
    for (const LabeledSample& s : corpus.samples)
        out << (s.raw.empty() ? canonical_line(s) : s.raw) << '\n';
}

void save_rejects(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write rejects file: " + path);
    for (const RejectedLine& r : corpus.rejects) {
        nlohmann::json j;
        j["line"] = r.line;
        j["reason"] = r.reason;
        j["content"] = r.content;
        out << j.dump() << '\n';
    }
}

SplitMap split_corpus(const Corpus& corpus, uint64_t seed) {
    int n = static_cast<int>(corpus.samples.size());
    if (n < 10) throw too_few_samples("need at least 10 samples to split, got " + std::to_string(n));

    SplitMap map;
    map.assignment.assign(n, Split::Train);
    Rng rng(seed);

    for (int target : {0, 1}) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (corpus.samples[i].target == target) members.push_back(i);
        if (members.empty()) continue;
        rng.shuffle(members);

        int n_c = static_cast<int>(members.size());
        int n_test = static_cast<int>(std::llround(0.1 * n_c));
        int n_val = static_cast<int>(std::llround(0.1 * n_c));
        int n_train = n_c - n_val - n_test;
        for (int k = 0; k < n_c; ++k) {
            Split s = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
            map.assignment[members[k]] = s;
        }
    }
    return map;
}

std::string corpus_stats(const Corpus& corpus) {
    int benign = corpus.count_target(0);
    int vulnerable = corpus.count_target(1);

    std::ostringstream out;
    out << "total\t" << corpus.samples.size() << "\n";
    out << "benign\t" << benign << "\n";
    out << "vulnerable\t" << vulnerable << "\n";
    if (vulnerable == 0) {
        out << "ratio\tundefined\n";
    } else if (benign % vulnerable == 0) {
        out << "ratio\t" << benign / vulnerable << ":1\n";
    } else {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.1f:1", static_cast<double>(benign) / vulnerable);
        out << "ratio\t" << buf << "\n";
    }

    std::map<std::string, int> by_cwe;
    for (const LabeledSample& s : corpus.samples)
        if (s.cwe && *s.cwe != "benign") by_cwe[*s.cwe]++;
    for (const auto& [tag, count] : by_cwe) out << "cwe\t" << tag << "\t" << count << "\n";
    return out.str();
}

namespace {

struct Shape {
    const char* cwe;
    const char* description;
};

std::string vulnerable_func(int shape, int k, Rng& rng) {
    std::string K = std::to_string(k);
    std::string lit = std::to_string(rng.below(90) + 10);
    switch (shape) {
        case 0:  // unchecked bounded-buffer copy
            return "void copy_input_" + K + "(char *dst, char *src) {\n"
                   "    int step_" + K + " = " + lit + ";\n"
                   "    strcpy(dst, src);\n"
                   "    note_event(step_" + K + ");\n"
                   "}\n";
        case 1:  // read through a released pointer
            return "int drain_queue_" + K + "(char *item) {\n"
                   "    int total_" + K + " = " + lit + ";\n"
                   "    free(item);\n"
                   "    total_" + K + " = item[0];\n"
                   "    return total_" + K + ";\n"
                   "}\n";
        default:  // command built straight from a parameter
            return "void launch_task_" + K + "(char *cmd) {\n"
                   "    int code_" + K + " = " + lit + ";\n"
                   "    system(cmd);\n"
                   "    note_event(code_" + K + ");\n"
                   "}\n";
    }
}

std::string benign_func(int shape, int k, Rng& rng) {
    std::string K = std::to_string(k);
    std::string lit = std::to_string(rng.below(90) + 10);
    switch (shape) {
        case 0:  // copy guarded by a capacity check
            return "void copy_guard_" + K + "(char *dst, char *src, int cap) {\n"
                   "    if (cap > 1) {\n"
                   "        strncpy(dst, src, cap);\n"
                   "    }\n"
                   "    note_event(cap);\n"
                   "}\n";
        case 1:  // plain aggregation, no release involved
            return "int sum_queue_" + K + "(char *item) {\n"
                   "    int total_" + K + " = " + lit + ";\n"
                   "    note_event(total_" + K + ");\n"
                   "    return total_" + K + ";\n"
                   "}\n";
        default:  // execution behind a validation check
            return "void launch_guard_" + K + "(char *cmd) {\n"
                   "    if (is_safe(cmd)) {\n"
                   "        system(cmd);\n"
                   "    }\n"
                   "    note_event(" + lit + ");\n"
                   "}\n";
    }
}

}  // namespace

Corpus synth_imbalanced(int n, double benign_per_vulnerable, uint64_t seed) {
    if (benign_per_vulnerable <= 0.0)
        throw ratio_out_of_range("benign:vulnerable ratio must be positive, got " +
                                 std::to_string(benign_per_vulnerable));
    if (n < 2) throw too_few_samples("cannot synthesize fewer than 2 samples");

    int n_vul = static_cast<int>(std::llround(n / (1.0 + benign_per_vulnerable)));
    n_vul = std::max(1, std::min(n - 1, n_vul));

    static const Shape kShapes[3] = {
        {"CWE-119", "copy without a bounds check"},
        {"CWE-416", "use of memory after it was released"},
        {"CWE-78", "command execution from an unchecked parameter"},
    };

    Rng rng(seed);
    std::vector<int> targets(n, 0);
    for (int i = 0; i < n_vul; ++i) targets[i] = 1;
    rng.shuffle(targets);

    Corpus corpus;
    corpus.samples.reserve(n);
    int vul_seen = 0, benign_seen = 0;
    for (int i = 0; i < n; ++i) {
        LabeledSample s;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%05d", i);
        s.id = idbuf;
        s.target = targets[i];
        if (s.target == 1) {
            int shape = vul_seen++ % 3;  // rotate so every defect shape appears
            s.func = vulnerable_func(shape, i, rng);
            s.cwe = kShapes[shape].cwe;
            s.description = kShapes[shape].description;
        } else {
            int shape = benign_seen++ % 3;
            s.func = benign_func(shape, i, rng);
        }
        s.raw = canonical_line(s);
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

}  // namespace svgdet
