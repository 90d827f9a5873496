#include "svgdet/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "svgdet/errors.hpp"

namespace svgdet {
namespace {

// '*' suffix means prefix match: "exec*" covers execl, execvp, ...
bool matches(const std::string& pattern, const std::string& name) {
    if (!pattern.empty() && pattern.back() == '*') {
        return name.size() >= pattern.size() - 1 &&
               name.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
    }
    return pattern == name;
}

bool in_list(const std::vector<std::string>& list, const std::string& name) {
    return std::any_of(list.begin(), list.end(),
                       [&](const std::string& p) { return matches(p, name); });
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

AnalysisConfig AnalysisConfig::defaults() {
    AnalysisConfig cfg;
    cfg.unsafe_apis = {"strcpy", "strcat", "gets",  "sprintf", "vsprintf",
                       "scanf",  "memcpy", "alloca", "read",    "write"};
    cfg.execution_apis = {"system", "exec*", "popen", "sql_exec", "mysql_query", "sqlite3_exec"};
    cfg.free_apis = {"free", "cfree"};
    cfg.resource_pairs = {{"malloc", "free"},
                          {"calloc", "free"},
                          {"realloc", "free"},
                          {"mutex_lock", "mutex_unlock"},
                          {"pthread_mutex_lock", "pthread_mutex_unlock"},
                          {"spin_lock", "spin_unlock"},
                          {"sem_wait", "sem_post"},
                          {"fopen", "fclose"}};
    cfg.keywords = {
        "auto",     "break",    "case",     "char",   "const",    "continue", "default",
        "do",       "double",   "enum",     "extern", "float",    "goto",     "inline",
        "int",      "long",     "register", "return", "short",    "signed",   "sizeof",
        "static",   "struct",   "typedef",  "union",  "unsigned", "void",     "volatile",
        "bool",     "class",    "namespace","new",    "delete",   "nullptr",  "template",
        "this",     "private",  "public",   "protected", "using", "virtual",  "true",
        "false",    "constexpr","operator", "typename"};
    cfg.conditional_keywords = {"if", "else", "while", "for", "switch"};
    return cfg;
}

bool AnalysisConfig::is_unsafe_api(const std::string& name) const { return in_list(unsafe_apis, name); }
bool AnalysisConfig::is_execution_api(const std::string& name) const { return in_list(execution_apis, name); }
bool AnalysisConfig::is_free_api(const std::string& name) const { return in_list(free_apis, name); }

int AnalysisConfig::acquire_pair(const std::string& name) const {
    for (size_t i = 0; i < resource_pairs.size(); ++i)
        if (matches(resource_pairs[i].first, name)) return static_cast<int>(i);
    return -1;
}

int AnalysisConfig::release_pair(const std::string& name) const {
    for (size_t i = 0; i < resource_pairs.size(); ++i)
        if (matches(resource_pairs[i].second, name)) return static_cast<int>(i);
    return -1;
}

bool AnalysisConfig::is_acquire(const std::string& name) const { return acquire_pair(name) >= 0; }

bool AnalysisConfig::is_known_api(const std::string& name) const {
    return is_unsafe_api(name) || is_execution_api(name) || is_free_api(name) ||
           acquire_pair(name) >= 0 || release_pair(name) >= 0;
}

AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw file_unreadable("cannot open config file: " + path);

    AnalysisConfig cfg = AnalysisConfig::defaults();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + " is not key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));

        if (key == "max_tokens") {
            cfg.max_tokens = std::stoi(value);
            if (cfg.max_tokens < 3) throw config_error("max_tokens must be at least 3");
        } else if (key == "truncate_oversize") {
            cfg.truncate_oversize = (value == "true" || value == "1");
        } else if (key == "api_any_call") {
            cfg.api_any_call = (value == "true" || value == "1");
        } else if (key == "window") {
            cfg.window = std::stoi(value);
            if (cfg.window < 1) throw config_error("window must be at least 1");
        } else if (key == "unsafe_apis") {
            cfg.unsafe_apis = split_list(value);
        } else if (key == "execution_apis") {
            cfg.execution_apis = split_list(value);
        } else if (key == "free_apis") {
            cfg.free_apis = split_list(value);
        } else if (key == "resource_pairs") {
            // comma list of acquire:release entries
            cfg.resource_pairs.clear();
            for (const std::string& item : split_list(value)) {
                size_t colon = item.find(':');
                if (colon == std::string::npos)
                    throw config_error("resource_pairs entry '" + item + "' is not acquire:release");
                cfg.resource_pairs.emplace_back(trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
            }
        } else if (key == "keywords") {
            auto items = split_list(value);
            cfg.keywords = {items.begin(), items.end()};
        } else if (key == "conditional_keywords") {
            auto items = split_list(value);
            cfg.conditional_keywords = {items.begin(), items.end()};
        } else {
            throw config_error("unknown config key '" + key + "' on line " + std::to_string(lineno));
        }
    }
    return cfg;
}

}  // namespace svgdet
