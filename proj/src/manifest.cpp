#include "svgdet/manifest.hpp"

#include <fstream>

#include "svgdet/errors.hpp"

namespace svgdet {

void write_manifest(const std::string& path, const Manifest& manifest) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write manifest: " + path);
    for (const auto& [key, value] : manifest) out << key << "=" << value << "\n";
}

Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw file_unreadable("cannot open manifest: " + path);
    Manifest manifest;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw format_error("manifest line " + std::to_string(lineno) + " is not key=value");
        manifest[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return manifest;
}

}  // namespace svgdet
