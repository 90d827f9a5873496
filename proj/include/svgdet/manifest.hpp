#pragma once

#include <map>
#include <string>

namespace svgdet {

// Flat key=value run description.  Every command writes one next to its
// outputs; re-running a command from its manifest reproduces those outputs
// byte for byte.  Keys are written sorted so the file itself is stable.
using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

}  // namespace svgdet
