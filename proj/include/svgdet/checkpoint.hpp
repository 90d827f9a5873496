#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svgdet/nn.hpp"

namespace svgdet {

// Versioned binary container: fixed header (format version, dims, seed,
// provider, readout, class labels, lookup vocabulary) followed by named
// row-major float64 tensors.  Round-trips are bit-exact.
struct Checkpoint {
    ModelParams params;
    uint64_t seed = 1;
    std::string provider = "hashed";
    std::vector<std::string> labels;
};

void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed,
                     const std::string& provider, const std::vector<std::string>& labels);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace svgdet
