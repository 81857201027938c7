#pragma once

#include <string>

#include "universa/audio/fbank.hpp"

namespace universa {

/// Precomputed-feature file: text header "UNIVERSA-FEAT 1\n<frames> <dims>
/// <frame_shift_s> <frame_length_s>\n" followed by frames*dims little-endian
/// float32 values, row-major. The escape hatch for externally computed
/// representations.
void write_features(const std::string& path, const FeatureMatrix& feat);
FeatureMatrix read_features(const std::string& path);

}  // namespace universa
