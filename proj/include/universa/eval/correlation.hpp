#pragma once

#include <optional>
#include <vector>

#include "universa/common.hpp"

namespace universa {

/// Pearson linear correlation coefficient. Undefined (nullopt) when either
/// input is constant; never coerced to 0.
std::optional<double> pearson_lcc(const std::vector<double>& x,
                                  const std::vector<double>& y);

/// Spearman rank correlation: Pearson over average ranks, ties sharing the
/// mean of their rank positions.
std::optional<double> spearman_srcc(const std::vector<double>& x,
                                    const std::vector<double>& y);

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x);

}  // namespace universa
