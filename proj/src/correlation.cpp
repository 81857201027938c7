#include "universa/eval/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace universa {

std::optional<double> pearson_lcc(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("pearson_lcc: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson_lcc: need at least 2 points");
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Arr xv = Eigen::Map<const Arr>(x.data(), n);
  Arr yv = Eigen::Map<const Arr>(y.data(), n);
  xv -= xv.mean();
  yv -= yv.mean();
  const double sx = xv.square().sum();
  const double sy = yv.square().sum();
  if (sx <= 0.0 || sy <= 0.0) return std::nullopt;
  return std::clamp((xv * yv).sum() / std::sqrt(sx * sy), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    // Positions i..j (0-based) share the mean 1-based rank.
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman_srcc(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValidationError("spearman_srcc: length mismatch");
  if (x.size() < 2) throw ValidationError("spearman_srcc: need at least 2 points");
  return pearson_lcc(average_ranks(x), average_ranks(y));
}

}  // namespace universa
