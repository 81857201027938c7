#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "universa/data/manifest.hpp"
#include "universa/eval/correlation.hpp"
#include "universa/eval/report.hpp"
#include "universa/rng.hpp"

using namespace universa;

namespace {

// Brute-force oracle: rank by sorting with naive tie averaging, then the
// textbook Pearson formula. Kept independent of the implementation.
std::vector<double> oracle_ranks(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> ranks(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    size_t less = 0, equal = 0;
    for (size_t j = 0; j < n; ++j) {
      if (x[j] < x[i]) ++less;
      if (x[j] == x[i]) ++equal;
    }
    // positions less+1 .. less+equal share the average rank
    ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return ranks;
}

double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double num = n * sxy - sx * sy;
  const double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return num / den;
}

UtteranceRecord rec(const std::string& id, std::map<std::string, double> metrics) {
  UtteranceRecord r;
  r.id = id;
  r.audio = id + ".wav";
  r.metrics = std::move(metrics);
  return r;
}

}  // namespace

TEST_CASE("pearson: exact affine cases") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  CHECK(*pearson_lcc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  CHECK(*pearson_lcc(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson: hand-computed 0.6 case") {
  // x=(1,2,3,4), y=(2,1,4,3): cov sum 3.0, both variances 5 -> r = 0.6.
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {2, 1, 4, 3};
  CHECK(std::abs(*pearson_lcc(x, y) - 0.6) < 1e-9);
}

TEST_CASE("pearson: constant input is undefined, not zero") {
  const std::vector<double> x = {1, 1, 1};
  const std::vector<double> y = {1, 2, 3};
  CHECK_FALSE(pearson_lcc(x, y).has_value());
  CHECK_THROWS_AS(pearson_lcc({1.0}, {2.0}), ValidationError);
}

TEST_CASE("spearman: rank invariance under strictly monotone maps") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform(-3.0, 3.0));
    y.push_back(rng.uniform(-3.0, 3.0));
  }
  const double base = *spearman_srcc(x, y);
  std::vector<double> cubed;
  for (double v : x) cubed.push_back(v * v * v);
  CHECK(*spearman_srcc(cubed, y) == base);  // exact equality of output
  std::vector<double> expy;
  for (double v : y) expy.push_back(std::exp(v));
  CHECK(*spearman_srcc(x, expy) == base);
}

TEST_CASE("spearman: average-rank tie rule") {
  const std::vector<double> x = {1, 2, 2, 3};
  const std::vector<double> want = {1.0, 2.5, 2.5, 4.0};
  CHECK(average_ranks(x) == want);
}

TEST_CASE("correlations match brute-force oracles on random vectors") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
      // Quantized values so ties actually occur.
      x.push_back(std::floor(rng.uniform(0.0, 30.0)));
      y.push_back(std::floor(rng.uniform(0.0, 30.0)));
    }
    CHECK(std::abs(*pearson_lcc(x, y) - oracle_pearson(x, y)) < 1e-10);
    const double want = oracle_pearson(oracle_ranks(x), oracle_ranks(y));
    CHECK(std::abs(*spearman_srcc(x, y) - want) < 1e-10);
  }
}

TEST_CASE("lcc affine invariance and symmetry") {
  Rng rng(123);
  std::vector<double> x, y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(rng.uniform(0.0, 1.0));
    y.push_back(rng.uniform(0.0, 1.0));
  }
  const double base = *pearson_lcc(x, y);
  std::vector<double> ax;
  for (double v : x) ax.push_back(3.5 * v + 11.0);
  CHECK(std::abs(*pearson_lcc(ax, y) - base) < 1e-12);
  CHECK(*pearson_lcc(y, x) == doctest::Approx(base).epsilon(1e-15));
  CHECK(*spearman_srcc(y, x) == *spearman_srcc(x, y));
}

TEST_CASE("evaluate: predictions equal to truth give correlations of 1") {
  Manifest truth;
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    truth.records.push_back(rec("u" + std::to_string(i),
                                {{"mos", rng.uniform(1.0, 5.0)},
                                 {"stoi", rng.uniform(0.0, 1.0)}}));
  }
  const EvaluationReport report = evaluate(truth, truth);
  for (const auto& row : report.rows) {
    CHECK(*row.lcc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*row.srcc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.count == 20);
  }
  CHECK(*report.avg_lcc == doctest::Approx(1.0));
}

TEST_CASE("evaluate: pairing rule counts only doubly-labeled utterances") {
  Manifest truth, pred;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const std::string id = "u" + std::to_string(i);
    std::map<std::string, double> t = {{"mos", rng.uniform(1.0, 5.0)}};
    if (i < 10) t["pesq"] = rng.uniform(1.0, 4.5);
    truth.records.push_back(rec(id, std::move(t)));
    pred.records.push_back(rec(id, {{"mos", rng.uniform(1.0, 5.0)},
                                    {"pesq", rng.uniform(1.0, 4.5)}}));
  }
  const EvaluationReport report = evaluate(pred, truth);
  REQUIRE(report.rows.size() == 2);
  // Rows come in registry (table) order: pesq before mos.
  CHECK(report.rows[0].id == "pesq");
  CHECK(report.rows[0].count == 10);
  CHECK(report.rows[1].id == "mos");
  CHECK(report.rows[1].count == 100);
}

TEST_CASE("evaluate: constant truth column reported undefined, excluded from avg") {
  Manifest truth, pred;
  Rng rng(9);
  for (int i = 0; i < 12; ++i) {
    const std::string id = "u" + std::to_string(i);
    truth.records.push_back(rec(id, {{"mos", 3.0}, {"stoi", rng.uniform(0.0, 1.0)}}));
    pred.records.push_back(
        rec(id, {{"mos", rng.uniform(1.0, 5.0)}, {"stoi", rng.uniform(0.0, 1.0)}}));
  }
  const EvaluationReport report = evaluate(pred, truth);
  const auto& mos_row = report.rows[0];
  REQUIRE(mos_row.id == "mos");
  CHECK_FALSE(mos_row.lcc.has_value());
  const auto& stoi_row = report.rows[1];
  CHECK(*report.avg_lcc == doctest::Approx(*stoi_row.lcc));
}

TEST_CASE("evaluate: order independence") {
  Manifest truth, pred;
  Rng rng(10);
  for (int i = 0; i < 30; ++i) {
    const std::string id = "u" + std::to_string(i);
    truth.records.push_back(rec(id, {{"mos", rng.uniform(1.0, 5.0)}}));
    pred.records.push_back(rec(id, {{"mos", rng.uniform(1.0, 5.0)}}));
  }
  const auto before = evaluate(pred, truth);
  Manifest shuffled = pred;
  Rng shuffle_rng(4);
  shuffle_rng.shuffle(shuffled.records);
  const auto after = evaluate(shuffled, truth);
  CHECK(before.to_rows() == after.to_rows());
}

TEST_CASE("evaluate: no pairable metric anywhere is an error") {
  Manifest truth, pred;
  truth.records.push_back(rec("a", {{"mos", 3.0}}));
  pred.records.push_back(rec("b", {{"mos", 2.0}}));  // ids disjoint
  CHECK_THROWS_AS(evaluate(pred, truth), ValidationError);
}
