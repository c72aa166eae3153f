#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/distributions.hpp"
#include "srl/sample.hpp"
#include "srl/stats.hpp"

namespace srl {

struct SortedSample1D {
  std::vector<double> x;          // ascending
  std::vector<int> y;             // labels in sorted order
  std::vector<std::size_t> order;  // order[i] = draw index of sorted point i

  std::size_t size() const { return x.size(); }
};

// Stable sort of a univariate sample. Throws unless dim == 1 and n >= 1.
SortedSample1D sort_sample(const LabeledSample& sample);

// Sign-valued rule on R, constant on (cuts[i-1], cuts[i]]: segment i takes
// values[i]; values.size() == cuts.size() + 1.
class PiecewiseRule {
 public:
  PiecewiseRule(std::vector<double> cuts, std::vector<int> values);

  int operator()(double x) const;
  const std::vector<double>& cuts() const { return cuts_; }
  const std::vector<int>& values() const { return values_; }

 private:
  std::vector<double> cuts_;
  std::vector<int> values_;
};

// Nearest neighbor; a query exactly at a midpoint takes the left neighbor.
PiecewiseRule one_nn_rule(const SortedSample1D& s);

// Majority over the k nearest points (contiguous window in sorted order).
// Throws std::invalid_argument for even k, k == 0, or k > n.
PiecewiseRule knn_rule(const SortedSample1D& s, std::size_t k);

// 2 ceil(ln(n) / 2) + 1, reduced to the largest odd value <= n.
std::size_t default_k(std::size_t n);

// Linear interpolation of the labels between sorted points, constant beyond
// the ends; another local interpolation rule.
class LinearInterpolant {
 public:
  explicit LinearInterpolant(const SortedSample1D& s) : x_(s.x), y_(s.y) {}
  double operator()(double q) const;

 private:
  std::vector<double> x_;
  std::vector<int> y_;
};

// Exact excess zero-one risk of a piecewise rule:
//   integral of 1[rule(x) != bayes(x)] |2 p_y(x) - 1| d mu_x.
double excess_zero_one(const PiecewiseRule& rule, const UnivariateDistribution& dist);

struct WrongPairReport {
  Interval interval;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted indices (i, i+1)
  double covered_mass = 0.0;
  int bayes_label = 1;
  double c1 = 0.0;  // min over the interval of |p_y - 1/2|
};

// Adjacent pairs inside the declared interval whose labels both disagree
// with the Bayes label there. Throws std::invalid_argument when the
// distribution declares no interval.
WrongPairReport wrong_pairs(const SortedSample1D& s, const UnivariateDistribution& dist);

struct ComparisonRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::string rule;  // "1nn" or "knn"
  std::size_t k = 1;
  double excess_z = 0.0;
  double covered_mass = 0.0;  // NaN when the distribution declares no interval
};

struct ComparisonCell {
  std::size_t n = 0;
  std::string rule;
  Quartiles excess_z;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::vector<ComparisonCell> summary;
  std::uint64_t root_seed = 0;
};

// Trial seed for (n, trial): derive_seed(derive_seed(root, trial stream, n),
// trial stream, trial). Trials run in parallel.
ComparisonTable excess_risk_comparison(const UnivariateDistribution& dist,
                                       const std::vector<std::size_t>& n_grid, std::size_t trials,
                                       std::uint64_t root_seed, unsigned threads = 0);

std::string comparison_csv(const ComparisonTable& table);
nlohmann::json comparison_summary_json(const ComparisonTable& table);

}  // namespace srl
