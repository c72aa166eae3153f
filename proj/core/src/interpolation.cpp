#include "srl/interpolation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "srl/parallel.hpp"
#include "srl/rng.hpp"

namespace srl {

SortedSample1D sort_sample(const LabeledSample& sample) {
  if (sample.dim() != 1) throw std::invalid_argument("sort_sample: sample must be univariate");
  if (sample.size() < 1) throw std::invalid_argument("sort_sample: empty sample");
  SortedSample1D s;
  s.order.resize(sample.size());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(), [&](std::size_t a, std::size_t b) {
    return sample.points(static_cast<Eigen::Index>(a), 0) < sample.points(static_cast<Eigen::Index>(b), 0);
  });
  for (std::size_t i : s.order) {
    s.x.push_back(sample.points(static_cast<Eigen::Index>(i), 0));
    s.y.push_back(sample.labels[static_cast<Eigen::Index>(i)] > 0 ? 1 : -1);
  }
  return s;
}

PiecewiseRule::PiecewiseRule(std::vector<double> cuts, std::vector<int> values)
    : cuts_(std::move(cuts)), values_(std::move(values)) {
  if (values_.size() != cuts_.size() + 1) {
    throw std::invalid_argument("PiecewiseRule: need one more value than cuts");
  }
  if (!std::is_sorted(cuts_.begin(), cuts_.end())) {
    throw std::invalid_argument("PiecewiseRule: cuts must be non-decreasing");
  }
}

int PiecewiseRule::operator()(double x) const {
  const auto it = std::lower_bound(cuts_.begin(), cuts_.end(), x);
  return values_[static_cast<std::size_t>(it - cuts_.begin())];
}

PiecewiseRule one_nn_rule(const SortedSample1D& s) { return knn_rule(s, 1); }

PiecewiseRule knn_rule(const SortedSample1D& s, std::size_t k) {
  const std::size_t n = s.size();
  if (n < 1) throw std::invalid_argument("knn_rule: empty sample");
  if (k == 0 || k % 2 == 0) throw std::invalid_argument("knn_rule: k must be odd and positive");
  if (k > n) throw std::invalid_argument("knn_rule: k exceeds sample size");

  std::vector<double> cuts;
  std::vector<int> values;
  cuts.reserve(n - k);
  values.reserve(n - k + 1);
  int window = 0;
  for (std::size_t i = 0; i < k; ++i) window += s.y[i];
  values.push_back(window > 0 ? 1 : -1);
  for (std::size_t l = 0; l + k < n; ++l) {
    cuts.push_back(0.5 * (s.x[l] + s.x[l + k]));
    window += s.y[l + k] - s.y[l];
    values.push_back(window > 0 ? 1 : -1);
  }
  return {std::move(cuts), std::move(values)};
}

std::size_t default_k(std::size_t n) {
  if (n < 1) throw std::invalid_argument("default_k: n must be >= 1");
  const double half_log = std::log(static_cast<double>(n)) / 2.0;
  std::size_t k = 2 * static_cast<std::size_t>(std::ceil(half_log)) + 1;
  if (k > n) k = (n % 2 == 1) ? n : n - 1;
  return k;
}

double LinearInterpolant::operator()(double q) const {
  if (q <= x_.front()) return y_.front();
  if (q >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), q);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  const double span = x_[hi] - x_[lo];
  if (span <= 0.0) return y_[lo];
  const double t = (q - x_[lo]) / span;
  return (1.0 - t) * y_[lo] + t * y_[hi];
}

namespace {

// integral over [a, b] of 1[label != bayes] |2p - 1| dmu, with [a, b] inside
// the support and containing no breakpoint of p.
double wrong_mass_piece(double a, double b, int label, const UnivariateDistribution& dist) {
  if (!(b > a)) return 0.0;
  const int bayes = sign_of(2.0 * dist.p(0.5 * (a + b)) - 1.0);
  if (bayes == label) return 0.0;
  const double density = 1.0 / (dist.hi() - dist.lo());
  auto integrand = [&](double x) { return std::abs(2.0 * dist.p(x) - 1.0); };
  return density * boost::math::quadrature::gauss<double, 8>::integrate(integrand, a, b);
}

}  // namespace

double excess_zero_one(const PiecewiseRule& rule, const UnivariateDistribution& dist) {
  std::vector<double> breaks = dist.breakpoints();
  std::sort(breaks.begin(), breaks.end());

  const auto& cuts = rule.cuts();
  const auto& values = rule.values();
  double total = 0.0;
  for (std::size_t seg = 0; seg < values.size(); ++seg) {
    double a = seg == 0 ? dist.lo() : std::max(dist.lo(), cuts[seg - 1]);
    const double b = seg == cuts.size() ? dist.hi() : std::min(dist.hi(), cuts[seg]);
    if (!(b > a)) continue;
    for (double br : breaks) {
      if (br > a && br < b) {
        total += wrong_mass_piece(a, br, values[seg], dist);
        a = br;
      }
    }
    total += wrong_mass_piece(a, b, values[seg], dist);
  }
  return total;
}

WrongPairReport wrong_pairs(const SortedSample1D& s, const UnivariateDistribution& dist) {
  const auto interval = dist.wrong_pair_interval();
  if (!interval) {
    throw std::invalid_argument("wrong_pairs: distribution '" + dist.name() +
                                "' declares no interval with p_y away from {0, 1/2, 1}");
  }
  WrongPairReport rep;
  rep.interval = *interval;
  const double lo = interval->lo;
  const double hi = interval->hi;
  rep.bayes_label = sign_of(2.0 * dist.p(0.5 * (lo + hi)) - 1.0);

  constexpr int kGrid = 1024;
  rep.c1 = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= kGrid; ++g) {
    const double x = lo + (hi - lo) * g / kGrid;
    rep.c1 = std::min(rep.c1, std::abs(dist.p(x) - 0.5));
  }

  double covered = 0.0;
  double run_start = 0.0, run_end = -std::numeric_limits<double>::infinity();
  bool in_run = false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const bool inside = s.x[i] >= lo && s.x[i + 1] <= hi;
    if (inside && s.y[i] == -rep.bayes_label && s.y[i + 1] == -rep.bayes_label) {
      rep.pairs.emplace_back(i, i + 1);
      if (in_run && s.x[i] <= run_end) {
        run_end = s.x[i + 1];
      } else {
        if (in_run) covered += dist.mass(run_start, run_end);
        run_start = s.x[i];
        run_end = s.x[i + 1];
        in_run = true;
      }
    }
  }
  if (in_run) covered += dist.mass(run_start, run_end);
  rep.covered_mass = covered;
  return rep;
}

ComparisonTable excess_risk_comparison(const UnivariateDistribution& dist,
                                       const std::vector<std::size_t>& n_grid, std::size_t trials,
                                       std::uint64_t root_seed, unsigned threads) {
  ComparisonTable table;
  table.root_seed = root_seed;
  const bool has_interval = dist.wrong_pair_interval().has_value();
  const std::size_t jobs = n_grid.size() * trials;
  std::vector<std::array<ComparisonRow, 2>> results(jobs);

  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t n = n_grid[job / trials];
    const std::size_t trial = job % trials;
    const std::uint64_t seed = derive_seed(derive_seed(root_seed, stream::kTrial, n), stream::kTrial, trial);
    const SortedSample1D s = sort_sample(sample(dist, n, seed));
    const double covered = has_interval ? wrong_pairs(s, dist).covered_mass
                                        : std::numeric_limits<double>::quiet_NaN();
    const std::size_t k = default_k(n);
    results[job][0] = {n, trial, "1nn", 1, excess_zero_one(one_nn_rule(s), dist), covered};
    results[job][1] = {n, trial, "knn", k, excess_zero_one(knn_rule(s, k), dist), covered};
  }, threads);

  for (const auto& pair : results) {
    table.rows.push_back(pair[0]);
    table.rows.push_back(pair[1]);
  }
  for (std::size_t n : n_grid) {
    for (const char* rule : {"1nn", "knn"}) {
      std::vector<double> values;
      for (const auto& row : table.rows) {
        if (row.n == n && row.rule == rule) values.push_back(row.excess_z);
      }
      table.summary.push_back({n, rule, quartiles(values)});
    }
  }
  return table;
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n,trial,rule,excess_z,covered_mass\n";
  for (const auto& row : table.rows) {
    out << row.n << ',' << row.trial << ',' << row.rule << ',' << row.excess_z << ','
        << row.covered_mass << '\n';
  }
  return out.str();
}

nlohmann::json comparison_summary_json(const ComparisonTable& table) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : table.summary) {
    nlohmann::json c = cell.excess_z;
    c["n"] = cell.n;
    c["rule"] = cell.rule;
    cells.push_back(c);
  }
  return {{"root_seed", table.root_seed}, {"cells", cells}};
}

}  // namespace srl
