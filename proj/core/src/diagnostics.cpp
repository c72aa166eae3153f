#include "srl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "srl/parallel.hpp"
#include "srl/rng.hpp"
#include "srl/stats.hpp"

namespace srl {

bool binomial_verdict(double frequency, double nominal, std::size_t trials) {
  if (trials == 0) return true;
  const double slack = 3.0 * std::sqrt(nominal * (1.0 - nominal) / static_cast<double>(trials));
  return frequency <= nominal + slack;
}

void to_json(nlohmann::json& j, const LemmaCheckReport& r) {
  j = {{"lemma", r.lemma},
       {"trials", r.trials},
       {"failures", r.failures},
       {"failure_frequency", r.failure_frequency},
       {"nominal", r.nominal},
       {"max_statistic", r.max_statistic},
       {"bound", r.bound},
       {"verdict", r.passed ? "pass" : "fail"},
       {"extra", r.extra}};
}

LemmaCheckReport gaussian_row_count_check(std::size_t m, double tau, std::size_t trials,
                                          double delta, std::uint64_t seed, std::size_t d,
                                          unsigned threads) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("gauss-count: tau must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("gauss-count: delta must lie in (0, 1)");
  if (m == 0 || trials == 0 || d == 0) throw std::invalid_argument("gauss-count: m, trials, d must be positive");

  // Fixed unit x, drawn once from the probe stream.
  Rng xr(derive_seed(seed, stream::kProbe));
  Vector x(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = xr.gaussian();
  x /= x.norm();

  const double md = static_cast<double>(m);
  const double bound = md * tau + std::sqrt(8.0 * md * tau * std::log(1.0 / delta));

  std::vector<double> counts(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, stream::kTrial, t));
    std::size_t count = 0;
    for (std::size_t j = 0; j < m; ++j) {
      double dot = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) dot += rng.gaussian() * x[k];
      if (std::abs(dot) <= tau) ++count;
    }
    counts[t] = static_cast<double>(count);
  }, threads);

  LemmaCheckReport rep;
  rep.lemma = "gauss-count";
  rep.trials = trials;
  rep.nominal = 3.0 * delta;
  rep.bound = bound;
  double sum = 0.0, sum_sq = 0.0;
  for (double c : counts) {
    if (c > bound) ++rep.failures;
    rep.max_statistic = std::max(rep.max_statistic, c);
    sum += c;
    sum_sq += c * c;
  }
  const double tn = static_cast<double>(trials);
  rep.failure_frequency = static_cast<double>(rep.failures) / tn;
  rep.passed = binomial_verdict(rep.failure_frequency, rep.nominal, trials);
  const double mean = sum / tn;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - tn * mean * mean) / (tn - 1.0)) : 0.0;
  rep.extra = {{"m", m},
               {"tau", tau},
               {"delta", delta},
               {"seed", seed},
               {"mean_count", mean},
               {"mean_se", std::sqrt(var / tn)},
               {"expected_count", md * std::erf(tau / std::numbers::sqrt2)}};
  return rep;
}

FlipStats activation_flip_count(const Matrix& before, const Matrix& after, const Matrix& points,
                                double delta) {
  if (before.rows() != after.rows() || before.cols() != after.cols()) {
    throw std::invalid_argument("flip-count: weight shapes differ");
  }
  if (points.cols() != before.cols()) throw std::invalid_argument("flip-count: point dimension mismatch");
  FlipStats out;
  const std::size_t m = static_cast<std::size_t>(before.rows());
  const Eigen::Index n = points.rows();
  const auto block = static_cast<Eigen::Index>(detail::block_size(m));
  double total = 0.0;
  ColMatrix pb, pa;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    const auto xb = points.middleRows(begin, b).transpose();
    pb.noalias() = before * xb;
    pa.noalias() = after * xb;
    for (Eigen::Index k = 0; k < b; ++k) {
      const auto flips = static_cast<std::size_t>(
          ((pb.col(k).array() >= 0.0) != (pa.col(k).array() >= 0.0)).count());
      out.max_flips = std::max(out.max_flips, flips);
      total += static_cast<double>(flips);
    }
  }
  out.mean_flips = n > 0 ? total / static_cast<double>(n) : 0.0;
  out.max_fraction = static_cast<double>(out.max_flips) / static_cast<double>(m);
  out.radius = (after - before).norm();
  const double md = static_cast<double>(m);
  if (out.radius > 0.0) {
    out.r = std::cbrt(out.radius * out.radius / md);
    out.bound = out.r * md + std::sqrt(8.0 * out.r * md * std::log(1.0 / delta)) +
                out.radius * out.radius / (out.r * out.r);
  }
  out.within_bound = static_cast<double>(out.max_flips) <= out.bound;
  return out;
}

namespace {

Matrix sphere_points(std::size_t d, std::size_t resolution, std::uint64_t seed, std::string& mode) {
  if (d == 1) {
    mode = "grid";
    Matrix x(2, 1);
    x << -1.0, 1.0;
    return x;
  }
  if (d == 2) {
    mode = "grid";
    Matrix x(static_cast<Eigen::Index>(resolution), 2);
    for (std::size_t k = 0; k < resolution; ++k) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(resolution);
      x(static_cast<Eigen::Index>(k), 0) = std::cos(th);
      x(static_cast<Eigen::Index>(k), 1) = std::sin(th);
    }
    return x;
  }
  if (d == 3) {
    // Fibonacci lattice.
    mode = "grid";
    Matrix x(static_cast<Eigen::Index>(resolution), 3);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < resolution; ++k) {
      const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(resolution);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * static_cast<double>(k);
      x.row(static_cast<Eigen::Index>(k)) << r * std::cos(th), r * std::sin(th), z;
    }
    return x;
  }
  mode = "monte-carlo";
  constexpr Eigen::Index kDirections = 100000;
  Rng rng(derive_seed(seed, stream::kProbe));
  Matrix x(kDirections, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < kDirections; ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = rng.gaussian();
    x.row(i) /= x.row(i).norm();
  }
  return x;
}

}  // namespace

SphereGapReport sphere_linearization_gap(const Network& net, const Matrix& v,
                                         std::size_t grid_resolution, double delta,
                                         std::uint64_t seed) {
  if (v.rows() != net.init_weights().rows() || v.cols() != net.init_weights().cols()) {
    throw std::invalid_argument("sphere-gap: V shape mismatch");
  }
  if (grid_resolution < 1) throw std::invalid_argument("sphere-gap: grid resolution must be positive");
  SphereGapReport rep;
  const Matrix x = sphere_points(net.input_dim(), grid_resolution, seed, rep.mode);
  const Network at_v(net.rho(), net.signs(), v);
  const Vector exact = at_v.forward_batch(x);
  const Vector linear = FrozenFeatures::at_init(net).forward_batch(v, x);
  rep.sup_gap = (exact - linear).cwiseAbs().maxCoeff();
  rep.points = static_cast<std::size_t>(x.rows());
  rep.radius = (v - net.init_weights()).norm();
  const double m = static_cast<double>(net.width());
  const double d = static_cast<double>(net.input_dim());
  rep.bound = 25.0 * net.rho() * std::pow(rep.radius, 4.0 / 3.0) *
              std::sqrt(std::log(std::numbers::e * d * m / delta)) / std::pow(m, 1.0 / 6.0);
  return rep;
}

double risk_ratio(const Trajectory& traj, std::size_t probe_index, std::size_t i, std::size_t j) {
  if (i >= traj.steps.size() || j >= traj.steps.size()) {
    throw std::out_of_range("risk_ratio: step index out of range");
  }
  if (probe_index >= traj.probes.size()) throw std::out_of_range("risk_ratio: bad probe index");
  if (i == j) return 1.0;
  return traj.steps[i].probe_frozen_risk[probe_index] / traj.steps[j].probe_frozen_risk[probe_index];
}

RiskRatioReport risk_ratio_check(const Trajectory& traj, std::size_t probe_index, std::size_t m,
                                 double delta) {
  if (traj.steps.empty()) throw std::invalid_argument("risk-ratio: trajectory has no steps");
  if (probe_index >= traj.probes.size()) throw std::out_of_range("risk-ratio: bad probe index");
  RiskRatioReport rep;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const double r = traj.steps[i].probe_frozen_risk[probe_index];
    if (r < traj.steps[lo].probe_frozen_risk[probe_index]) lo = i;
    if (r > traj.steps[hi].probe_frozen_risk[probe_index]) hi = i;
  }
  rep.argmax_i = hi;
  rep.argmax_j = lo;
  rep.max_ratio = risk_ratio(traj, probe_index, hi, lo);
  rep.radius_b = std::sqrt(traj.steps.front().probe_dist_sq[probe_index]);
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    rep.radius_v = std::max(rep.radius_v, traj.records[i].dist_init);
  }
  rep.bound = std::exp(6.0 * traj.rho * (rep.radius_b + 2.0 * rep.radius_v) *
                       std::cbrt(rep.radius_v) * std::pow(std::log(std::numbers::e / delta), 0.25) /
                       std::pow(static_cast<double>(m), 1.0 / 6.0));
  rep.within_bound = rep.max_ratio <= rep.bound;
  return rep;
}

GenGapReport generalization_gap(const Network& net, const Matrix& v, const LabeledSample& train,
                                const PopulationEvaluator& eval, bool augment, double delta) {
  const FrozenFeatures features = FrozenFeatures::at_init(net);
  GenGapReport rep;
  rep.n = train.size();
  if (augment) {
    LabeledSample aug{augment_rows(train.points), train.labels, train.seed};
    rep.empirical = frozen_empirical_risk(features, v, aug);
  } else {
    rep.empirical = frozen_empirical_risk(features, v, train);
  }
  const Vector margins = features.forward_batch(v, augment ? augment_rows(eval.points) : eval.points);
  const PopulationRisk pop = population_risk(eval, margins);
  rep.population = pop.breakdown.logistic_risk;
  rep.se = pop.se;
  rep.gap = rep.population - rep.empirical;
  rep.radius = (v - net.init_weights()).norm();
  const double m = static_cast<double>(net.width());
  const double d = static_cast<double>(net.input_dim());
  rep.bound = 80.0 * net.rho() * rep.radius *
              std::pow(d * std::log(std::numbers::e * m * m * d * d * d / delta), 1.5) /
              std::sqrt(static_cast<double>(rep.n));
  return rep;
}

GenGapSweep generalization_sweep(const Network& net, const Matrix& v, const Distribution& dist,
                                 const PopulationEvaluator& eval, bool augment,
                                 const std::vector<std::size_t>& n_grid, std::size_t seeds,
                                 std::uint64_t root_seed, unsigned threads) {
  if (n_grid.size() < 2) throw std::invalid_argument("gen-gap sweep: need at least two n values");
  if (seeds == 0) throw std::invalid_argument("gen-gap sweep: need at least one seed");
  GenGapSweep out;
  out.n_grid = n_grid;
  out.cells.assign(n_grid.size(), std::vector<GenGapReport>(seeds));
  parallel_for(n_grid.size() * seeds, [&](std::size_t job) {
    const std::size_t cell = job / seeds;
    const std::size_t s = job % seeds;
    const std::uint64_t seed =
        derive_seed(derive_seed(root_seed, stream::kCell, n_grid[cell]), stream::kTrial, s);
    out.cells[cell][s] = generalization_gap(net, v, sample(dist, n_grid[cell], seed), eval, augment);
  }, threads);

  std::vector<double> log_n, log_gap;
  for (std::size_t c = 0; c < n_grid.size(); ++c) {
    std::vector<double> abs_gap;
    for (const auto& r : out.cells[c]) abs_gap.push_back(std::abs(r.gap));
    out.median_abs_gap.push_back(median(abs_gap));
    log_n.push_back(std::log(static_cast<double>(n_grid[c])));
    log_gap.push_back(std::log(out.median_abs_gap.back()));
  }
  out.slope = fit_slope(log_n, log_gap);
  return out;
}

}  // namespace srl
