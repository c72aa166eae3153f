#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/distributions.hpp"
#include "srl/linalg.hpp"
#include "srl/network.hpp"
#include "srl/sample.hpp"
#include "srl/trainer.hpp"

namespace srl {

struct LemmaCheckReport {
  std::string lemma;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double failure_frequency = 0.0;
  double nominal = 0.0;  // nominal failure probability
  double max_statistic = 0.0;
  double bound = 0.0;
  bool passed = true;
  nlohmann::json extra = nlohmann::json::object();
};

// pass iff frequency <= nominal + 3 sqrt(nominal (1 - nominal) / trials)
bool binomial_verdict(double frequency, double nominal, std::size_t trials);

void to_json(nlohmann::json& j, const LemmaCheckReport& r);

// Counts rows with |<w_j, x>| <= tau ||x|| for fresh m x d Gaussian W and a
// fixed unit x, against m tau + sqrt(8 m tau ln(1/delta)) with nominal
// failure probability 3 delta. `extra` carries the mean count, its standard
// error, and the exact expectation m (2 Phi(tau) - 1).
LemmaCheckReport gaussian_row_count_check(std::size_t m, double tau, std::size_t trials,
                                          double delta = 0.05, std::uint64_t seed = 0,
                                          std::size_t d = 2, unsigned threads = 0);

struct FlipStats {
  std::size_t max_flips = 0;
  double mean_flips = 0.0;
  double max_fraction = 0.0;
  double radius = 0.0;  // R_V = ||after - before||
  double r = 0.0;       // R_V^{2/3} m^{-1/3}
  double bound = 0.0;   // r m + sqrt(8 r m ln(1/delta)) + R_V^2 / r^2
  bool within_bound = true;
};

// Per example, rows whose activation 1[<w_j, x> >= 0] differs between the
// two weight matrices.
FlipStats activation_flip_count(const Matrix& before, const Matrix& after, const Matrix& points,
                                double delta = 0.05);

struct SphereGapReport {
  double sup_gap = 0.0;  // lower bound on the true supremum
  std::size_t points = 0;
  std::string mode;  // "grid" or "monte-carlo"
  double radius = 0.0;  // ||V - W0||
  double bound = 0.0;   // 25 rho R_V^{4/3} sqrt(ln(e d m / delta)) / m^{1/6}
};

// sup over unit vectors x of |f(x; V) - f^(0)(x; V)|. Both sides are
// positively homogeneous in x, so the unit sphere suffices. Grid over the
// sphere for d <= 3 (`grid_resolution` points per angle), 10^5 Monte Carlo
// directions otherwise.
SphereGapReport sphere_linearization_gap(const Network& net, const Matrix& v,
                                         std::size_t grid_resolution = 2048, double delta = 0.05,
                                         std::uint64_t seed = 0);

struct RiskRatioReport {
  double max_ratio = 1.0;
  std::size_t argmax_i = 0;
  std::size_t argmax_j = 0;
  double radius_b = 0.0;  // ||B - W0||
  double radius_v = 0.0;  // max_i ||W_i - W0||
  double bound = 0.0;     // exp(6 rho (R_B + 2 R_V) R_V^{1/3} ln(e/delta)^{1/4} / m^{1/6})
  bool within_bound = true;
};

// R^(i)(B) / R^(j)(B) for recorded steps i, j, where B is probe
// `probe_index` of the trajectory.
double risk_ratio(const Trajectory& traj, std::size_t probe_index, std::size_t i, std::size_t j);

// Max over all pairs of recorded steps. Throws std::invalid_argument when the
// trajectory has no steps and std::out_of_range on a bad probe index.
RiskRatioReport risk_ratio_check(const Trajectory& traj, std::size_t probe_index, std::size_t m,
                                 double delta = 0.05);

struct GenGapReport {
  std::size_t n = 0;
  double population = 0.0;  // R^(0)(V)
  double empirical = 0.0;   // hat R^(0)(V)
  double gap = 0.0;         // population - empirical
  double se = 0.0;          // evaluator standard error; 0 for quadrature
  double radius = 0.0;      // ||V - W0||
  double bound = 0.0;       // 80 rho R_V (d ln(e m^2 d^3 / delta))^{3/2} / sqrt(n)
};

// Frozen features at the network's initialization. `augment` maps inputs
// through (x, 1)/sqrt(2) for both the sample and the evaluator.
GenGapReport generalization_gap(const Network& net, const Matrix& v, const LabeledSample& train,
                                const PopulationEvaluator& eval, bool augment,
                                double delta = 0.05);

struct GenGapSweep {
  std::vector<std::size_t> n_grid;
  std::vector<double> median_abs_gap;
  std::vector<std::vector<GenGapReport>> cells;  // [n][seed]
  double slope = 0.0;                            // log |gap| against log n
};

// Fresh training samples for every (n, seed) from
// derive_seed(derive_seed(root, cell stream, n), trial stream, seed); the
// network, V and evaluator stay fixed.
GenGapSweep generalization_sweep(const Network& net, const Matrix& v, const Distribution& dist,
                                 const PopulationEvaluator& eval, bool augment,
                                 const std::vector<std::size_t>& n_grid, std::size_t seeds,
                                 std::uint64_t root_seed, unsigned threads = 0);

}  // namespace srl
