#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srl/linalg.hpp"
#include "srl/network.hpp"
#include "srl/sample.hpp"

namespace srl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Empirical risks above this abort training.
inline constexpr double kDivergenceRisk = 1e6;

struct TrainConfig {
  double eta = 4.0;
  std::size_t t_max = 1;
  double eps_gd = 1.0;
  double R_gd = kInfinity;  // early stopping radius; infinity disables it
  std::uint64_t seed = 0;
  // When set, eta <= 4 / rho^2 is required and the smoothness / regret
  // verdicts are meaningful.
  bool monitors = true;
};

// Throws std::invalid_argument on eta <= 0, t_max == 0, eps_gd <= 0,
// R_gd < 0, or (monitors && eta > 4 / rho^2).
void validate(const TrainConfig& cfg, double rho);

// Mean logistic loss of y * f(x) over the sample. Throws on an empty sample.
double empirical_risk(const Network& net, const LabeledSample& data);

// Same, for the frozen-feature predictor x -> f^(i)(x; V).
double frozen_empirical_risk(const FrozenFeatures& features, const Matrix& v,
                             const LabeledSample& data);

// Full-batch gradient of the empirical risk at the current weights.
Matrix risk_gradient(const Network& net, const LabeledSample& data, double* risk = nullptr);

// W <- W - eta * grad R(W). Returns the gradient that was applied.
Matrix gd_step(Network& net, const LabeledSample& data, double eta);

struct IterateRecord {
  std::size_t iter = 0;
  double emp_risk = 0.0;
  double dist_init = 0.0;  // ||W_i - W_0||
  double grad_norm = 0.0;  // ||grad R(W_i)||
  // [R^(i)(W_i) - R^(i)(W_{i+1})] - (eta/2) ||grad R(W_i)||^2; NaN on the
  // final iterate.
  double smooth_resid = std::numeric_limits<double>::quiet_NaN();
  bool selected = false;
};

// Frozen-feature quantities for step i -> i+1, all with features at W_i.
struct StepMonitor {
  double frozen_current = 0.0;  // R^(i)(W_i) (= R(W_i))
  double frozen_next = 0.0;     // R^(i)(W_{i+1})
  double grad_norm_sq = 0.0;
  std::vector<double> probe_frozen_risk;  // R^(i)(Z_k)
  std::vector<double> probe_dist_sq;      // ||W_i - Z_k||^2
};

enum class TrainStatus { ok, diverged };

struct Trajectory {
  double eta = 0.0;
  double rho = 0.0;
  double R_gd = kInfinity;
  std::vector<IterateRecord> records;      // iterates 0..t
  std::vector<StepMonitor> steps;          // steps 0..t-1
  std::vector<double> final_probe_dist_sq;  // ||W_t - Z_k||^2
  std::vector<Matrix> probes;
  std::optional<std::size_t> selected;  // empty when no iterate is within R_gd
  Matrix selected_weights;
  TrainStatus status = TrainStatus::ok;
  std::string message;
};

// Runs t_max steps of constant-step gradient descent and selects
//   W_{<=t} = argmin { R(W_i) : i <= t, ||W_i - W_0|| <= R_gd }
// (earliest index on ties). Probe matrices Z_k get their frozen risks
// recorded at every iterate for the regret certificate. On divergence the
// partial trajectory is returned with status `diverged`.
Trajectory train(Network& net, const LabeledSample& data, const TrainConfig& cfg,
                 std::span<const Matrix> probes = {});

struct SmoothnessReport {
  std::vector<double> residuals;
  std::vector<double> descent;  // R^(i)(W_i) - R^(i)(W_{i+1})
  double worst_scaled = 0.0;    // min_i residual_i / max(1, R^(i)(W_i))
  bool passed = true;           // every residual >= -1e-9 * max(1, R^(i)(W_i))
  bool descent_holds = true;    // every descent >= -1e-9 * max(1, R^(i)(W_i))
};

SmoothnessReport monitor_smoothness(const Trajectory& traj);

struct RegretCertificate {
  Matrix reference;
  double lhs = 0.0;  // ||W_t - Z||^2 + 2 eta sum_{i<t} R^(i)(W_{i+1})
  double rhs = 0.0;  // ||W_0 - Z||^2 + 2 eta sum_{i<t} R^(i)(Z)
  std::vector<double> frozen_next;       // R^(i)(W_{i+1})
  std::vector<double> frozen_reference;  // R^(i)(Z)
  // max over prefixes t' <= t of (lhs_t' - rhs_t') / max(1, rhs_t')
  double worst_scaled_slack = 0.0;
  bool holds = true;  // every prefix within 1e-8 * max(1, rhs)
};

// Certificate for probe k of the trajectory. Throws std::out_of_range on a
// bad probe index.
RegretCertificate regret_certificate(const Trajectory& traj, std::size_t probe_index);

// Gradient descent on the convex frozen-feature risk V -> hat R^(0)(V), with
// features at the network's initialization and V_0 = W0.
struct FrozenFitConfig {
  double eta = 4.0;
  std::size_t max_steps = 1000;
  // Stop once rho ||V - W0|| / sqrt(n) reaches this value.
  double stop_norm_ratio = kInfinity;
  // Stop once ||grad|| falls below this value.
  double grad_tol = 0.0;
};

struct FrozenFit {
  Matrix v;
  std::size_t steps = 0;
  double emp_risk = 0.0;
  double grad_norm = 0.0;
  double radius = 0.0;  // rho ||V - W0||
  std::string stopped_on;  // "max_steps", "norm_ratio" or "grad_tol"
};

FrozenFit fit_frozen(const Network& net, const LabeledSample& data, const FrozenFitConfig& cfg);

}  // namespace srl
