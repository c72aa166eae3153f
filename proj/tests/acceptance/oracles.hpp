#pragma once

#include <cstdint>
#include <string>

#include "srl/network.hpp"
#include "srl/regime.hpp"
#include "srl/sample.hpp"

namespace srl::acceptance {

// Easy-regime calibration setup: logistic p_y(x) = sigmoid(2x) on [-1, 1],
// matched affine teacher, rho = 1, m = n = 4096, t from the schedule.
RegimeConfig calibration_config(std::uint64_t seed);

struct OracleFit {
  std::size_t steps = 0;
  double emp_risk = 0.0;
  double radius_ratio = 0.0;  // rho ||V - W0|| / sqrt(n)
  double excess_logistic = 0.0;
  double l2_calibration_sq = 0.0;
  std::string stopped_on;
  Matrix v;
};

// Gradient descent on the frozen-feature risk V -> hat R^(0)(V) of a
// network on augmented 1D inputs, with V_0 = W0 and step eta. Runs in
// O((n + m) log m) per step by sweeping neuron thresholds over the sorted
// sample. Stops once rho ||V - W0|| / sqrt(n) reaches `stop_ratio` or after
// `max_steps`.
OracleFit frozen_oracle_1d(const Network& net, const LabeledSample& raw, double eta,
                           double stop_ratio, std::size_t max_steps);

// The calibration oracle on the exact data and initialization that
// run_experiment(calibration_config(seed)) uses, evaluated by quadrature.
OracleFit calibration_oracle(std::uint64_t seed);

inline constexpr double kOracleStopRatio = 0.5;
inline constexpr std::size_t kOracleMaxSteps = 400000;
inline constexpr std::size_t kCalibrationSeeds = 10;

}  // namespace srl::acceptance
