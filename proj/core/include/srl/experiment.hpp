#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/distributions.hpp"
#include "srl/regime.hpp"
#include "srl/stats.hpp"
#include "srl/trainer.hpp"

namespace srl {

struct ExperimentReport {
  RegimeConfig config;
  // Substream seeds, all derived from config.seed.
  std::uint64_t data_seed = 0;
  std::uint64_t network_seed = 0;
  std::uint64_t evaluation_seed = 0;
  std::uint64_t reference_seed = 0;

  Trajectory trajectory;
  PopulationRisk population;  // of the selected iterate
  SmoothnessReport smoothness;
  RegretCertificate regret_init;                    // Z = W0
  std::optional<RegretCertificate> regret_reference;  // Z = sampled Ubar
  std::optional<double> ref_risk;                   // R(U_inf)
  std::optional<double> emp_ref_risk;               // hat R^(0)(Ubar)
  std::optional<BoundTerms> bounds;

  bool diverged() const { return trajectory.status == TrainStatus::diverged; }
  bool monitors_passed() const;
};

// sample -> augment -> init -> train (probes W0 and, with a reference, the
// sampled Ubar) -> population risk of the selected iterate -> monitors ->
// bound terms. Divergence is reported through the trajectory status; no
// population evaluation happens in that case.
ExperimentReport run_experiment(const RegimeConfig& cfg);

// Full report; trajectory records included when `with_trajectory` is set.
nlohmann::json report_json(const ExperimentReport& r, bool with_trajectory = true);

struct SweepCell {
  double value = 0.0;  // axis value
  RegimeConfig config;  // seed field holds the cell seed
  std::vector<ExperimentReport> runs;
  Quartiles excess_logistic;
  Quartiles l2_calibration_sq;
  Quartiles excess_zero_one;
  bool monitors_passed = true;
  std::size_t diverged = 0;
};

struct SweepResult {
  std::string axis;
  std::uint64_t root_seed = 0;
  std::vector<SweepCell> cells;
  bool excess_logistic_non_increasing = false;
  double excess_logistic_slope = 0.0;  // log median against log axis value
};

// Applies one axis value to a base config:
//   n   -> n (re-derived schedule for the consistency regime)
//   m   -> m; rho = m^-1/8 unless the base regime is easy or custom with rho 1
//   eps -> re-derived preset
RegimeConfig apply_axis(const RegimeConfig& base, const std::string& axis, double value);

// Cell c, seed s runs with derive_seed(derive_seed(root, cell stream, c),
// trial stream, s). Jobs run in parallel, each single-threaded; aggregation
// follows axis order. Throws std::invalid_argument on an unknown axis, fewer
// than two values or fewer than `min_seeds` seeds.
SweepResult sweep(const RegimeConfig& base, const std::string& axis,
                  const std::vector<double>& values, std::size_t seeds, std::uint64_t root_seed,
                  unsigned threads = 0, std::size_t min_seeds = 5);

std::string sweep_csv(const SweepResult& s);
nlohmann::json sweep_json(const SweepResult& s);

}  // namespace srl
