#include <cmath>
#include <sstream>
#include <stdexcept>

#include "srl/experiment.hpp"
#include "srl/io.hpp"
#include "srl/parallel.hpp"
#include "srl/rng.hpp"

namespace srl {

namespace {

// Keeps everything that is not a schedule quantity.
RegimeConfig with_context(RegimeConfig derived, const RegimeConfig& base) {
  derived.delta = base.delta;
  derived.augment = base.augment;
  derived.seed = base.seed;
  derived.seeds = base.seeds;
  derived.distribution = base.distribution;
  derived.distribution_params = base.distribution_params;
  derived.reference = base.reference;
  derived.mc_features = base.mc_features;
  return derived;
}

std::size_t as_size(double value, const std::string& axis) {
  if (!(value >= 1.0) || std::floor(value) != value) {
    throw std::invalid_argument("sweep: axis " + axis + " needs positive integer values");
  }
  return static_cast<std::size_t>(value);
}

bool tempered(const std::string& regime) {
  return regime == "clairvoyant" || regime == "worstcase" || regime == "consistency";
}

}  // namespace

RegimeConfig apply_axis(const RegimeConfig& base, const std::string& axis, double value) {
  const RegimeExtras extras{base.R, base.d};
  if (axis == "n") {
    const std::size_t n = as_size(value, axis);
    if (base.regime == "consistency") return with_context(derive_consistency(n, base.xi, extras), base);
    RegimeConfig cfg = base;
    cfg.n = n;
    return cfg;
  }
  if (axis == "m") {
    RegimeConfig cfg = base;
    cfg.m = as_size(value, axis);
    if (tempered(base.regime)) {
      cfg.rho = std::pow(static_cast<double>(cfg.m), -0.125);
      cfg.eta = 4.0 / (cfg.rho * cfg.rho);
      if (base.regime == "clairvoyant") cfg.R_gd = cfg.R / cfg.rho;
    }
    return cfg;
  }
  if (axis == "eps") {
    if (base.regime == "consistency" || base.regime == "custom") {
      throw std::invalid_argument("sweep: eps axis needs an easy, clairvoyant or worstcase base");
    }
    return with_context(derive_regime(base.regime, value, extras), base);
  }
  throw std::invalid_argument("sweep: unknown axis '" + axis + "' (expected n, m or eps)");
}

SweepResult sweep(const RegimeConfig& base, const std::string& axis,
                  const std::vector<double>& values, std::size_t seeds, std::uint64_t root_seed,
                  unsigned threads, std::size_t min_seeds) {
  if (values.size() < 2) throw std::invalid_argument("sweep: need at least two axis values");
  if (seeds < min_seeds || seeds == 0) {
    throw std::invalid_argument("sweep: need at least " + std::to_string(min_seeds) + " seeds");
  }
  SweepResult out;
  out.axis = axis;
  out.root_seed = root_seed;
  for (std::size_t c = 0; c < values.size(); ++c) {
    SweepCell cell;
    cell.value = values[c];
    cell.config = apply_axis(base, axis, values[c]);
    cell.config.seed = derive_seed(root_seed, stream::kCell, c);
    cell.config.seeds = seeds;
    cell.runs.resize(seeds);
    out.cells.push_back(std::move(cell));
  }

  parallel_for(values.size() * seeds, [&](std::size_t job) {
    SweepCell& cell = out.cells[job / seeds];
    const std::size_t s = job % seeds;
    RegimeConfig cfg = cell.config;
    cfg.seed = derive_seed(cell.config.seed, stream::kTrial, s);
    cfg.seeds = 1;
    cell.runs[s] = run_experiment(cfg);
  }, threads);

  std::vector<double> log_value, log_median;
  std::vector<double> medians;
  for (auto& cell : out.cells) {
    std::vector<double> el, cal, z;
    for (const auto& run : cell.runs) {
      cell.monitors_passed = cell.monitors_passed && run.monitors_passed();
      if (run.diverged()) {
        ++cell.diverged;
        continue;
      }
      el.push_back(run.population.breakdown.excess_logistic);
      cal.push_back(run.population.breakdown.l2_calibration_sq);
      z.push_back(run.population.breakdown.excess_zero_one);
    }
    if (el.empty()) throw std::runtime_error("sweep: every run in a cell diverged");
    cell.excess_logistic = quartiles(el);
    cell.l2_calibration_sq = quartiles(cal);
    cell.excess_zero_one = quartiles(z);
    medians.push_back(cell.excess_logistic.median);
    log_value.push_back(std::log(cell.value));
    log_median.push_back(std::log(std::max(cell.excess_logistic.median, 1e-300)));
  }
  out.excess_logistic_non_increasing = is_non_increasing(medians);
  out.excess_logistic_slope = fit_slope(log_value, log_median);
  return out;
}

std::string sweep_csv(const SweepResult& s) {
  std::ostringstream out;
  out << s.axis << ",seed_index,seed,status,excess_logistic,l2_calibration_sq,excess_zero_one,monitors\n";
  for (const auto& cell : s.cells) {
    for (std::size_t i = 0; i < cell.runs.size(); ++i) {
      const auto& run = cell.runs[i];
      const auto& b = run.population.breakdown;
      out << format_real(cell.value) << ',' << i << ',' << run.config.seed << ','
          << (run.diverged() ? "diverged" : "ok") << ',' << format_real(b.excess_logistic) << ','
          << format_real(b.l2_calibration_sq) << ',' << format_real(b.excess_zero_one) << ','
          << (run.monitors_passed() ? "pass" : "fail") << '\n';
    }
  }
  return out.str();
}

nlohmann::json sweep_json(const SweepResult& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : s.cells) {
    cells.push_back({{"value", cell.value},
                     {"config", cell.config},
                     {"excess_logistic", cell.excess_logistic},
                     {"l2_calibration_sq", cell.l2_calibration_sq},
                     {"excess_zero_one", cell.excess_zero_one},
                     {"monitors_passed", cell.monitors_passed},
                     {"diverged", cell.diverged}});
  }
  return {{"axis", s.axis},
          {"root_seed", s.root_seed},
          {"cells", cells},
          {"excess_logistic_non_increasing", s.excess_logistic_non_increasing},
          {"excess_logistic_slope", s.excess_logistic_slope}};
}

}  // namespace srl
