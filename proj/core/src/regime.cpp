#include "srl/regime.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "srl/io.hpp"

namespace srl {

std::size_t ceil_tolerant(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("ceil_tolerant: non-finite value");
  const double c = std::ceil(x * (1.0 - 1e-12));
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

namespace {

// Clips a real-valued size at `cap`; returns {value, capped}.
std::pair<std::size_t, bool> capped_size(double x, std::size_t cap) {
  if (!(x <= static_cast<double>(cap))) return {cap, true};
  return {std::min(ceil_tolerant(x), cap), false};
}

void set_shared(RegimeConfig& cfg, double eps, const RegimeExtras& extras) {
  cfg.eps = eps;
  cfg.eps_gd = eps;
  cfg.t = ceil_tolerant(1.0 / (8.0 * eps));
  const auto [n, n_capped] = capped_size(1.0 / (eps * eps), extras.n_cap);
  cfg.n = n;
  cfg.n_capped = n_capped;
  cfg.R = extras.R;
  cfg.d = extras.d;
}

void set_width(RegimeConfig& cfg, double m_formula, const RegimeExtras& extras, bool tempered) {
  const auto [m, m_capped] = capped_size(m_formula, extras.m_cap);
  cfg.m = m;
  cfg.m_capped = m_capped;
  cfg.rho = tempered ? std::pow(static_cast<double>(m), -0.125) : 1.0;
  cfg.eta = 4.0 / (cfg.rho * cfg.rho);
}

}  // namespace

RegimeConfig derive_regime(const std::string& regime, double eps, const RegimeExtras& extras) {
  if (!(eps > 0.0 && eps <= 0.5)) throw std::invalid_argument("derive_regime: eps must lie in (0, 1/2]");
  if (!(extras.R > 0.0)) throw std::invalid_argument("derive_regime: R must be positive");
  RegimeConfig cfg;
  cfg.regime = regime;
  set_shared(cfg, eps, extras);
  if (regime == "easy") {
    set_width(cfg, std::pow(extras.R, 8.0), extras, false);
    cfg.R_gd = kInfinity;
  } else if (regime == "clairvoyant") {
    set_width(cfg, std::pow(eps, -8.0), extras, true);
    cfg.R_gd = extras.R / cfg.rho;
  } else if (regime == "worstcase") {
    set_width(cfg, std::pow(eps, -40.0 / 3.0), extras, true);
    cfg.R_gd = kInfinity;
  } else {
    throw std::invalid_argument("derive_regime: unknown regime '" + regime + "'");
  }
  return cfg;
}

RegimeConfig derive_consistency(std::size_t n, double xi, const RegimeExtras& extras) {
  if (n < 2) throw std::invalid_argument("derive_consistency: n must be >= 2");
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("derive_consistency: xi must lie in (0, 1)");
  RegimeConfig cfg;
  cfg.regime = "consistency";
  cfg.xi = xi;
  const double nd = static_cast<double>(n);
  cfg.n = std::min(n, extras.n_cap);
  cfg.n_capped = n > extras.n_cap;
  set_width(cfg, std::pow(nd, 40.0 / 3.0 * (1.0 - xi)), extras, true);
  cfg.eps_gd = std::pow(nd, xi - 1.0);
  cfg.eps = cfg.eps_gd;
  cfg.t = ceil_tolerant(std::pow(nd, 1.0 - xi) / 8.0);
  cfg.R_gd = kInfinity;
  cfg.R = extras.R;
  cfg.d = extras.d;
  return cfg;
}

TrainConfig train_config(const RegimeConfig& cfg) {
  TrainConfig tc;
  tc.eta = cfg.eta;
  tc.t_max = cfg.t;
  tc.eps_gd = cfg.eps_gd;
  tc.R_gd = cfg.R_gd;
  tc.seed = cfg.seed;
  return tc;
}

double effective_R(double rho, double norm_bound) { return std::max({4.0, rho, norm_bound}); }

BoundTerms compute_bound_terms(const RegimeConfig& cfg, double R, double ref_risk,
                               double emp_ref_risk, std::optional<double> bayes_risk) {
  if (!(R > 0.0)) throw std::invalid_argument("compute_bound_terms: R must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw std::invalid_argument("compute_bound_terms: delta must lie in (0, 1)");
  }
  if (!(cfg.rho > 0.0) || cfg.m == 0 || cfg.n == 0 || cfg.d == 0 || cfg.t == 0) {
    throw std::invalid_argument("compute_bound_terms: rho, m, n, d, t must be positive");
  }
  if (!(ref_risk >= 0.0)) throw std::invalid_argument("compute_bound_terms: ref_risk must be >= 0");

  constexpr double e = std::numbers::e;
  const double m = static_cast<double>(cfg.m);
  const double n = static_cast<double>(cfg.n);
  const double d = static_cast<double>(cfg.d);
  const double t = static_cast<double>(cfg.t);
  const double rho = cfg.rho;
  const double delta = cfg.delta;
  const double log_m2d3 = std::log(e * m * m * d * d * d / delta);

  BoundTerms b;
  b.R = R;
  b.delta = delta;
  b.ref_risk = ref_risk;
  b.emp_ref_risk = emp_ref_risk;
  b.tau_n = 80.0 * std::pow(d * log_m2d3, 1.5) / std::sqrt(n);
  b.tau_0 = 6.0 * rho * d * std::log(e * m * d * d / delta) +
            20.0 * R * std::sqrt(d * log_m2d3) / std::pow(m, 0.25);
  b.B = std::min(cfg.R_gd, 3.0 * R / rho + (4.0 * e / rho) * std::sqrt(t) *
                                               std::sqrt(std::exp(b.tau_0) * ref_risk + R * b.tau_n));
  b.tau_1 = 100.0 * rho * std::pow(b.B, 4.0 / 3.0) *
            std::sqrt(d * std::log(e * n * m * m * d * d * d / delta)) / std::pow(m, 1.0 / 6.0);

  b.k_bin = bayes_risk ? std::max(0.0, ref_risk - *bayes_risk) : ref_risk;
  b.reference_error = std::expm1(b.tau_1 + b.tau_0) * ref_risk;
  b.optimization_error = std::exp(b.tau_1) * R * R * cfg.eps_gd;
  b.generalization_error = std::exp(b.tau_1) * (rho * b.B + R) * b.tau_n;
  b.total = b.k_bin + b.reference_error + b.optimization_error + b.generalization_error;
  b.vacuous = !(b.total <= std::numbers::ln2);
  b.tau1_violation = b.tau_1 > 2.0;
  return b;
}

void to_json(nlohmann::json& j, const RegimeConfig& c) {
  j = {{"regime", c.regime},
       {"eps", c.eps},
       {"xi", c.xi},
       {"rho", c.rho},
       {"m", c.m},
       {"n", c.n},
       {"eta", c.eta},
       {"t", c.t},
       {"eps_gd", c.eps_gd},
       {"R_gd", real_to_json(c.R_gd)},
       {"R", c.R},
       {"delta", c.delta},
       {"m_capped", c.m_capped},
       {"n_capped", c.n_capped},
       {"augment", c.augment},
       {"d", c.d},
       {"seed", c.seed},
       {"seeds", c.seeds},
       {"distribution", c.distribution},
       {"distribution_params", c.distribution_params},
       {"reference", c.reference},
       {"mc_features", c.mc_features}};
}

void from_json(const nlohmann::json& j, RegimeConfig& c) {
  static const char* known[] = {"regime", "eps", "xi", "rho", "m", "n", "eta", "t", "eps_gd",
                                "R_gd", "R", "delta", "m_capped", "n_capped", "augment", "d",
                                "seed", "seeds", "distribution", "distribution_params",
                                "reference", "mc_features"};
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      throw std::invalid_argument("config: unknown field '" + item.key() + "'");
    }
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("regime", c.regime);
  get("eps", c.eps);
  get("xi", c.xi);
  get("rho", c.rho);
  get("m", c.m);
  get("n", c.n);
  get("eta", c.eta);
  get("t", c.t);
  get("eps_gd", c.eps_gd);
  if (j.contains("R_gd")) c.R_gd = real_from_json(j.at("R_gd"));
  get("R", c.R);
  get("delta", c.delta);
  get("m_capped", c.m_capped);
  get("n_capped", c.n_capped);
  get("augment", c.augment);
  get("d", c.d);
  get("seed", c.seed);
  get("seeds", c.seeds);
  get("distribution", c.distribution);
  if (j.contains("distribution_params")) c.distribution_params = j.at("distribution_params");
  if (j.contains("reference")) c.reference = j.at("reference");
  get("mc_features", c.mc_features);
}

void to_json(nlohmann::json& j, const BoundTerms& b) {
  j = {{"tau_n", b.tau_n},
       {"tau_1", b.tau_1},
       {"tau_0", b.tau_0},
       {"B", real_to_json(b.B)},
       {"R", b.R},
       {"delta", b.delta},
       {"ref_risk", b.ref_risk},
       {"emp_ref_risk", b.emp_ref_risk},
       {"k_bin", b.k_bin},
       {"reference_error", real_to_json(b.reference_error)},
       {"optimization_error", real_to_json(b.optimization_error)},
       {"generalization_error", real_to_json(b.generalization_error)},
       {"total", real_to_json(b.total)},
       {"vacuous", b.vacuous},
       {"tau1_violation", b.tau1_violation}};
}

}  // namespace srl
