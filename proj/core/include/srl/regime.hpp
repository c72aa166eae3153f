#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "srl/trainer.hpp"

namespace srl {

inline constexpr std::size_t kDeskCap = std::size_t{1} << 16;

// Full parameter set of one run. `d` is the input dimension the network sees,
// i.e. after bias augmentation when `augment` is set.
struct RegimeConfig {
  std::string regime = "custom";  // easy | clairvoyant | worstcase | consistency | custom
  double eps = 0.0;
  double xi = 0.0;  // consistency only
  double rho = 1.0;
  std::size_t m = 1;
  std::size_t n = 1;
  double eta = 4.0;
  std::size_t t = 1;
  double eps_gd = 1.0;
  double R_gd = kInfinity;
  double R = 4.0;
  double delta = 0.05;
  bool m_capped = false;
  bool n_capped = false;
  bool augment = true;
  std::size_t d = 2;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::string distribution = "logistic_1d";
  nlohmann::json distribution_params = nlohmann::json::object();
  // {"kind": ...} as accepted by make_reference; null runs without a
  // reference probe.
  nlohmann::json reference = nullptr;
  std::size_t mc_features = 100000;
};

struct RegimeExtras {
  double R = 4.0;
  std::size_t d = 2;
  std::size_t m_cap = kDeskCap;
  std::size_t n_cap = kDeskCap;
};

// ceil with a 1e-12 relative allowance, so 1 / (8 * 0.0125) gives 10.
std::size_t ceil_tolerant(double x);

// Presets:
//   easy:        rho = 1, m = R^8, R_gd = inf
//   clairvoyant: m = eps^-8, rho = m^-1/8, R_gd = R / rho
//   worstcase:   m = eps^-40/3, rho = m^-1/8, R_gd = inf
// all with eps_gd = eps, t = 1 / (8 eps), n = 1 / eps^2, eta = 4 / rho^2.
// m and n are clipped at the caps (flagged); rho is then taken from the
// clipped m. Throws std::invalid_argument on an unknown regime or eps outside
// (0, 1/2].
RegimeConfig derive_regime(const std::string& regime, double eps, const RegimeExtras& extras = {});

// m = n^{(40/3)(1 - xi)}, rho = m^-1/8, eta = 4 / rho^2, eps_gd = n^{xi - 1},
// t = n^{1 - xi} / 8, R_gd = inf. Throws on n < 2 or xi outside (0, 1).
RegimeConfig derive_consistency(std::size_t n, double xi, const RegimeExtras& extras = {});

TrainConfig train_config(const RegimeConfig& cfg);

struct BoundTerms {
  double tau_n = 0.0;
  double tau_1 = 0.0;
  double tau_0 = 0.0;
  double B = 0.0;
  double R = 0.0;
  double delta = 0.05;
  double ref_risk = 0.0;
  double emp_ref_risk = 0.0;
  double k_bin = 0.0;
  double reference_error = 0.0;       // (e^{tau_1 + tau_0} - 1) ref_risk
  double optimization_error = 0.0;    // e^{tau_1} R^2 eps_gd
  double generalization_error = 0.0;  // e^{tau_1} (rho B + R) tau_n
  double total = 0.0;
  bool vacuous = false;         // total > ln 2
  bool tau1_violation = false;  // tau_1 > 2
};

// R = max{4, rho, sup ||U||}.
double effective_R(double rho, double norm_bound);

// tau_n = 80 (d ln(e m^2 d^3 / delta))^{3/2} / sqrt(n)
// tau_1 = 100 rho B^{4/3} sqrt(d ln(e n m^2 d^3 / delta)) / m^{1/6}
// tau_0 = 6 rho d ln(e m d^2 / delta) + 20 R sqrt(d ln(e m^2 d^3 / delta)) / m^{1/4}
// B     = min{R_gd, 3R/rho + (4e/rho) sqrt(t) sqrt(e^{tau_0} ref_risk + R tau_n)}
// K_bin = ref_risk - bayes_risk, or ref_risk when the Bayes risk is unknown.
BoundTerms compute_bound_terms(const RegimeConfig& cfg, double R, double ref_risk,
                               double emp_ref_risk, std::optional<double> bayes_risk = std::nullopt);

void to_json(nlohmann::json& j, const RegimeConfig& c);
void from_json(const nlohmann::json& j, RegimeConfig& c);
void to_json(nlohmann::json& j, const BoundTerms& b);

}  // namespace srl
