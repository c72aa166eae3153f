#include "srl/metrics.hpp"

#include <cmath>
#include <string>

namespace srl {

CondProb::CondProb(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("CondProb outside [0,1]: " + std::to_string(p));
  }
}

double logistic_loss(double margin) {
  if (margin < -30.0) {
    return -margin + std::log1p(std::exp(margin));
  }
  return std::log1p(std::exp(-margin));
}

double logistic_loss_derivative(double margin) { return -sigmoid(-margin); }

double sigmoid(double r) {
  if (r >= 0.0) {
    return 1.0 / (1.0 + std::exp(-r));
  }
  const double e = std::exp(r);
  return e / (1.0 + e);
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

RatioBound multiplicative_ratio_bound(double a, double b) {
  if (!(a >= b)) {
    throw std::invalid_argument("multiplicative_ratio_bound requires a >= b");
  }
  return {logistic_loss(-a) / logistic_loss(-b), std::exp(a - b)};
}

namespace {

// p ln(p/q) with the 0 ln 0 = 0 convention; q > 0 assumed when p > 0.
double kl_term(double p, double q) {
  if (p == 0.0) return 0.0;
  return p * std::log(p / q);
}

}  // namespace

KlResult binary_kl(CondProb p_in, CondProb q_in) {
  const double p = p_in.value();
  const double q = q_in.value();
  if ((q == 0.0 && p > 0.0) || (q == 1.0 && p < 1.0)) {
    return {0.0, true};
  }
  const double kl = kl_term(p, q) + kl_term(1.0 - p, 1.0 - q);
  return {kl < 0.0 ? 0.0 : kl, false};
}

RiskBreakdown risk_breakdown(std::span<const RiskPoint> points) {
  double weight_sum = 0.0;
  for (const auto& pt : points) {
    if (!(pt.weight >= 0.0)) {
      throw std::invalid_argument("risk_breakdown: negative weight");
    }
    weight_sum += pt.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("risk_breakdown: weights sum to " +
                                std::to_string(weight_sum) + ", expected 1");
  }

  RiskBreakdown r;
  for (const auto& pt : points) {
    const double p = pt.p_y;
    const double f = pt.margin;
    const double w = pt.weight;
    const double phi = sigmoid(f);
    const double loss = p * logistic_loss(f) + (1.0 - p) * logistic_loss(-f);
    const double bayes = binary_entropy(p);
    r.logistic_risk += w * loss;
    r.bayes_risk += w * bayes;

    // Direct formula first; fall back to the loss form when sigmoid rounds
    // onto the boundary.
    const KlResult kl = binary_kl(CondProb(p), CondProb(phi));
    r.binary_kl += w * (kl.infinite ? loss - bayes : kl.value);

    r.l2_calibration_sq += w * (phi - p) * (phi - p);
    // Pr[Y != sgn(f)]
    r.zero_one_risk += w * (sign_of(f) > 0 ? 1.0 - p : p);
    r.bayes_zero_one += w * std::min(p, 1.0 - p);
  }
  r.excess_logistic = r.logistic_risk - r.bayes_risk;
  r.excess_zero_one = r.zero_one_risk - r.bayes_zero_one;
  return r;
}

void to_json(nlohmann::json& j, const RiskBreakdown& r) {
  j = nlohmann::json{{"logistic_risk", r.logistic_risk},
                     {"bayes_risk", r.bayes_risk},
                     {"excess_logistic", r.excess_logistic},
                     {"binary_kl", r.binary_kl},
                     {"l2_calibration_sq", r.l2_calibration_sq},
                     {"zero_one_risk", r.zero_one_risk},
                     {"bayes_zero_one", r.bayes_zero_one},
                     {"excess_zero_one", r.excess_zero_one}};
}

void from_json(const nlohmann::json& j, RiskBreakdown& r) {
  j.at("logistic_risk").get_to(r.logistic_risk);
  j.at("bayes_risk").get_to(r.bayes_risk);
  j.at("excess_logistic").get_to(r.excess_logistic);
  j.at("binary_kl").get_to(r.binary_kl);
  j.at("l2_calibration_sq").get_to(r.l2_calibration_sq);
  j.at("zero_one_risk").get_to(r.zero_one_risk);
  j.at("bayes_zero_one").get_to(r.bayes_zero_one);
  j.at("excess_zero_one").get_to(r.excess_zero_one);
}

}  // namespace srl
