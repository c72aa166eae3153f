#pragma once

#include <span>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace srl {

// Probability in [0, 1]. Construction outside the range throws.
class CondProb {
 public:
  explicit CondProb(double p);
  double value() const { return p_; }

 private:
  double p_;
};

/// ln(1 + e^{-margin}), stable for |margin| up to 1e4 and beyond.
double logistic_loss(double margin);

/// Derivative of the logistic loss: -sigmoid(-margin).
double logistic_loss_derivative(double margin);

double sigmoid(double r);

// Binary entropy in nats with 0 ln 0 = 0; equals the pointwise Bayes
// logistic risk for conditional probability p.
double binary_entropy(double p);

// sgn with sgn(0) = +1.
inline int sign_of(double r) { return r >= 0.0 ? 1 : -1; }

struct RatioBound {
  double ratio;  // loss(-a) / loss(-b)
  double bound;  // e^{a-b}
};

// Multiplicative property of the logistic loss: for a >= b the ratio never
// exceeds the bound. Throws std::invalid_argument when a < b.
RatioBound multiplicative_ratio_bound(double a, double b);

// Result of a binary KL evaluation. `infinite` is set when q sits on {0, 1}
// and p disagrees; `value` is then meaningless.
struct KlResult {
  double value = 0.0;
  bool infinite = false;
};

KlResult binary_kl(CondProb p, CondProb q);

struct RiskPoint {
  double margin;  // f(x)
  double p_y;     // Pr[Y = +1 | x]
  double weight;  // quadrature or Monte Carlo weight
};

// Population-level risk summary over a weighted point set.
//
//   excess_logistic   = logistic_risk - bayes_risk
//   binary_kl         = sum_k w_k KL(p_y(x_k), sigmoid(f(x_k)))
//   l2_calibration_sq = sum_k w_k (sigmoid(f(x_k)) - p_y(x_k))^2
//   excess_zero_one   = zero_one_risk - bayes_zero_one
//
// and 0.5 * excess_zero_one^2 <= 2 * l2_calibration_sq <= binary_kl.
struct RiskBreakdown {
  double logistic_risk = 0.0;
  double bayes_risk = 0.0;
  double excess_logistic = 0.0;
  double binary_kl = 0.0;
  double l2_calibration_sq = 0.0;
  double zero_one_risk = 0.0;
  double bayes_zero_one = 0.0;
  double excess_zero_one = 0.0;
};

// Throws std::invalid_argument when the weights do not sum to 1 within 1e-9
// or when any weight is negative.
RiskBreakdown risk_breakdown(std::span<const RiskPoint> points);

void to_json(nlohmann::json& j, const RiskBreakdown& r);
void from_json(const nlohmann::json& j, RiskBreakdown& r);

}  // namespace srl
