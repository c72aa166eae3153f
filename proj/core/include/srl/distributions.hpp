#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/linalg.hpp"
#include "srl/metrics.hpp"
#include "srl/rng.hpp"
#include "srl/sample.hpp"

namespace srl {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Weighted point set with the true conditional probability attached to
// every node. Weights are nonnegative and sum to 1.
struct PopulationEvaluator {
  Matrix points;
  Vector weights;
  Vector p_y;
  std::string provenance;  // "gauss-legendre" or "monte-carlo"
  std::uint64_t seed = 0;  // Monte Carlo only

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
};

// Joint distribution over (x, y) with ||x|| <= 1 and known p_y(x).
class Distribution {
 public:
  virtual ~Distribution() = default;

  virtual std::string name() const = 0;
  virtual nlohmann::json params() const = 0;
  virtual std::size_t dim() const = 0;

  virtual void draw_point(Rng& rng, std::span<double> x) const = 0;
  // Pr[Y = +1 | x], clamped to [0, 1].
  virtual double cond_prob(std::span<const double> x) const = 0;

  // Population Bayes risks where a closed form is known.
  virtual std::optional<double> bayes_risk_closed_form() const { return std::nullopt; }
  virtual std::optional<double> bayes_zero_one_closed_form() const { return std::nullopt; }

  // Quadrature for univariate distributions, 10^5-point Monte Carlo
  // otherwise.
  virtual PopulationEvaluator default_evaluator(std::uint64_t seed = 0) const;
};

// Uniform marginal on [lo, hi] subset of [-1, 1].
class UnivariateDistribution : public Distribution {
 public:
  UnivariateDistribution(double lo, double hi);

  std::size_t dim() const override { return 1; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double cdf(double x) const;
  // mu_x([a, b])
  double mass(double a, double b) const { return cdf(b) - cdf(a); }

  virtual double p(double x) const = 0;
  // Discontinuities of p and crossings of 1/2 strictly inside (lo, hi).
  virtual std::vector<double> breakpoints() const { return {}; }
  // Interval on which p stays bounded away from {0, 1/2, 1}, if declared.
  virtual std::optional<Interval> wrong_pair_interval() const { return std::nullopt; }

  void draw_point(Rng& rng, std::span<double> x) const override;
  double cond_prob(std::span<const double> x) const override;
  PopulationEvaluator default_evaluator(std::uint64_t seed = 0) const override;

 protected:
  nlohmann::json support_json() const;
  // [max(lo,0) + (hi - max(lo,0)) / 2, hi] when hi > 0.
  std::optional<Interval> right_half_interval() const;

 private:
  double lo_;
  double hi_;
};

// (i) p_y(x) = sigmoid(c x).
class LogisticUnivariate final : public UnivariateDistribution {
 public:
  LogisticUnivariate(double c, double lo = -1.0, double hi = 1.0);
  std::string name() const override { return "logistic_1d"; }
  nlohmann::json params() const override;
  double p(double x) const override;
  std::vector<double> breakpoints() const override;
  std::optional<Interval> wrong_pair_interval() const override;
  std::optional<double> bayes_risk_closed_form() const override;
  std::optional<double> bayes_zero_one_closed_form() const override;
  double slope() const { return c_; }

 private:
  double c_;
};

// (ii) p_y(x) = 0.3 + 0.4 * 1[x > 0].
class StepUnivariate final : public UnivariateDistribution {
 public:
  StepUnivariate(double lo = -1.0, double hi = 1.0);
  std::string name() const override { return "step_1d"; }
  nlohmann::json params() const override { return support_json(); }
  double p(double x) const override;
  std::vector<double> breakpoints() const override;
  std::optional<Interval> wrong_pair_interval() const override;
  std::optional<double> bayes_risk_closed_form() const override;
  std::optional<double> bayes_zero_one_closed_form() const override;
};

// (ii, smoothed) p_y(x) = 0.3 + 0.4 * sigmoid(x / s).
class SmoothStepUnivariate final : public UnivariateDistribution {
 public:
  SmoothStepUnivariate(double s = 0.1, double lo = -1.0, double hi = 1.0);
  std::string name() const override { return "smooth_step_1d"; }
  nlohmann::json params() const override;
  double p(double x) const override;
  std::vector<double> breakpoints() const override;
  std::optional<Interval> wrong_pair_interval() const override;

 private:
  double s_;
};

// (iii) p_y(x) = p constant.
class ConstantUnivariate final : public UnivariateDistribution {
 public:
  ConstantUnivariate(double p, double lo = -1.0, double hi = 1.0);
  std::string name() const override { return "constant_1d"; }
  nlohmann::json params() const override;
  double p(double) const override { return p_; }
  std::optional<Interval> wrong_pair_interval() const override;
  std::optional<double> bayes_risk_closed_form() const override;
  std::optional<double> bayes_zero_one_closed_form() const override;

 private:
  double p_;
};

// (iv) x uniform on the spherical cap {||x|| = 1, x_1 >= h} in R^d (d >= 2)
// and p_y(x) = sigmoid(c x_2).
class CapLogistic final : public Distribution {
 public:
  CapLogistic(std::size_t d, double c, double h = 0.0);
  std::string name() const override { return "cap_logistic"; }
  nlohmann::json params() const override;
  std::size_t dim() const override { return d_; }
  void draw_point(Rng& rng, std::span<double> x) const override;
  double cond_prob(std::span<const double> x) const override;

 private:
  std::size_t d_;
  double c_;
  double h_;
};

struct CatalogEntry {
  std::string name;
  std::string description;
};

std::vector<CatalogEntry> builtin_distributions();

// Builds a catalog distribution; throws std::invalid_argument on an unknown
// name or bad parameters.
std::shared_ptr<const Distribution> make_distribution(const std::string& name,
                                                      const nlohmann::json& params = {});

// iid draws: for each example, the point coordinates, then one uniform u with
// y = +1 iff u < p_y(x).
LabeledSample sample(const Distribution& dist, std::size_t n, std::uint64_t seed);

// Composite Gauss-Legendre, 16 nodes per panel, `panels` equal panels refined
// at the distribution's breakpoints.
PopulationEvaluator quadrature_evaluator(const UnivariateDistribution& dist,
                                         std::size_t panels = 32);
PopulationEvaluator monte_carlo_evaluator(const Distribution& dist, std::size_t count,
                                          std::uint64_t seed);

struct PopulationRisk {
  RiskBreakdown breakdown;
  double se = 0.0;  // Monte Carlo standard error of logistic_risk; 0 for quadrature
  std::string provenance;
};

// `margins[k]` is the predictor's output at evaluator node k.
PopulationRisk population_risk(const PopulationEvaluator& eval, const Vector& margins);
PopulationRisk population_risk(const PopulationEvaluator& eval,
                               const std::function<double(std::span<const double>)>& predictor);

// Bayes (log-odds) predictor of a distribution.
double bayes_margin(double p);

}  // namespace srl
