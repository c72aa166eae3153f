#include "srl/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace srl {

namespace {

constexpr double kHalfLo = 0.3;
constexpr double kHalfHi = 0.7;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

PopulationEvaluator Distribution::default_evaluator(std::uint64_t seed) const {
  return monte_carlo_evaluator(*this, 100000, seed);
}

UnivariateDistribution::UnivariateDistribution(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo >= -1.0 && hi <= 1.0 && lo < hi)) {
    throw std::invalid_argument("univariate support must satisfy -1 <= lo < hi <= 1");
  }
}

double UnivariateDistribution::cdf(double x) const {
  return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0);
}

void UnivariateDistribution::draw_point(Rng& rng, std::span<double> x) const {
  x[0] = rng.uniform(lo_, hi_);
}

double UnivariateDistribution::cond_prob(std::span<const double> x) const {
  return clamp01(p(x[0]));
}

PopulationEvaluator UnivariateDistribution::default_evaluator(std::uint64_t) const {
  return quadrature_evaluator(*this);
}

nlohmann::json UnivariateDistribution::support_json() const {
  return {{"lo", lo_}, {"hi", hi_}};
}

std::optional<Interval> UnivariateDistribution::right_half_interval() const {
  if (!(hi_ > 0.0)) return std::nullopt;
  const double left = std::max(lo_, 0.0);
  return Interval{left + 0.5 * (hi_ - left), hi_};
}

LogisticUnivariate::LogisticUnivariate(double c, double lo, double hi)
    : UnivariateDistribution(lo, hi), c_(c) {}

nlohmann::json LogisticUnivariate::params() const {
  auto j = support_json();
  j["c"] = c_;
  return j;
}

double LogisticUnivariate::p(double x) const { return sigmoid(c_ * x); }

std::vector<double> LogisticUnivariate::breakpoints() const {
  if (c_ != 0.0 && lo() < 0.0 && hi() > 0.0) return {0.0};
  return {};
}

std::optional<Interval> LogisticUnivariate::wrong_pair_interval() const {
  if (c_ == 0.0) return std::nullopt;
  return right_half_interval();
}

std::optional<double> LogisticUnivariate::bayes_risk_closed_form() const {
  if (c_ == 0.0) return std::log(2.0);
  return std::nullopt;
}

std::optional<double> LogisticUnivariate::bayes_zero_one_closed_form() const {
  if (c_ == 0.0) return 0.5;
  return std::nullopt;
}

StepUnivariate::StepUnivariate(double lo, double hi) : UnivariateDistribution(lo, hi) {}

double StepUnivariate::p(double x) const { return x > 0.0 ? kHalfHi : kHalfLo; }

std::vector<double> StepUnivariate::breakpoints() const {
  if (lo() < 0.0 && hi() > 0.0) return {0.0};
  return {};
}

std::optional<Interval> StepUnivariate::wrong_pair_interval() const {
  return right_half_interval();
}

std::optional<double> StepUnivariate::bayes_risk_closed_form() const {
  return binary_entropy(kHalfLo);
}

std::optional<double> StepUnivariate::bayes_zero_one_closed_form() const { return kHalfLo; }

SmoothStepUnivariate::SmoothStepUnivariate(double s, double lo, double hi)
    : UnivariateDistribution(lo, hi), s_(s) {
  if (!(s > 0.0)) throw std::invalid_argument("smooth_step_1d: s must be positive");
}

nlohmann::json SmoothStepUnivariate::params() const {
  auto j = support_json();
  j["s"] = s_;
  return j;
}

double SmoothStepUnivariate::p(double x) const {
  return kHalfLo + (kHalfHi - kHalfLo) * sigmoid(x / s_);
}

std::vector<double> SmoothStepUnivariate::breakpoints() const {
  if (lo() < 0.0 && hi() > 0.0) return {0.0};
  return {};
}

std::optional<Interval> SmoothStepUnivariate::wrong_pair_interval() const {
  return right_half_interval();
}

ConstantUnivariate::ConstantUnivariate(double p, double lo, double hi)
    : UnivariateDistribution(lo, hi), p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("constant_1d: p outside [0,1]");
}

nlohmann::json ConstantUnivariate::params() const {
  auto j = support_json();
  j["p"] = p_;
  return j;
}

std::optional<Interval> ConstantUnivariate::wrong_pair_interval() const {
  if (p_ == 0.0 || p_ == 0.5 || p_ == 1.0) return std::nullopt;
  return Interval{lo(), hi()};
}

std::optional<double> ConstantUnivariate::bayes_risk_closed_form() const {
  return binary_entropy(p_);
}

std::optional<double> ConstantUnivariate::bayes_zero_one_closed_form() const {
  return std::min(p_, 1.0 - p_);
}

CapLogistic::CapLogistic(std::size_t d, double c, double h) : d_(d), c_(c), h_(h) {
  if (d < 2) throw std::invalid_argument("cap_logistic: d must be >= 2");
  if (!(h >= -1.0 && h <= 0.5)) throw std::invalid_argument("cap_logistic: h must be in [-1, 0.5]");
}

nlohmann::json CapLogistic::params() const { return {{"d", d_}, {"c", c_}, {"h", h_}}; }

void CapLogistic::draw_point(Rng& rng, std::span<double> x) const {
  for (;;) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d_; ++k) {
      x[k] = rng.gaussian();
      sq += x[k] * x[k];
    }
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t k = 0; k < d_; ++k) x[k] *= inv;
    if (x[0] >= h_) return;
  }
}

double CapLogistic::cond_prob(std::span<const double> x) const {
  return clamp01(sigmoid(c_ * x[1]));
}

std::vector<CatalogEntry> builtin_distributions() {
  return {
      {"logistic_1d", "uniform on [lo,hi], p_y(x) = sigmoid(c x); params c, lo, hi"},
      {"step_1d", "uniform on [lo,hi], p_y(x) = 0.3 + 0.4 1[x > 0]; params lo, hi"},
      {"smooth_step_1d", "uniform on [lo,hi], p_y(x) = 0.3 + 0.4 sigmoid(x / s); params s, lo, hi"},
      {"constant_1d", "uniform on [lo,hi], p_y(x) = p; params p, lo, hi"},
      {"cap_logistic", "uniform on the sphere cap x_1 >= h in R^d, p_y(x) = sigmoid(c x_2); params d, c, h"},
  };
}

std::shared_ptr<const Distribution> make_distribution(const std::string& name,
                                                      const nlohmann::json& params) {
  const nlohmann::json& j = params.is_null() ? nlohmann::json::object() : params;
  const double lo = j.value("lo", -1.0);
  const double hi = j.value("hi", 1.0);
  if (name == "logistic_1d") return std::make_shared<LogisticUnivariate>(j.value("c", 2.0), lo, hi);
  if (name == "step_1d") return std::make_shared<StepUnivariate>(lo, hi);
  if (name == "smooth_step_1d") {
    return std::make_shared<SmoothStepUnivariate>(j.value("s", 0.1), lo, hi);
  }
  if (name == "constant_1d") return std::make_shared<ConstantUnivariate>(j.value("p", 0.75), lo, hi);
  if (name == "cap_logistic") {
    return std::make_shared<CapLogistic>(j.value("d", std::size_t{3}), j.value("c", 2.0),
                                         j.value("h", 0.0));
  }
  throw std::invalid_argument("unknown distribution: " + name);
}

LabeledSample sample(const Distribution& dist, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  LabeledSample out;
  out.seed = seed;
  out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dist.dim()));
  out.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
    std::span<double> x(out.points.row(i).data(), dist.dim());
    dist.draw_point(rng, x);
    const double p = dist.cond_prob(x);
    out.labels[i] = rng.uniform() < p ? 1.0 : -1.0;
  }
  return out;
}

PopulationEvaluator quadrature_evaluator(const UnivariateDistribution& dist, std::size_t panels) {
  using Rule = boost::math::quadrature::gauss<double, 16>;
  if (panels < 1) throw std::invalid_argument("quadrature_evaluator: panels must be >= 1");

  std::vector<double> edges;
  for (std::size_t k = 0; k <= panels; ++k) {
    edges.push_back(dist.lo() + (dist.hi() - dist.lo()) * static_cast<double>(k) /
                                    static_cast<double>(panels));
  }
  for (double b : dist.breakpoints()) {
    if (b > dist.lo() && b < dist.hi()) edges.push_back(b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              edges.end());

  // Nodes of the 16-point rule on [-1, 1]: abscissa() lists the 8 positive ones.
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  std::vector<std::pair<double, double>> unit;
  for (std::size_t k = 0; k < abscissa.size(); ++k) {
    unit.emplace_back(-abscissa[k], weights[k]);
    if (abscissa[k] != 0.0) unit.emplace_back(abscissa[k], weights[k]);
  }
  std::sort(unit.begin(), unit.end());

  const double density = 1.0 / (dist.hi() - dist.lo());
  std::vector<double> xs, ws;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double half = 0.5 * (edges[e + 1] - edges[e]);
    const double mid = 0.5 * (edges[e + 1] + edges[e]);
    for (const auto& [node, weight] : unit) {
      xs.push_back(mid + half * node);
      ws.push_back(half * weight * density);
    }
  }

  PopulationEvaluator eval;
  eval.provenance = "gauss-legendre";
  const auto count = static_cast<Eigen::Index>(xs.size());
  eval.points.resize(count, 1);
  eval.weights.resize(count);
  eval.p_y.resize(count);
  double total = 0.0;
  for (double w : ws) total += w;
  for (Eigen::Index k = 0; k < count; ++k) {
    eval.points(k, 0) = xs[static_cast<std::size_t>(k)];
    // Renormalize away the last-ulp drift of the rule weights.
    eval.weights[k] = ws[static_cast<std::size_t>(k)] / total;
    eval.p_y[k] = dist.cond_prob(std::span<const double>(&xs[static_cast<std::size_t>(k)], 1));
  }
  return eval;
}

PopulationEvaluator monte_carlo_evaluator(const Distribution& dist, std::size_t count,
                                          std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("monte_carlo_evaluator: count must be >= 1");
  Rng rng(seed);
  PopulationEvaluator eval;
  eval.provenance = "monte-carlo";
  eval.seed = seed;
  const auto n = static_cast<Eigen::Index>(count);
  eval.points.resize(n, static_cast<Eigen::Index>(dist.dim()));
  eval.weights = Vector::Constant(n, 1.0 / static_cast<double>(count));
  eval.p_y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::span<double> x(eval.points.row(i).data(), dist.dim());
    dist.draw_point(rng, x);
    eval.p_y[i] = dist.cond_prob(x);
  }
  return eval;
}

PopulationRisk population_risk(const PopulationEvaluator& eval, const Vector& margins) {
  if (static_cast<std::size_t>(margins.size()) != eval.size()) {
    throw std::invalid_argument("population_risk: margin count does not match evaluator");
  }
  std::vector<RiskPoint> pts(eval.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    pts[k] = {margins[i], eval.p_y[i], eval.weights[i]};
  }
  PopulationRisk out;
  out.breakdown = risk_breakdown(pts);
  out.provenance = eval.provenance;
  if (eval.provenance == "monte-carlo" && pts.size() > 1) {
    double mean = 0.0, sq = 0.0;
    for (const auto& pt : pts) {
      const double v = pt.p_y * logistic_loss(pt.margin) + (1.0 - pt.p_y) * logistic_loss(-pt.margin);
      mean += v;
      sq += v * v;
    }
    const double n = static_cast<double>(pts.size());
    mean /= n;
    const double var = std::max(0.0, sq / n - mean * mean) * n / (n - 1.0);
    out.se = std::sqrt(var / n);
  }
  return out;
}

PopulationRisk population_risk(const PopulationEvaluator& eval,
                               const std::function<double(std::span<const double>)>& predictor) {
  Vector margins(static_cast<Eigen::Index>(eval.size()));
  for (Eigen::Index k = 0; k < margins.size(); ++k) {
    margins[k] = predictor(std::span<const double>(eval.points.row(k).data(),
                                                   static_cast<std::size_t>(eval.points.cols())));
  }
  return population_risk(eval, margins);
}

double bayes_margin(double p) {
  constexpr double kCap = 700.0;
  if (p <= 0.0) return -kCap;
  if (p >= 1.0) return kCap;
  return std::clamp(std::log(p) - std::log1p(-p), -kCap, kCap);
}

}  // namespace srl
