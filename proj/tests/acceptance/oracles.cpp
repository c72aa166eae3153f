#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "srl/distributions.hpp"
#include "srl/metrics.hpp"
#include "srl/rng.hpp"

namespace srl::acceptance {

RegimeConfig calibration_config(std::uint64_t seed) {
  RegimeConfig cfg = derive_regime("easy", 1.0 / 64.0);
  cfg.m = 4096;
  cfg.n = 4096;
  cfg.d = 2;
  cfg.augment = true;
  cfg.distribution = "logistic_1d";
  cfg.distribution_params = {{"c", 2.0}};
  cfg.reference = {{"kind", "affine_teacher"}, {"slope", {2.0}}, {"intercept", 0.0}};
  cfg.seed = seed;
  return cfg;
}

namespace {

// Frozen predictor on augmented inputs (x, 1)/sqrt(2), gates taken from W0:
// neuron j is on at x iff w1 x + w2 >= 0.
class Frozen1D {
 public:
  explicit Frozen1D(const Network& net) : scale_(net.output_scale() / std::sqrt(2.0)) {
    const Matrix& w0 = net.init_weights();
    const auto m = static_cast<std::size_t>(w0.rows());
    w1_.resize(m);
    w2_.resize(m);
    a_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      w1_[j] = w0(static_cast<Eigen::Index>(j), 0);
      w2_[j] = w0(static_cast<Eigen::Index>(j), 1);
      a_[j] = net.signs()[static_cast<Eigen::Index>(j)];
      if (w1_[j] > 0) rising_.emplace_back(-w2_[j] / w1_[j], j);
      else if (w1_[j] < 0) falling_.emplace_back(-w2_[j] / w1_[j], j);
    }
    std::sort(rising_.begin(), rising_.end());
    std::sort(falling_.begin(), falling_.end());
  }

  std::size_t width() const { return w1_.size(); }
  const std::vector<double>& w1() const { return w1_; }
  const std::vector<double>& w2() const { return w2_; }

  // Outputs at ascending xs for parameters (v1, v2).
  void eval(const std::vector<double>& xs, const std::vector<double>& v1,
            const std::vector<double>& v2, std::vector<double>& f) const {
    double sa = 0, sb = 0;
    for (std::size_t j = 0; j < width(); ++j) {
      const bool on_left = w1_[j] < 0 || (w1_[j] == 0 && w2_[j] >= 0);
      if (on_left) {
        sa += a_[j] * v1[j];
        sb += a_[j] * v2[j];
      }
    }
    std::size_t r = 0, l = 0;
    f.resize(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      for (; r < rising_.size() && rising_[r].first <= xs[k]; ++r) {
        const auto j = rising_[r].second;
        sa += a_[j] * v1[j];
        sb += a_[j] * v2[j];
      }
      for (; l < falling_.size() && falling_[l].first < xs[k]; ++l) {
        const auto j = falling_[l].second;
        sa -= a_[j] * v1[j];
        sb -= a_[j] * v2[j];
      }
      f[k] = scale_ * (sa * xs[k] + sb);
    }
  }

  // Gradient of the mean loss, given c_k = l'(y_k f_k) y_k / n at sorted xs.
  void gradient(const std::vector<double>& xs, const std::vector<double>& c, std::vector<double>& g1,
                std::vector<double>& g2) const {
    const std::size_t n = xs.size();
    std::vector<double> pc(n + 1, 0.0), pcx(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      pc[k + 1] = pc[k] + c[k];
      pcx[k + 1] = pcx[k] + c[k] * xs[k];
    }
    g1.assign(width(), 0.0);
    g2.assign(width(), 0.0);
    for (std::size_t j = 0; j < width(); ++j) {
      double sc = 0, scx = 0;
      if (w1_[j] > 0) {
        const auto lb = static_cast<std::size_t>(
            std::lower_bound(xs.begin(), xs.end(), -w2_[j] / w1_[j]) - xs.begin());
        sc = pc[n] - pc[lb];
        scx = pcx[n] - pcx[lb];
      } else if (w1_[j] < 0) {
        const auto ub = static_cast<std::size_t>(
            std::upper_bound(xs.begin(), xs.end(), -w2_[j] / w1_[j]) - xs.begin());
        sc = pc[ub];
        scx = pcx[ub];
      } else if (w2_[j] >= 0) {
        sc = pc[n];
        scx = pcx[n];
      }
      g1[j] = scale_ * a_[j] * scx;
      g2[j] = scale_ * a_[j] * sc;
    }
  }

 private:
  double scale_;
  std::vector<double> w1_, w2_, a_;
  std::vector<std::pair<double, std::size_t>> rising_, falling_;
};

}  // namespace

OracleFit frozen_oracle_1d(const Network& net, const LabeledSample& raw, double eta,
                           double stop_ratio, std::size_t max_steps) {
  if (raw.dim() != 1 || net.input_dim() != 2) {
    throw std::invalid_argument("frozen_oracle_1d: expects 1D data and an augmented network");
  }
  const Frozen1D model(net);
  const std::size_t n = raw.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t k) {
    return raw.points(static_cast<Eigen::Index>(i), 0) < raw.points(static_cast<Eigen::Index>(k), 0);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = raw.points(static_cast<Eigen::Index>(order[k]), 0);
    ys[k] = raw.labels[static_cast<Eigen::Index>(order[k])];
  }

  std::vector<double> v1 = model.w1(), v2 = model.w2(), f, c(n), g1, g2;
  const double root_n = std::sqrt(static_cast<double>(n));
  auto radius = [&] {
    double sq = 0;
    for (std::size_t j = 0; j < model.width(); ++j) {
      sq += (v1[j] - model.w1()[j]) * (v1[j] - model.w1()[j]) +
            (v2[j] - model.w2()[j]) * (v2[j] - model.w2()[j]);
    }
    return net.rho() * std::sqrt(sq);
  };

  OracleFit fit;
  fit.stopped_on = "max_steps";
  for (std::size_t step = 0;; ++step) {
    model.eval(xs, v1, v2, f);
    double risk = 0;
    for (std::size_t k = 0; k < n; ++k) {
      risk += logistic_loss(ys[k] * f[k]);
      c[k] = logistic_loss_derivative(ys[k] * f[k]) * ys[k] / static_cast<double>(n);
    }
    fit.emp_risk = risk / static_cast<double>(n);
    fit.steps = step;
    fit.radius_ratio = radius() / root_n;
    if (fit.radius_ratio >= stop_ratio) {
      fit.stopped_on = "norm_ratio";
      break;
    }
    if (step == max_steps) break;
    model.gradient(xs, c, g1, g2);
    for (std::size_t j = 0; j < model.width(); ++j) {
      v1[j] -= eta * g1[j];
      v2[j] -= eta * g2[j];
    }
  }
  fit.v.resize(static_cast<Eigen::Index>(model.width()), 2);
  for (std::size_t j = 0; j < model.width(); ++j) {
    fit.v(static_cast<Eigen::Index>(j), 0) = v1[j];
    fit.v(static_cast<Eigen::Index>(j), 1) = v2[j];
  }
  return fit;
}

OracleFit calibration_oracle(std::uint64_t seed) {
  const RegimeConfig cfg = calibration_config(seed);
  const auto dist = make_distribution(cfg.distribution, cfg.distribution_params);
  const LabeledSample raw = sample(*dist, cfg.n, derive_seed(seed, stream::kData));
  const Network net = Network::init(cfg.m, cfg.d, cfg.rho, derive_seed(seed, stream::kNetwork));
  OracleFit fit = frozen_oracle_1d(net, raw, cfg.eta, kOracleStopRatio, kOracleMaxSteps);

  const PopulationEvaluator eval = dist->default_evaluator();
  const auto ff = FrozenFeatures::at_init(net);
  const auto risk = population_risk(eval, ff.forward_batch(fit.v, augment_rows(eval.points)));
  fit.excess_logistic = risk.breakdown.excess_logistic;
  fit.l2_calibration_sq = risk.breakdown.l2_calibration_sq;
  return fit;
}

}  // namespace srl::acceptance
