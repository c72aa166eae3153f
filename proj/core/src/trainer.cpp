#include "srl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srl/metrics.hpp"

namespace srl {

void validate(const TrainConfig& cfg, double rho) {
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    throw std::invalid_argument("TrainConfig: eta must be positive and finite");
  }
  if (cfg.t_max < 1) throw std::invalid_argument("TrainConfig: t_max must be >= 1");
  if (!(cfg.eps_gd > 0.0)) throw std::invalid_argument("TrainConfig: eps_gd must be positive");
  if (!(cfg.R_gd >= 0.0)) throw std::invalid_argument("TrainConfig: R_gd must be >= 0");
  if (cfg.monitors && cfg.eta > 4.0 / (rho * rho) * (1.0 + 1e-12)) {
    throw std::invalid_argument("TrainConfig: monitors require eta <= 4 / rho^2");
  }
}

namespace {

void check_data(const Network& net, const LabeledSample& data) {
  if (data.size() == 0) throw std::invalid_argument("empty sample");
  if (data.dim() != net.input_dim()) {
    throw std::invalid_argument("sample dimension does not match network input dimension");
  }
  if (static_cast<std::size_t>(data.labels.size()) != data.size()) {
    throw std::invalid_argument("sample has mismatched label count");
  }
}

struct Pass {
  double risk = 0.0;
  Matrix grad;
  std::vector<double> probe_risks;
  double frozen_under_prev = 0.0;  // R^(prev)(W)
};

constexpr std::size_t kFusedMaxDim = 8;
constexpr Eigen::Index kFusedBlock = 256;

// Fused variant of `evaluate` for small input dimension, where dense
// products with an inner dimension of d <= 8 are dominated by temporaries.
// Examples are processed in blocks stored coordinate-major; every neuron is
// visited twice per block (outputs, then gradient and frozen risks).
Pass evaluate_fused(const Network& net, const LabeledSample& data, std::span<const Matrix> probes,
                    const Matrix* prev, bool want_grad) {
  const std::size_t m = net.width();
  const std::size_t d = net.input_dim();
  const double* w = net.weights().data();
  const double* a = net.signs().data();
  const double scale = net.output_scale();
  const Eigen::Index n = data.points.rows();
  const std::size_t np = probes.size();

  Pass out;
  out.probe_risks.assign(np, 0.0);
  Matrix grad_acc;
  if (want_grad) grad_acc = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));

  using Arr = Eigen::ArrayXd;
  Eigen::ArrayXXd xs(kFusedBlock, static_cast<Eigen::Index>(d));  // column q = coordinate q
  Arr z(kFusedBlock), zo(kFusedBlock), f(kFusedBlock), c(kFusedBlock), fprev(kFusedBlock);
  Eigen::ArrayXXd fp(kFusedBlock, static_cast<Eigen::Index>(np));

  for (Eigen::Index begin = 0; begin < n; begin += kFusedBlock) {
    const Eigen::Index b = std::min(kFusedBlock, n - begin);
    xs.topRows(b) = data.points.middleRows(begin, b).array();
    auto dot_block = [&](const double* row, Arr& dst) {
      dst.head(b) = row[0] * xs.col(0).head(b);
      for (std::size_t q = 1; q < d; ++q) dst.head(b) += row[q] * xs.col(static_cast<Eigen::Index>(q)).head(b);
    };

    f.head(b).setZero();
    for (std::size_t j = 0; j < m; ++j) {
      dot_block(w + j * d, z);
      f.head(b) += a[j] * z.head(b).max(0.0);
    }
    for (Eigen::Index k = 0; k < b; ++k) {
      const double y = data.labels[begin + k];
      const double margin = y * scale * f[k];
      out.risk += logistic_loss(margin);
      c[k] = logistic_loss_derivative(margin) * y;
    }

    if (!want_grad && np == 0 && prev == nullptr) continue;
    fp.topRows(b).setZero();
    fprev.head(b).setZero();
    for (std::size_t j = 0; j < m; ++j) {
      dot_block(w + j * d, z);
      const double aj = a[j];
      const auto on = z.head(b) >= 0.0;
      if (want_grad) {
        double* g = grad_acc.data() + j * d;
        const Arr gc = on.select(c.head(b), 0.0);
        for (std::size_t q = 0; q < d; ++q) {
          g[q] += (gc * xs.col(static_cast<Eigen::Index>(q)).head(b)).sum();
        }
      }
      for (std::size_t p = 0; p < np; ++p) {
        dot_block(probes[p].data() + j * d, zo);
        fp.col(static_cast<Eigen::Index>(p)).head(b) += aj * on.select(zo.head(b), 0.0);
      }
      if (prev != nullptr) {
        dot_block(prev->data() + j * d, zo);
        fprev.head(b) += aj * (zo.head(b) >= 0.0).select(z.head(b), 0.0);
      }
    }
    for (Eigen::Index k = 0; k < b; ++k) {
      const double y = data.labels[begin + k];
      for (std::size_t p = 0; p < np; ++p) {
        out.probe_risks[p] += logistic_loss(y * scale * fp(k, static_cast<Eigen::Index>(p)));
      }
      if (prev != nullptr) out.frozen_under_prev += logistic_loss(y * scale * fprev[k]);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  out.risk *= inv_n;
  out.frozen_under_prev *= inv_n;
  for (double& r : out.probe_risks) r *= inv_n;
  if (want_grad) {
    out.grad = (scale * inv_n) * (net.signs().asDiagonal() * grad_acc);
  }
  return out;
}

// One sweep over the sample at the current weights W. Everything that needs
// the activation pattern of W (gradient, probe frozen risks) shares the
// pre-activation block; `prev` additionally evaluates W under the gates of
// the previous iterate.
Pass evaluate(const Network& net, const LabeledSample& data, std::span<const Matrix> probes,
              const Matrix* prev, bool want_grad) {
  if (net.input_dim() <= kFusedMaxDim) return evaluate_fused(net, data, probes, prev, want_grad);
  const Matrix& w = net.weights();
  const Vector& a = net.signs();
  const double scale = net.output_scale();
  const Eigen::Index n = data.points.rows();
  const auto block = static_cast<Eigen::Index>(detail::block_size(net.width()));

  Pass out;
  out.probe_risks.assign(probes.size(), 0.0);
  Matrix grad_acc;
  if (want_grad) grad_acc = Matrix::Zero(w.rows(), w.cols());

  ColMatrix pre, gates, other;
  Vector f, c;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    const auto xb = data.points.middleRows(begin, b).transpose();
    const auto yb = data.labels.segment(begin, b);

    pre.noalias() = w * xb;
    f.noalias() = scale * (pre.cwiseMax(0.0).transpose() * a);
    c.resize(b);
    for (Eigen::Index k = 0; k < b; ++k) {
      const double margin = yb[k] * f[k];
      out.risk += logistic_loss(margin);
      c[k] = logistic_loss_derivative(margin) * yb[k];
    }

    if (want_grad) {
      gates = (pre.array() >= 0.0).cast<double>().matrix() * c.asDiagonal();
      grad_acc.noalias() += gates * xb.transpose();
    }

    for (std::size_t p = 0; p < probes.size(); ++p) {
      other.noalias() = probes[p] * xb;
      f.noalias() =
          scale * ((pre.array() >= 0.0).select(other.array(), 0.0).matrix().transpose() * a);
      for (Eigen::Index k = 0; k < b; ++k) out.probe_risks[p] += logistic_loss(yb[k] * f[k]);
    }

    if (prev != nullptr) {
      other.noalias() = (*prev) * xb;
      f.noalias() =
          scale * ((other.array() >= 0.0).select(pre.array(), 0.0).matrix().transpose() * a);
      for (Eigen::Index k = 0; k < b; ++k) out.frozen_under_prev += logistic_loss(yb[k] * f[k]);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  out.risk *= inv_n;
  out.frozen_under_prev *= inv_n;
  for (double& r : out.probe_risks) r *= inv_n;
  if (want_grad) out.grad = (scale * inv_n) * (a.asDiagonal() * grad_acc);
  return out;
}

}  // namespace

double empirical_risk(const Network& net, const LabeledSample& data) {
  check_data(net, data);
  const Vector f = net.forward_batch(data.points);
  double risk = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) risk += logistic_loss(data.labels[k] * f[k]);
  return risk / static_cast<double>(f.size());
}

double frozen_empirical_risk(const FrozenFeatures& features, const Matrix& v,
                             const LabeledSample& data) {
  if (data.size() == 0) throw std::invalid_argument("empty sample");
  const Vector f = features.forward_batch(v, data.points);
  double risk = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) risk += logistic_loss(data.labels[k] * f[k]);
  return risk / static_cast<double>(f.size());
}

Matrix risk_gradient(const Network& net, const LabeledSample& data, double* risk) {
  check_data(net, data);
  Pass p = evaluate(net, data, {}, nullptr, true);
  if (risk != nullptr) *risk = p.risk;
  return std::move(p.grad);
}

Matrix gd_step(Network& net, const LabeledSample& data, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("gd_step: eta must be positive");
  Matrix g = risk_gradient(net, data);
  net.mutable_weights().noalias() -= eta * g;
  return g;
}

Trajectory train(Network& net, const LabeledSample& data, const TrainConfig& cfg,
                 std::span<const Matrix> probes) {
  validate(cfg, net.rho());
  check_data(net, data);
  for (const Matrix& z : probes) {
    if (z.rows() != net.weights().rows() || z.cols() != net.weights().cols()) {
      throw std::invalid_argument("train: probe matrix shape does not match W");
    }
  }

  Trajectory traj;
  traj.eta = cfg.eta;
  traj.rho = net.rho();
  traj.R_gd = cfg.R_gd;
  traj.probes.assign(probes.begin(), probes.end());
  traj.records.reserve(cfg.t_max + 1);
  traj.steps.reserve(cfg.t_max);

  Matrix prev;
  double best = kInfinity;
  for (std::size_t i = 0; i <= cfg.t_max; ++i) {
    Pass p = evaluate(net, data, probes, i > 0 ? &prev : nullptr, true);

    if (!std::isfinite(p.risk) || p.risk > kDivergenceRisk) {
      traj.status = TrainStatus::diverged;
      traj.message = "empirical risk " + std::to_string(p.risk) + " at iterate " +
                     std::to_string(i);
      if (!traj.steps.empty()) traj.steps.pop_back();
      break;
    }
    if (i > 0) {
      StepMonitor& st = traj.steps.back();
      st.frozen_next = p.frozen_under_prev;
      traj.records.back().smooth_resid =
          (st.frozen_current - st.frozen_next) - 0.5 * cfg.eta * st.grad_norm_sq;
    }

    const Matrix& w = net.weights();
    IterateRecord rec;
    rec.iter = i;
    rec.emp_risk = p.risk;
    rec.dist_init = net.distance_from_init();
    const double grad_sq = p.grad.squaredNorm();
    rec.grad_norm = std::sqrt(grad_sq);
    if (rec.dist_init <= cfg.R_gd && p.risk < best) {
      best = p.risk;
      traj.selected = i;
      traj.selected_weights = w;
    }
    traj.records.push_back(rec);

    std::vector<double> dist_sq(probes.size());
    for (std::size_t k = 0; k < probes.size(); ++k) dist_sq[k] = (w - probes[k]).squaredNorm();

    if (i == cfg.t_max) {
      traj.final_probe_dist_sq = std::move(dist_sq);
      break;
    }

    StepMonitor st;
    st.frozen_current = p.risk;
    st.grad_norm_sq = grad_sq;
    st.probe_frozen_risk = std::move(p.probe_risks);
    st.probe_dist_sq = std::move(dist_sq);
    traj.steps.push_back(std::move(st));

    prev = w;
    net.mutable_weights().noalias() -= cfg.eta * p.grad;
  }

  if (traj.selected) traj.records[*traj.selected].selected = true;
  return traj;
}

SmoothnessReport monitor_smoothness(const Trajectory& traj) {
  SmoothnessReport rep;
  const std::size_t steps = std::min(traj.steps.size(), traj.records.size() - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const StepMonitor& st = traj.steps[i];
    const double scale = std::max(1.0, st.frozen_current);
    const double descent = st.frozen_current - st.frozen_next;
    const double resid = descent - 0.5 * traj.eta * st.grad_norm_sq;
    rep.residuals.push_back(resid);
    rep.descent.push_back(descent);
    const double scaled = resid / scale;
    if (i == 0 || scaled < rep.worst_scaled) rep.worst_scaled = scaled;
    if (resid < -1e-9 * scale) rep.passed = false;
    if (descent < -1e-9 * scale) rep.descent_holds = false;
  }
  return rep;
}

RegretCertificate regret_certificate(const Trajectory& traj, std::size_t probe_index) {
  if (probe_index >= traj.probes.size()) {
    throw std::out_of_range("regret_certificate: no such probe");
  }
  RegretCertificate cert;
  cert.reference = traj.probes[probe_index];

  const std::size_t k = probe_index;
  const std::size_t steps = traj.steps.size();
  // ||W_0 - Z||^2
  const double start =
      steps > 0 ? traj.steps[0].probe_dist_sq[k]
                : (traj.final_probe_dist_sq.empty() ? 0.0 : traj.final_probe_dist_sq[k]);

  double sum_next = 0.0;
  double sum_ref = 0.0;
  cert.worst_scaled_slack = -kInfinity;
  auto check_prefix = [&](double dist_sq) {
    const double lhs = dist_sq + 2.0 * traj.eta * sum_next;
    const double rhs = start + 2.0 * traj.eta * sum_ref;
    const double scaled = (lhs - rhs) / std::max(1.0, rhs);
    cert.worst_scaled_slack = std::max(cert.worst_scaled_slack, scaled);
    if (scaled > 1e-8) cert.holds = false;
    cert.lhs = lhs;
    cert.rhs = rhs;
  };

  for (std::size_t i = 0; i < steps; ++i) {
    check_prefix(traj.steps[i].probe_dist_sq[k]);
    sum_next += traj.steps[i].frozen_next;
    sum_ref += traj.steps[i].probe_frozen_risk[k];
    cert.frozen_next.push_back(traj.steps[i].frozen_next);
    cert.frozen_reference.push_back(traj.steps[i].probe_frozen_risk[k]);
  }
  if (!traj.final_probe_dist_sq.empty()) check_prefix(traj.final_probe_dist_sq[k]);
  return cert;
}

namespace {

// Risk and gradient of V -> hat R^(0)(V).
double frozen_risk_gradient(const Network& net, const Matrix& v, const LabeledSample& data,
                            Matrix& grad) {
  const Matrix& w0 = net.init_weights();
  const Vector& a = net.signs();
  const double scale = net.output_scale();
  const Eigen::Index n = data.points.rows();
  const auto block = static_cast<Eigen::Index>(detail::block_size(net.width()));
  grad.setZero(v.rows(), v.cols());
  double risk = 0.0;
  ColMatrix gates, pre;
  Vector f, c;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    const auto xb = data.points.middleRows(begin, b).transpose();
    const auto yb = data.labels.segment(begin, b);
    gates = ((w0 * xb).array() >= 0.0).cast<double>().matrix();
    pre.noalias() = v * xb;
    f.noalias() = scale * (gates.cwiseProduct(pre).transpose() * a);
    c.resize(b);
    for (Eigen::Index k = 0; k < b; ++k) {
      const double margin = yb[k] * f[k];
      risk += logistic_loss(margin);
      c[k] = logistic_loss_derivative(margin) * yb[k];
    }
    grad.noalias() += (gates * c.asDiagonal()) * xb.transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  grad = (scale * inv_n) * (a.asDiagonal() * grad);
  return risk * inv_n;
}

}  // namespace

FrozenFit fit_frozen(const Network& net, const LabeledSample& data, const FrozenFitConfig& cfg) {
  check_data(net, data);
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("fit_frozen: eta must be positive");
  const double sqrt_n = std::sqrt(static_cast<double>(data.size()));
  FrozenFit fit;
  fit.v = net.init_weights();
  fit.stopped_on = "max_steps";
  Matrix grad;
  for (;;) {
    fit.emp_risk = frozen_risk_gradient(net, fit.v, data, grad);
    fit.grad_norm = grad.norm();
    fit.radius = net.rho() * (fit.v - net.init_weights()).norm();
    if (fit.radius / sqrt_n >= cfg.stop_norm_ratio) {
      fit.stopped_on = "norm_ratio";
      break;
    }
    if (fit.grad_norm <= cfg.grad_tol) {
      fit.stopped_on = "grad_tol";
      break;
    }
    if (fit.steps == cfg.max_steps) break;
    fit.v.noalias() -= cfg.eta * grad;
    ++fit.steps;
  }
  return fit;
}

}  // namespace srl
