#include "srl/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srl/rng.hpp"

namespace srl {

namespace {

constexpr std::size_t kNormChecks = 10000;

Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace

InfiniteWidthModel::InfiniteWidthModel(std::string kind, nlohmann::json params, std::size_t dim,
                                       WeightMap map, double norm_bound, std::size_t mc_features,
                                       std::uint64_t mc_seed)
    : kind_(std::move(kind)),
      params_(std::move(params)),
      dim_(dim),
      map_(std::move(map)),
      norm_bound_(norm_bound),
      mc_seed_(mc_seed) {
  if (dim_ < 1) throw std::invalid_argument("InfiniteWidthModel: dim must be >= 1");
  if (!(norm_bound_ >= 0.0) || !std::isfinite(norm_bound_)) {
    throw std::invalid_argument("InfiniteWidthModel: norm bound must be finite and >= 0");
  }
  if (mc_features < 1) throw std::invalid_argument("InfiniteWidthModel: need >= 1 MC feature");

  const double tolerance = norm_bound_ * (1.0 + 1e-12) + 1e-300;
  Rng check(derive_seed(mc_seed_, stream::kProbe));
  Vector v(static_cast<Eigen::Index>(dim_));
  Vector out(static_cast<Eigen::Index>(dim_));
  for (std::size_t t = 0; t < kNormChecks; ++t) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = check.gaussian();
    map_(std::span<const double>(v.data(), dim_), std::span<double>(out.data(), dim_));
    if (out.norm() > tolerance) {
      throw std::invalid_argument("InfiniteWidthModel '" + kind_ + "': ||U(v)|| = " +
                                  std::to_string(out.norm()) + " exceeds bound " +
                                  std::to_string(norm_bound_));
    }
  }

  Rng rng(mc_seed_);
  const auto rows = static_cast<Eigen::Index>(mc_features);
  const auto cols = static_cast<Eigen::Index>(dim_);
  features_.resize(rows, cols);
  mapped_.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) features_(i, k) = rng.gaussian();
    map_(std::span<const double>(features_.row(i).data(), dim_),
         std::span<double>(mapped_.row(i).data(), dim_));
  }
}

Vector InfiniteWidthModel::weight(std::span<const double> v) const {
  if (v.size() != dim_) throw std::invalid_argument("InfiniteWidthModel::weight: dimension mismatch");
  Vector out(static_cast<Eigen::Index>(dim_));
  map_(v, std::span<double>(out.data(), dim_));
  return out;
}

InfiniteWidthModel::Estimate InfiniteWidthModel::forward(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("InfiniteWidthModel::forward: dimension mismatch");
  Matrix point = as_vector(x).transpose();
  Vector se;
  const Vector value = forward_batch(point, &se);
  return {value[0], se[0]};
}

Vector InfiniteWidthModel::forward_batch(const Matrix& points, Vector* se) const {
  if (static_cast<std::size_t>(points.cols()) != dim_) {
    throw std::invalid_argument("InfiniteWidthModel::forward_batch: dimension mismatch");
  }
  const Eigen::Index n = points.rows();
  const auto features = static_cast<double>(features_.rows());
  const auto block = static_cast<Eigen::Index>(detail::block_size(mc_features()));
  Vector mean(n);
  if (se != nullptr) se->resize(n);
  ColMatrix gate, value;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    const auto xb = points.middleRows(begin, b).transpose();
    gate.noalias() = features_ * xb;
    value.noalias() = mapped_ * xb;
    value = (gate.array() >= 0.0).select(value.array(), 0.0).matrix();
    for (Eigen::Index k = 0; k < b; ++k) {
      const double mu = value.col(k).sum() / features;
      mean[begin + k] = mu;
      if (se != nullptr) {
        const double sq = value.col(k).squaredNorm() / features;
        const double var = features > 1.0 ? std::max(0.0, sq - mu * mu) * features / (features - 1.0) : 0.0;
        (*se)[begin + k] = std::sqrt(var / features);
      }
    }
  }
  return mean;
}

InfiniteWidthModel InfiniteWidthModel::scaled(double c) const {
  WeightMap inner = map_;
  WeightMap map = [inner, c](std::span<const double> v, std::span<double> out) {
    inner(v, out);
    for (double& o : out) o *= c;
  };
  nlohmann::json params = params_;
  params["scaled_by"] = c;
  return {kind_, params, dim_, std::move(map), std::abs(c) * norm_bound_, mc_features(), mc_seed_};
}

nlohmann::json InfiniteWidthModel::describe() const {
  nlohmann::json j = params_;
  j["kind"] = kind_;
  j["dim"] = dim_;
  j["norm_bound"] = norm_bound_;
  j["mc_features"] = mc_features();
  j["mc_seed"] = mc_seed_;
  return j;
}

InfiniteWidthModel zero_reference(std::size_t dim, std::size_t mc_features, std::uint64_t mc_seed) {
  WeightMap map = [](std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return {"zero", nlohmann::json::object(), dim, std::move(map), 0.0, mc_features, mc_seed};
}

InfiniteWidthModel constant_reference(const Vector& c, std::size_t mc_features,
                                      std::uint64_t mc_seed) {
  WeightMap map = [c](std::span<const double>, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c[static_cast<Eigen::Index>(k)];
  };
  std::vector<double> vec(c.data(), c.data() + c.size());
  return {"constant", {{"vector", vec}}, static_cast<std::size_t>(c.size()), std::move(map),
          c.norm(), mc_features, mc_seed};
}

InfiniteWidthModel teacher_reference(const Vector& direction, double scale,
                                     std::size_t mc_features, std::uint64_t mc_seed) {
  if (!(direction.norm() > 0.0)) throw std::invalid_argument("teacher: zero direction");
  const Vector u = scale * direction / direction.norm();
  WeightMap map = [u](std::span<const double>, std::span<double> out) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = u[static_cast<Eigen::Index>(k)];
  };
  std::vector<double> dir(direction.data(), direction.data() + direction.size());
  return {"teacher", {{"direction", dir}, {"scale", scale}}, static_cast<std::size_t>(u.size()),
          std::move(map), std::abs(scale), mc_features, mc_seed};
}

InfiniteWidthModel sign_teacher_reference(const Vector& direction, double scale,
                                          std::size_t mc_features, std::uint64_t mc_seed) {
  if (!(direction.norm() > 0.0)) throw std::invalid_argument("sign_teacher: zero direction");
  const Vector u = direction / direction.norm();
  WeightMap map = [u, scale](std::span<const double> v, std::span<double> out) {
    const double s = as_vector(v).dot(u) >= 0.0 ? scale : -scale;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = s * u[static_cast<Eigen::Index>(k)];
  };
  std::vector<double> dir(direction.data(), direction.data() + direction.size());
  return {"sign_teacher", {{"direction", dir}, {"scale", scale}},
          static_cast<std::size_t>(u.size()), std::move(map), std::abs(scale), mc_features, mc_seed};
}

InfiniteWidthModel affine_teacher_reference(const Vector& slope, double intercept,
                                            std::size_t mc_features, std::uint64_t mc_seed) {
  const double k = 2.0 * std::sqrt(2.0);
  Vector c(slope.size() + 1);
  c.head(slope.size()) = k * slope;
  c[slope.size()] = k * intercept;
  WeightMap map = [c](std::span<const double>, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[static_cast<Eigen::Index>(i)];
  };
  std::vector<double> sl(slope.data(), slope.data() + slope.size());
  return {"affine_teacher", {{"slope", sl}, {"intercept", intercept}},
          static_cast<std::size_t>(c.size()), std::move(map), c.norm(), mc_features, mc_seed};
}

InfiniteWidthModel make_reference(const nlohmann::json& spec, std::size_t dim,
                                  std::size_t mc_features, std::uint64_t mc_seed) {
  const std::string kind = spec.value("kind", std::string("zero"));
  auto vec_of = [](const nlohmann::json& j, const char* key) {
    const auto values = j.at(key).get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  };
  auto require_dim = [&](std::size_t got) {
    if (got != dim) {
      throw std::invalid_argument("reference '" + kind + "' has dimension " + std::to_string(got) +
                                  ", expected " + std::to_string(dim));
    }
  };
  if (kind == "zero") return zero_reference(dim, mc_features, mc_seed);
  if (kind == "constant") {
    const Vector c = vec_of(spec, "vector");
    require_dim(static_cast<std::size_t>(c.size()));
    return constant_reference(c, mc_features, mc_seed);
  }
  if (kind == "teacher" || kind == "sign_teacher") {
    const Vector u = vec_of(spec, "direction");
    require_dim(static_cast<std::size_t>(u.size()));
    const double scale = spec.value("scale", 1.0);
    return kind == "teacher" ? teacher_reference(u, scale, mc_features, mc_seed)
                             : sign_teacher_reference(u, scale, mc_features, mc_seed);
  }
  if (kind == "affine_teacher") {
    const Vector slope = vec_of(spec, "slope");
    require_dim(static_cast<std::size_t>(slope.size()) + 1);
    return affine_teacher_reference(slope, spec.value("intercept", 0.0), mc_features, mc_seed);
  }
  throw std::invalid_argument("unknown reference kind: " + kind);
}

SampledReference sample_reference(const InfiniteWidthModel& model, const Network& net,
                                  std::uint64_t seed) {
  if (model.dim() != net.input_dim()) {
    throw std::invalid_argument("sample_reference: model dimension does not match network");
  }
  const Matrix& w0 = net.init_weights();
  const double coef = 1.0 / (net.rho() * std::sqrt(static_cast<double>(net.width())));
  SampledReference out;
  out.seed = seed;
  out.m = net.width();
  out.d = net.input_dim();
  out.rho = net.rho();
  out.ubar = w0;
  for (Eigen::Index j = 0; j < w0.rows(); ++j) {
    const Vector u = model.weight(std::span<const double>(w0.row(j).data(), out.d));
    out.ubar.row(j) += (coef * net.signs()[j]) * u.transpose();
  }
  const double moved = net.rho() * (out.ubar - w0).norm();
  if (moved > model.norm_bound() * (1.0 + 1e-12) + 1e-12) {
    throw std::logic_error("sample_reference: rho ||Ubar - W0|| exceeds the model norm bound");
  }
  return out;
}

GapResult gap_experiment(const InfiniteWidthModel& model, const Network& net,
                         const PopulationEvaluator& eval, bool augment) {
  const Matrix points = augment ? augment_rows(eval.points) : eval.points;
  const SampledReference ref = sample_reference(model, net);
  const Vector frozen = FrozenFeatures::at_init(net).forward_batch(ref.ubar, points);
  Vector se;
  const Vector infinite = model.forward_batch(points, &se);

  GapResult out;
  out.m = net.width();
  out.rho = net.rho();
  out.frozen_risk = population_risk(eval, frozen).breakdown.logistic_risk;
  out.infinite_risk = population_risk(eval, infinite).breakdown.logistic_risk;
  if (!(out.frozen_risk > 0.0) || !(out.infinite_risk > 0.0)) {
    throw std::domain_error("gap_experiment: degenerate zero risk");
  }
  out.gap = std::max(out.frozen_risk / out.infinite_risk, out.infinite_risk / out.frozen_risk);
  out.se = eval.weights.dot(se);
  return out;
}

void to_json(nlohmann::json& j, const GapResult& g) {
  j = {{"m", g.m},
       {"rho", g.rho},
       {"frozen_risk", g.frozen_risk},
       {"infinite_risk", g.infinite_risk},
       {"gap", g.gap},
       {"se", g.se}};
}

}  // namespace srl
