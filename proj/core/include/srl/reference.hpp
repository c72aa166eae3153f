#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "srl/distributions.hpp"
#include "srl/linalg.hpp"
#include "srl/network.hpp"

namespace srl {

// v -> U(v), writing d outputs for a d-dimensional v.
using WeightMap = std::function<void(std::span<const double> v, std::span<double> out)>;

// Infinite-width random feature model
//
//   f(x; U) = E_{v ~ N(0, I)} <U(v), x 1[v^T x >= 0]>
//
// evaluated by Monte Carlo over one shared, seeded sample of M features.
class InfiniteWidthModel {
 public:
  static constexpr std::size_t kDefaultFeatures = 100000;

  // Checks ||U(v)|| <= norm_bound on 10^4 Gaussian draws (throws
  // std::invalid_argument otherwise), then materializes the feature sample.
  InfiniteWidthModel(std::string kind, nlohmann::json params, std::size_t dim, WeightMap map,
                     double norm_bound, std::size_t mc_features = kDefaultFeatures,
                     std::uint64_t mc_seed = 0);

  const std::string& kind() const { return kind_; }
  const nlohmann::json& params() const { return params_; }
  std::size_t dim() const { return dim_; }
  double norm_bound() const { return norm_bound_; }
  std::size_t mc_features() const { return static_cast<std::size_t>(features_.rows()); }
  std::uint64_t mc_seed() const { return mc_seed_; }

  Vector weight(std::span<const double> v) const;

  struct Estimate {
    double value = 0.0;
    double se = 0.0;
  };
  Estimate forward(std::span<const double> x) const;
  // One estimate per row; `se` receives per-row standard errors if given.
  Vector forward_batch(const Matrix& points, Vector* se = nullptr) const;

  // Same feature sample, map multiplied by c.
  InfiniteWidthModel scaled(double c) const;

  nlohmann::json describe() const;

 private:
  std::string kind_;
  nlohmann::json params_;
  std::size_t dim_;
  WeightMap map_;
  double norm_bound_;
  std::uint64_t mc_seed_;
  Matrix features_;  // M x d Gaussian v_i
  Matrix mapped_;    // M x d U(v_i)
};

// Built-in maps.
InfiniteWidthModel zero_reference(std::size_t dim, std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                  std::uint64_t mc_seed = 0);
// U(v) = c.
InfiniteWidthModel constant_reference(const Vector& c,
                                      std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                      std::uint64_t mc_seed = 0);
// U(v) = scale * u / ||u||.
InfiniteWidthModel teacher_reference(const Vector& direction, double scale,
                                     std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                     std::uint64_t mc_seed = 0);
// U(v) = scale * sgn(<v, u>) * u / ||u||, with f(x; U) = scale <u/||u||, x> (1/2 - angle(u, x)/pi).
InfiniteWidthModel sign_teacher_reference(const Vector& direction, double scale,
                                          std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                          std::uint64_t mc_seed = 0);
// On augmented inputs (x, 1)/sqrt(2) of dimension d+1: constant map
// 2 sqrt(2) (slope, intercept), so that f = <slope, x> + intercept.
InfiniteWidthModel affine_teacher_reference(const Vector& slope, double intercept,
                                            std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                            std::uint64_t mc_seed = 0);

// Config form: {"kind": "zero"|"constant"|"teacher"|"sign_teacher"|"affine_teacher", ...}.
// Throws std::invalid_argument on unknown kinds or a dimension mismatch.
InfiniteWidthModel make_reference(const nlohmann::json& spec, std::size_t dim,
                                  std::size_t mc_features = InfiniteWidthModel::kDefaultFeatures,
                                  std::uint64_t mc_seed = 0);

struct SampledReference {
  Matrix ubar;
  std::uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  double rho = 0.0;
};

// Rows u_j = a_j U(w_{0,j}) / (rho sqrt(m)) + w_{0,j}. Asserts
// rho ||Ubar - W0|| <= sup ||U||.
SampledReference sample_reference(const InfiniteWidthModel& model, const Network& net,
                                  std::uint64_t seed = 0);

struct GapResult {
  std::size_t m = 0;
  double rho = 0.0;
  double frozen_risk = 0.0;    // R^(0)(Ubar)
  double infinite_risk = 0.0;  // R(U)
  double gap = 0.0;            // max(frozen/infinite, infinite/frozen)
  double se = 0.0;             // bound on the Monte Carlo error of infinite_risk
};

// Both risks on the same evaluator nodes. `augment` maps each node through
// (x, 1)/sqrt(2) before either predictor sees it. Throws std::domain_error if
// either risk is zero.
GapResult gap_experiment(const InfiniteWidthModel& model, const Network& net,
                         const PopulationEvaluator& eval, bool augment);

void to_json(nlohmann::json& j, const GapResult& g);

}  // namespace srl
