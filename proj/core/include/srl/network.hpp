#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srl/linalg.hpp"

namespace srl {

// Shallow ReLU predictor
//
//   f(x; W) = (rho / sqrt(m)) * sum_j a_j * max(0, <w_j, x>)
//
// with fixed signs a_j in {-1, +1} and trainable rows w_j. The initial
// weights are kept as an immutable snapshot so that ||W - W0|| is cheap.
// The ReLU subgradient at 0 is taken as 1, i.e. the activation indicator is
// 1[<w_j, x> >= 0].
class Network {
 public:
  Network(double rho, Vector signs, Matrix weights);

  // W entries iid N(0,1) drawn row-major from Rng(seed), then one sign per
  // row from the same stream (the cached Gaussian spare is dropped first).
  static Network init(std::size_t m, std::size_t d, double rho, std::uint64_t seed);

  std::size_t width() const { return static_cast<std::size_t>(w_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(w_.cols()); }
  double rho() const { return rho_; }
  // rho / sqrt(m)
  double output_scale() const { return scale_; }
  const Vector& signs() const { return a_; }
  const Matrix& weights() const { return w_; }
  const Matrix& init_weights() const { return w0_; }

  // Replaces W; W0 is untouched. Throws on shape mismatch.
  void set_weights(Matrix w);
  // Trainer access for in-place updates.
  Matrix& mutable_weights() { return w_; }

  double distance_from_init() const { return (w_ - w0_).norm(); }

  double forward(std::span<const double> x) const;
  // One output per row of `points`.
  Vector forward_batch(const Matrix& points) const;

  // d f / d W: row j is output_scale * a_j * 1[<w_j, x> >= 0] * x^T.
  Matrix feature_gradient(std::span<const double> x) const;

  std::vector<std::uint8_t> serialize() const;
  static Network deserialize(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

 private:
  Network(double rho, Vector signs, Matrix weights, Matrix init_weights);

  double rho_;
  double scale_;
  Vector a_;
  Matrix w_;
  Matrix w0_;
};

// Linearized predictor with features frozen at a weight matrix W_i:
//
//   f^(i)(x; V) = <grad f(x; W_i), V>
//
// Only the activation pattern of W_i is used, so f^(i)(x; W_i) = f(x; W_i).
class FrozenFeatures {
 public:
  FrozenFeatures(double rho, Vector signs, Matrix sign_source);

  // Features at the network's current weights.
  static FrozenFeatures at_current(const Network& net);
  // Features at the network's initialization W0.
  static FrozenFeatures at_init(const Network& net);

  std::size_t width() const { return static_cast<std::size_t>(source_.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(source_.cols()); }
  const Matrix& sign_source() const { return source_; }

  double forward(const Matrix& v, std::span<const double> x) const;
  Vector forward_batch(const Matrix& v, const Matrix& points) const;

 private:
  double rho_;
  double scale_;
  Vector a_;
  Matrix source_;
};

// Bias augmentation x -> (x, 1) / sqrt(2).
struct AugmentedInput {
  Vector x_tilde;
};

// Throws std::invalid_argument if `assert_unit_ball` and ||x|| > 1 (+1e-12).
AugmentedInput augment(std::span<const double> x, bool assert_unit_ball = true);
// Row-wise augmentation of a data matrix.
Matrix augment_rows(const Matrix& points);

namespace detail {

// Number of examples processed per block so that an m-by-block
// pre-activation buffer stays near 4M doubles.
std::size_t block_size(std::size_t width);

}  // namespace detail

}  // namespace srl
