#include "srl/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "srl/rng.hpp"

namespace srl {

namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(got) + ")");
  }
}

Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace

namespace detail {

std::size_t block_size(std::size_t width) {
  constexpr std::size_t kBudget = std::size_t{1} << 18;
  return std::clamp<std::size_t>(kBudget / std::max<std::size_t>(width, 1), 1, 4096);
}

}  // namespace detail

Network::Network(double rho, Vector signs, Matrix weights)
    : Network(rho, std::move(signs), weights, weights) {}

Network::Network(double rho, Vector signs, Matrix weights, Matrix init_weights)
    : rho_(rho), a_(std::move(signs)), w_(std::move(weights)), w0_(std::move(init_weights)) {
  if (!(rho_ > 0.0) || !std::isfinite(rho_)) {
    throw std::invalid_argument("Network: rho must be positive and finite");
  }
  if (w_.rows() < 1 || w_.cols() < 1) {
    throw std::invalid_argument("Network: width and input dimension must be >= 1");
  }
  check_dim(static_cast<std::size_t>(w_.rows()), static_cast<std::size_t>(a_.size()),
            "Network signs");
  if (w0_.rows() != w_.rows() || w0_.cols() != w_.cols()) {
    throw std::invalid_argument("Network: W0 shape differs from W");
  }
  for (Eigen::Index j = 0; j < a_.size(); ++j) {
    if (a_[j] != 1.0 && a_[j] != -1.0) {
      throw std::invalid_argument("Network: signs must be +1 or -1");
    }
  }
  scale_ = rho_ / std::sqrt(static_cast<double>(w_.rows()));
}

Network Network::init(std::size_t m, std::size_t d, double rho, std::uint64_t seed) {
  if (m < 1 || d < 1) throw std::invalid_argument("Network::init: m, d must be >= 1");
  Rng rng(seed);
  Matrix w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    for (Eigen::Index k = 0; k < w.cols(); ++k) w(j, k) = rng.gaussian();
  }
  rng.discard_spare();
  Vector a(static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < a.size(); ++j) a[j] = rng.sign();
  return Network(rho, std::move(a), std::move(w));
}

void Network::set_weights(Matrix w) {
  if (w.rows() != w_.rows() || w.cols() != w_.cols()) {
    throw std::invalid_argument("Network::set_weights: shape mismatch");
  }
  w_ = std::move(w);
}

double Network::forward(std::span<const double> x) const {
  check_dim(input_dim(), x.size(), "Network::forward");
  const Vector pre = w_ * as_vector(x);
  return scale_ * pre.cwiseMax(0.0).dot(a_);
}

Vector Network::forward_batch(const Matrix& points) const {
  check_dim(input_dim(), static_cast<std::size_t>(points.cols()), "Network::forward_batch");
  const Eigen::Index n = points.rows();
  const auto block = static_cast<Eigen::Index>(detail::block_size(width()));
  Vector out(n);
  ColMatrix pre;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    pre.noalias() = w_ * points.middleRows(begin, b).transpose();
    out.segment(begin, b).noalias() = scale_ * (pre.cwiseMax(0.0).transpose() * a_);
  }
  return out;
}

Matrix Network::feature_gradient(std::span<const double> x) const {
  check_dim(input_dim(), x.size(), "Network::feature_gradient");
  const auto xv = as_vector(x);
  const Vector pre = w_ * xv;
  Matrix g(w_.rows(), w_.cols());
  for (Eigen::Index j = 0; j < w_.rows(); ++j) {
    const double coef = pre[j] >= 0.0 ? scale_ * a_[j] : 0.0;
    g.row(j) = coef * xv.transpose();
  }
  return g;
}

// Layout: "SRLN1", u64 m, u64 d, f64 rho, m x i8 signs, W, W0 (row-major
// f64). All multi-byte fields little-endian.
namespace {

constexpr char kMagic[5] = {'S', 'R', 'L', 'N', '1'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  out.insert(out.end(), raw.begin(), raw.end());
}

template <class T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  if (offset + sizeof(T) > bytes.size()) {
    throw std::runtime_error("Network::deserialize: truncated input");
  }
  std::array<std::uint8_t, sizeof(T)> raw{};
  std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  offset += sizeof(T);
  return std::bit_cast<T>(raw);
}

}  // namespace

std::vector<std::uint8_t> Network::serialize() const {
  std::vector<std::uint8_t> out;
  const std::size_t m = width();
  const std::size_t d = input_dim();
  out.reserve(5 + 24 + m + 16 * m * d);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint64_t>(out, m);
  put_le<std::uint64_t>(out, d);
  put_le<double>(out, rho_);
  for (Eigen::Index j = 0; j < a_.size(); ++j) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(a_[j])));
  }
  for (const Matrix* mat : {&w_, &w0_}) {
    for (Eigen::Index j = 0; j < mat->rows(); ++j) {
      for (Eigen::Index k = 0; k < mat->cols(); ++k) put_le<double>(out, (*mat)(j, k));
    }
  }
  return out;
}

Network Network::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) {
    throw std::runtime_error("Network::deserialize: bad magic");
  }
  std::size_t offset = 5;
  const auto m = get_le<std::uint64_t>(bytes, offset);
  const auto d = get_le<std::uint64_t>(bytes, offset);
  const auto rho = get_le<double>(bytes, offset);
  if (m == 0 || d == 0 || m > (std::uint64_t{1} << 32) || d > (std::uint64_t{1} << 32)) {
    throw std::runtime_error("Network::deserialize: implausible shape");
  }
  if (bytes.size() != offset + m + 16 * m * d) {
    throw std::runtime_error("Network::deserialize: size does not match header");
  }
  Vector a(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    a[static_cast<Eigen::Index>(j)] = static_cast<std::int8_t>(bytes[offset++]);
  }
  Matrix w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  Matrix w0(w.rows(), w.cols());
  for (Matrix* mat : {&w, &w0}) {
    for (Eigen::Index j = 0; j < mat->rows(); ++j) {
      for (Eigen::Index k = 0; k < mat->cols(); ++k) (*mat)(j, k) = get_le<double>(bytes, offset);
    }
  }
  return Network(rho, std::move(a), std::move(w), std::move(w0));
}

void Network::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Network Network::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

FrozenFeatures::FrozenFeatures(double rho, Vector signs, Matrix sign_source)
    : rho_(rho), a_(std::move(signs)), source_(std::move(sign_source)) {
  check_dim(static_cast<std::size_t>(source_.rows()), static_cast<std::size_t>(a_.size()),
            "FrozenFeatures signs");
  scale_ = rho_ / std::sqrt(static_cast<double>(source_.rows()));
}

FrozenFeatures FrozenFeatures::at_current(const Network& net) {
  return {net.rho(), net.signs(), net.weights()};
}

FrozenFeatures FrozenFeatures::at_init(const Network& net) {
  return {net.rho(), net.signs(), net.init_weights()};
}

double FrozenFeatures::forward(const Matrix& v, std::span<const double> x) const {
  if (v.rows() != source_.rows() || v.cols() != source_.cols()) {
    throw std::invalid_argument("FrozenFeatures::forward: shape mismatch");
  }
  check_dim(input_dim(), x.size(), "FrozenFeatures::forward");
  const auto xv = as_vector(x);
  const Vector gate = source_ * xv;
  const Vector pre = v * xv;
  return scale_ * (gate.array() >= 0.0).select(pre.array(), 0.0).matrix().dot(a_);
}

Vector FrozenFeatures::forward_batch(const Matrix& v, const Matrix& points) const {
  if (v.rows() != source_.rows() || v.cols() != source_.cols()) {
    throw std::invalid_argument("FrozenFeatures::forward_batch: shape mismatch");
  }
  check_dim(input_dim(), static_cast<std::size_t>(points.cols()),
            "FrozenFeatures::forward_batch");
  const Eigen::Index n = points.rows();
  const auto block = static_cast<Eigen::Index>(detail::block_size(width()));
  Vector out(n);
  ColMatrix gate;
  ColMatrix pre;
  for (Eigen::Index begin = 0; begin < n; begin += block) {
    const Eigen::Index b = std::min(block, n - begin);
    const auto xb = points.middleRows(begin, b).transpose();
    gate.noalias() = source_ * xb;
    pre.noalias() = v * xb;
    out.segment(begin, b).noalias() =
        scale_ * ((gate.array() >= 0.0).select(pre.array(), 0.0).matrix().transpose() * a_);
  }
  return out;
}

AugmentedInput augment(std::span<const double> x, bool assert_unit_ball) {
  const auto xv = as_vector(x);
  if (assert_unit_ball && xv.norm() > 1.0 + 1e-12) {
    throw std::invalid_argument("augment: input norm exceeds 1");
  }
  AugmentedInput out{Vector(xv.size() + 1)};
  const double s = 1.0 / std::sqrt(2.0);
  out.x_tilde.head(xv.size()) = s * xv;
  out.x_tilde[xv.size()] = s;
  return out;
}

Matrix augment_rows(const Matrix& points) {
  Matrix out(points.rows(), points.cols() + 1);
  const double s = 1.0 / std::sqrt(2.0);
  out.leftCols(points.cols()) = s * points;
  out.col(points.cols()).setConstant(s);
  return out;
}

}  // namespace srl
