#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "srl/network.hpp"
#include "srl/rng.hpp"

using namespace srl;

namespace {

Network single(double rho, std::vector<double> w, std::vector<double> a) {
  const auto m = static_cast<Eigen::Index>(a.size());
  const auto d = static_cast<Eigen::Index>(w.size() / a.size());
  Matrix W(m, d);
  for (Eigen::Index i = 0; i < m * d; ++i) W.data()[i] = w[static_cast<std::size_t>(i)];
  return Network(rho, Eigen::Map<Vector>(a.data(), m), W);
}

std::vector<double> unit_point(Rng& rng, std::size_t d) {
  std::vector<double> x(d);
  double norm = 0;
  for (auto& v : x) {
    v = rng.gaussian();
    norm += v * v;
  }
  for (auto& v : x) v /= std::sqrt(norm);
  return x;
}

}  // namespace

TEST(Network, ForwardExamples) {
  const auto n1 = single(1.0, {1, 0}, {1});
  EXPECT_EQ(n1.forward(std::vector<double>{1, 0}), 1.0);
  EXPECT_EQ(n1.forward(std::vector<double>{-1, 0}), 0.0);
  const auto n2 = single(2.0, {1, 0, 1, 0}, {1, -1});
  EXPECT_EQ(n2.forward(std::vector<double>{1, 0}), 0.0);
}

TEST(Network, FeatureGradientExamples) {
  const auto n1 = single(1.0, {1, 0}, {1});
  const Matrix g = n1.feature_gradient(std::vector<double>{1, 0});
  EXPECT_EQ(g(0, 0), 1.0);
  EXPECT_EQ(g(0, 1), 0.0);

  const auto net = Network::init(50, 3, 0.7, 1);
  EXPECT_EQ(net.feature_gradient(std::vector<double>{0, 0, 0}).norm(), 0.0);
}

TEST(Network, InitIsDeterministic) {
  const auto a = Network::init(64, 5, 0.5, 99);
  const auto b = Network::init(64, 5, 0.5, 99);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.signs(), b.signs());
  const auto c = Network::init(64, 5, 0.5, 100);
  EXPECT_NE(a.weights(), c.weights());
}

TEST(Network, InitStreamOrder) {
  // W row-major from the Gaussian stream, then the spare is dropped and one
  // sign per row follows.
  Rng rng(12);
  Matrix w(3, 2);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index k = 0; k < 2; ++k) w(i, k) = rng.gaussian();
  rng.discard_spare();
  Vector a(3);
  for (Eigen::Index i = 0; i < 3; ++i) a[i] = rng.sign();
  const auto net = Network::init(3, 2, 1.0, 12);
  EXPECT_EQ(net.weights(), w);
  EXPECT_EQ(net.signs(), a);
  EXPECT_EQ(net.init_weights(), w);
}

TEST(Network, InitStatistics) {
  const auto net = Network::init(10000, 10, 1.0, 3);
  EXPECT_LT(std::abs(net.weights().mean()), 3.5 / std::sqrt(1e5));
  const auto& a = net.signs();
  EXPECT_GT((a.array() > 0).count(), 0);
  EXPECT_GT((a.array() < 0).count(), 0);
  EXPECT_DOUBLE_EQ(net.output_scale(), 1.0 / 100.0);
}

TEST(Network, GradientNormIdentity) {
  Rng rng(8);
  const auto net = Network::init(200, 4, 0.6, 8);
  for (int i = 0; i < 50; ++i) {
    auto x = unit_point(rng, 4);
    const double c = rng.uniform(0.1, 1.0);
    for (auto& v : x) v *= c;
    const Matrix g = net.feature_gradient(x);
    Eigen::Map<const Vector> xv(x.data(), 4);
    const double active = ((net.weights() * xv).array() >= 0).cast<double>().sum();
    const double expected_sq = 0.36 / 200.0 * active * xv.squaredNorm();
    EXPECT_NEAR(g.squaredNorm(), expected_sq, 1e-12);
    EXPECT_LE(g.norm(), 0.6 * xv.norm() + 1e-12);
  }
}

TEST(Network, PositiveHomogeneity) {
  Rng rng(2);
  const auto net = Network::init(100, 3, 1.0, 2);
  for (int i = 0; i < 50; ++i) {
    auto x = unit_point(rng, 3);
    const double c = rng.uniform(0.01, 5.0);
    std::vector<double> cx(x);
    for (auto& v : cx) v *= c;
    const double f = net.forward(x);
    EXPECT_NEAR(net.forward(cx), c * f, 1e-12 * std::max(1.0, std::abs(c * f)));
  }
}

TEST(Network, DirectionalDerivative) {
  Rng rng(21);
  auto net = Network::init(30, 3, 1.0, 21);
  Matrix delta(30, 3);
  for (Eigen::Index i = 0; i < delta.size(); ++i) delta.data()[i] = rng.gaussian();
  const double h = 1e-6;
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    const auto x = unit_point(rng, 3);
    Eigen::Map<const Vector> xv(x.data(), 3);
    const Vector pre = net.weights() * xv;
    if (pre.cwiseAbs().minCoeff() < 1e-3) continue;
    const double f0 = net.forward(x);
    Network moved = net;
    moved.set_weights(net.weights() + h * delta);
    const double fd = (moved.forward(x) - f0) / h;
    const double analytic = (net.feature_gradient(x).array() * delta.array()).sum();
    EXPECT_NEAR(fd, analytic, 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Network, BatchMatchesPointwise) {
  Rng rng(5);
  const auto net = Network::init(300, 3, 0.8, 5);
  Matrix pts(40, 3);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const auto x = unit_point(rng, 3);
    for (Eigen::Index k = 0; k < 3; ++k) pts(i, k) = x[static_cast<std::size_t>(k)];
  }
  const Vector f = net.forward_batch(pts);
  for (Eigen::Index i = 0; i < 40; ++i) {
    std::vector<double> x(pts.row(i).data(), pts.row(i).data() + 3);
    EXPECT_NEAR(f[i], net.forward(x), 1e-13);
  }
}

TEST(FrozenFeatures, Examples) {
  Rng rng(6);
  auto net = Network::init(120, 3, 0.9, 6);
  Matrix moved = net.weights();
  for (Eigen::Index i = 0; i < moved.size(); ++i) moved.data()[i] += 0.3 * rng.gaussian();
  net.set_weights(moved);
  const auto ff = FrozenFeatures::at_current(net);
  const Matrix zero = Matrix::Zero(120, 3);
  for (int i = 0; i < 30; ++i) {
    const auto x = unit_point(rng, 3);
    const double f = net.forward(x);
    EXPECT_NEAR(ff.forward(net.weights(), x), f, 1e-12 * std::max(1.0, std::abs(f)));
    EXPECT_EQ(ff.forward(zero, x), 0.0);
    EXPECT_NEAR(ff.forward(2.0 * net.weights(), x), 2 * f, 1e-12 * std::max(1.0, std::abs(f)));
  }
  const auto f0 = FrozenFeatures::at_init(net);
  EXPECT_EQ(f0.sign_source(), net.init_weights());
}

TEST(FrozenFeatures, BatchMatchesPointwise) {
  Rng rng(7);
  const auto net = Network::init(80, 2, 1.0, 7);
  const auto ff = FrozenFeatures::at_init(net);
  Matrix v = net.weights();
  v.array() += 0.1;
  Matrix pts(25, 2);
  for (Eigen::Index i = 0; i < 25; ++i) {
    const auto x = unit_point(rng, 2);
    pts(i, 0) = x[0];
    pts(i, 1) = x[1];
  }
  const Vector f = ff.forward_batch(v, pts);
  for (Eigen::Index i = 0; i < 25; ++i) {
    std::vector<double> x{pts(i, 0), pts(i, 1)};
    EXPECT_NEAR(f[i], ff.forward(v, x), 1e-13);
  }
}

TEST(Augment, Examples) {
  auto a = augment(std::vector<double>{0.0});
  EXPECT_EQ(a.x_tilde.size(), 2);
  EXPECT_EQ(a.x_tilde[0], 0.0);
  EXPECT_NEAR(a.x_tilde[1], 1 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(a.x_tilde.norm(), 1 / std::sqrt(2.0), 1e-15);

  a = augment(std::vector<double>{0.6, 0.8});
  EXPECT_NEAR(a.x_tilde[0], 0.6 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(a.x_tilde[1], 0.8 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(a.x_tilde[2], 1 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(a.x_tilde.norm(), 1.0, 1e-15);

  EXPECT_THROW(augment(std::vector<double>{1.0, 0.5}), std::invalid_argument);
  EXPECT_NO_THROW(augment(std::vector<double>{1.0, 0.5}, false));
}

TEST(Augment, RowsMatchPointwise) {
  Matrix pts(2, 2);
  pts << 0.6, 0.8, -0.1, 0.2;
  const Matrix out = augment_rows(pts);
  ASSERT_EQ(out.cols(), 3);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const auto a = augment(std::vector<double>{pts(i, 0), pts(i, 1)});
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_EQ(out(i, k), a.x_tilde[k]);
  }
}

TEST(Network, SerializationRoundTrip) {
  auto net = Network::init(17, 4, 0.37, 44);
  Matrix w = net.weights();
  w(3, 2) += 1.25;
  net.set_weights(w);
  const auto bytes = net.serialize();
  ASSERT_GE(bytes.size(), 5u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 5), "SRLN1");
  const auto back = Network::deserialize(bytes);
  EXPECT_EQ(back.rho(), net.rho());
  EXPECT_EQ(back.signs(), net.signs());
  EXPECT_EQ(back.weights(), net.weights());
  EXPECT_EQ(back.init_weights(), net.init_weights());

  const auto path = std::filesystem::temp_directory_path() / "srl_net_roundtrip.bin";
  net.save(path);
  const auto loaded = Network::load(path);
  EXPECT_EQ(loaded.weights(), net.weights());
  std::filesystem::remove(path);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_ANY_THROW(Network::deserialize(truncated));
}

TEST(Network, SetWeightsShapeChecked) {
  auto net = Network::init(4, 2, 1.0, 0);
  EXPECT_THROW(net.set_weights(Matrix::Zero(4, 3)), std::invalid_argument);
  net.set_weights(Matrix::Zero(4, 2));
  EXPECT_NEAR(net.distance_from_init(), net.init_weights().norm(), 1e-15);
}
