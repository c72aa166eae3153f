#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "srl/metrics.hpp"
#include "srl/rng.hpp"

using namespace srl;

TEST(LogisticLoss, Examples) {
  EXPECT_DOUBLE_EQ(logistic_loss(0.0), std::numbers::ln2);
  const double far = logistic_loss(50.0);
  EXPECT_GT(far, 0.0);
  EXPECT_LT(far, 1e-20);
  EXPECT_NEAR(logistic_loss(-1.0), std::log1p(std::numbers::e), 1e-15);
  EXPECT_NEAR(logistic_loss(-1.0), 1.3133, 5e-5);
}

TEST(LogisticLoss, StableAtExtremes) {
  EXPECT_NEAR(logistic_loss(-1e4), 1e4, 1e-9);
  EXPECT_NEAR(logistic_loss(-40.0), 40.0 + std::exp(-40.0), 1e-12);
  EXPECT_GT(logistic_loss(700.0), 0.0);
  EXPECT_TRUE(std::isfinite(logistic_loss(-1e5)));
}

TEST(LogisticLoss, ConvexDecreasingOneLipschitz) {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-40.0, 40.0);
    const double h = 1e-3;
    const double slope = (logistic_loss(x + h) - logistic_loss(x)) / h;
    EXPECT_GE(slope, -1.0 - 1e-9);
    EXPECT_LE(slope, 0.0);
    const double second = logistic_loss(x + h) - 2 * logistic_loss(x) + logistic_loss(x - h);
    EXPECT_GE(second, -1e-12);
  }
}

TEST(LogisticLoss, SigmoidIsSlopeOfLossAtMinusMargin) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.uniform(-20.0, 20.0);
    const double h = 1e-5;
    const double fd = (logistic_loss(-(r + h)) - logistic_loss(-(r - h))) / (2 * h);
    EXPECT_NEAR(sigmoid(r), fd, 1e-6);
    EXPECT_NEAR(logistic_loss_derivative(r), -sigmoid(-r), 1e-15);
  }
}

TEST(Sigmoid, Examples) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
  for (double r : {0.1, 1.0, 7.5, 30.0, 300.0}) EXPECT_NEAR(sigmoid(r) + sigmoid(-r), 1.0, 1e-15);
}

TEST(CondProb, RejectsOutOfRange) {
  EXPECT_THROW(CondProb(-0.1), std::invalid_argument);
  EXPECT_THROW(CondProb(1.1), std::invalid_argument);
  EXPECT_THROW(CondProb(std::nan("")), std::invalid_argument);
  EXPECT_EQ(CondProb(1.0).value(), 1.0);
}

TEST(MultiplicativeRatio, Examples) {
  auto r = multiplicative_ratio_bound(0.0, 0.0);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_DOUBLE_EQ(r.bound, 1.0);
  r = multiplicative_ratio_bound(1.0, 0.0);
  EXPECT_NEAR(r.ratio, std::log1p(std::numbers::e) / std::numbers::ln2, 1e-14);
  EXPECT_NEAR(r.ratio, 1.8946, 5e-5);
  EXPECT_NEAR(r.bound, std::numbers::e, 1e-15);
  r = multiplicative_ratio_bound(5.0, -5.0);
  EXPECT_NEAR(r.ratio, std::log1p(std::exp(5.0)) / std::log1p(std::exp(-5.0)), 1e-9);
  EXPECT_NEAR(r.ratio, 745.563, 1e-3);
  EXPECT_NEAR(r.bound, std::exp(10.0), 1e-9);
  EXPECT_THROW(multiplicative_ratio_bound(-1.0, 0.0), std::invalid_argument);
}

TEST(BinaryKl, Examples) {
  EXPECT_EQ(binary_kl(CondProb(0.3), CondProb(0.3)).value, 0.0);
  EXPECT_NEAR(binary_kl(CondProb(0.75), CondProb(0.5)).value,
              0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(binary_kl(CondProb(0.75), CondProb(0.5)).value, 0.1308, 5e-5);
  EXPECT_NEAR(binary_kl(CondProb(1.0), CondProb(0.5)).value, std::numbers::ln2, 1e-15);
}

TEST(BinaryKl, BoundaryQ) {
  EXPECT_TRUE(binary_kl(CondProb(0.5), CondProb(0.0)).infinite);
  EXPECT_TRUE(binary_kl(CondProb(0.5), CondProb(1.0)).infinite);
  const auto same = binary_kl(CondProb(1.0), CondProb(1.0));
  EXPECT_FALSE(same.infinite);
  EXPECT_EQ(same.value, 0.0);
}

TEST(BinaryKl, PinskerOnGrid) {
  for (int i = 1; i < 100; ++i) {
    for (int k = 1; k < 100; ++k) {
      const double p = i / 100.0, q = k / 100.0;
      const double kl = binary_kl(CondProb(p), CondProb(q)).value;
      EXPECT_GE(kl, 2 * (p - q) * (p - q) - 1e-12) << p << " " << q;
      if (i == k) EXPECT_NEAR(kl, 0.0, 1e-12);
      else EXPECT_GT(kl, 1e-12);
    }
  }
}

TEST(BinaryEntropy, Values) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(binary_entropy(0.75), -0.75 * std::log(0.75) - 0.25 * std::log(0.25), 1e-15);
}

TEST(RiskBreakdown, Examples) {
  std::vector<RiskPoint> pts{{0.0, 0.5, 1.0}};
  auto r = risk_breakdown(pts);
  EXPECT_NEAR(r.logistic_risk, std::numbers::ln2, 1e-15);
  EXPECT_NEAR(r.excess_logistic, 0.0, 1e-15);
  EXPECT_NEAR(r.l2_calibration_sq, 0.0, 1e-15);

  pts = {{0.0, 0.75, 1.0}};
  r = risk_breakdown(pts);
  EXPECT_NEAR(r.excess_logistic, binary_kl(CondProb(0.75), CondProb(0.5)).value, 1e-15);
  EXPECT_EQ(r.excess_zero_one, 0.0);

  pts = {{-2.0, 0.75, 1.0}};
  r = risk_breakdown(pts);
  EXPECT_NEAR(r.excess_zero_one, 0.5, 1e-15);
}

TEST(RiskBreakdown, RejectsBadWeights) {
  std::vector<RiskPoint> pts{{0.0, 0.5, 0.5}};
  EXPECT_THROW(risk_breakdown(pts), std::invalid_argument);
  pts = {{0.0, 0.5, 1.5}, {0.0, 0.5, -0.5}};
  EXPECT_THROW(risk_breakdown(pts), std::invalid_argument);
}

TEST(RiskBreakdown, ChainAndDirectAggregation) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform() * 20);
    std::vector<RiskPoint> pts(k);
    double total = 0;
    for (auto& p : pts) {
      p.margin = rng.uniform(-6.0, 6.0);
      p.p_y = rng.uniform();
      p.weight = rng.uniform();
      total += p.weight;
    }
    double kl = 0, cal = 0, z = 0;
    for (auto& p : pts) {
      p.weight /= total;
      const double q = sigmoid(p.margin);
      kl += p.weight * (p.p_y * std::log(p.p_y / q) + (1 - p.p_y) * std::log((1 - p.p_y) / (1 - q)));
      cal += p.weight * (q - p.p_y) * (q - p.p_y);
      const int bayes = p.p_y >= 0.5 ? 1 : -1;
      if ((p.margin >= 0 ? 1 : -1) != bayes) z += p.weight * std::abs(2 * p.p_y - 1);
    }
    const auto r = risk_breakdown(pts);
    EXPECT_NEAR(r.binary_kl, kl, 1e-9);
    EXPECT_NEAR(r.excess_logistic, kl, 1e-9);
    EXPECT_NEAR(r.l2_calibration_sq, cal, 1e-9);
    EXPECT_NEAR(r.excess_zero_one, z, 1e-9);
    EXPECT_LE(0.5 * r.excess_zero_one * r.excess_zero_one, 2 * r.l2_calibration_sq + 1e-12);
    EXPECT_LE(2 * r.l2_calibration_sq, r.binary_kl + 1e-12);
  }
}

TEST(RiskBreakdown, JsonRoundTrip) {
  std::vector<RiskPoint> pts{{0.3, 0.6, 0.25}, {-1.2, 0.2, 0.75}};
  const auto r = risk_breakdown(pts);
  nlohmann::json j = r;
  for (const char* key : {"logistic_risk", "bayes_risk", "excess_logistic", "binary_kl",
                          "l2_calibration_sq", "excess_zero_one"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const auto back = j.get<RiskBreakdown>();
  EXPECT_EQ(back.excess_logistic, r.excess_logistic);
  EXPECT_EQ(back.l2_calibration_sq, r.l2_calibration_sq);
}
