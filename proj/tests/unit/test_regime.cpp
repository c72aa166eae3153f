#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "srl/regime.hpp"

using namespace srl;

TEST(CeilTolerant, AbsorbsRoundoff) {
  EXPECT_EQ(ceil_tolerant(1.0 / (8.0 * 0.0125)), 10u);
  EXPECT_EQ(ceil_tolerant(10.0 * (1 + 1e-14)), 10u);
  EXPECT_EQ(ceil_tolerant(10.001), 11u);
  EXPECT_EQ(ceil_tolerant(0.2), 1u);
  EXPECT_THROW(ceil_tolerant(std::nan("")), std::invalid_argument);
}

TEST(DeriveRegime, Easy) {
  const auto c = derive_regime("easy", 1.0 / 80.0);
  EXPECT_EQ(c.rho, 1.0);
  EXPECT_EQ(c.m, 65536u);
  EXPECT_FALSE(c.m_capped);
  EXPECT_EQ(c.t, 10u);
  EXPECT_EQ(c.n, 6400u);
  EXPECT_EQ(c.eta, 4.0);
  EXPECT_EQ(c.eps_gd, 1.0 / 80.0);
  EXPECT_TRUE(std::isinf(c.R_gd));
}

TEST(DeriveRegime, ClairvoyantPowersOfTwo) {
  const auto c = derive_regime("clairvoyant", 0.5);
  EXPECT_EQ(c.m, 256u);
  EXPECT_EQ(c.rho, 0.5);
  EXPECT_EQ(c.eta, 16.0);
  EXPECT_EQ(c.t, 1u);
  EXPECT_EQ(c.n, 4u);
  EXPECT_EQ(c.R_gd, 8.0);
}

TEST(DeriveRegime, WorstcaseCapsAndInfinity) {
  const auto c = derive_regime("worstcase", 0.25);
  // 4^{40/3} is about 1.1e8, far past the desk cap.
  EXPECT_EQ(c.m, kDeskCap);
  EXPECT_TRUE(c.m_capped);
  EXPECT_EQ(c.rho, std::pow(65536.0, -0.125));
  EXPECT_EQ(c.rho, 0.25);
  EXPECT_EQ(c.eta, 64.0);
  EXPECT_TRUE(std::isinf(c.R_gd));
  const nlohmann::json j = c;
  EXPECT_EQ(j["R_gd"], "inf");
  EXPECT_EQ(j["m_capped"], true);
}

TEST(DeriveRegime, EtaTimesRhoSquaredIsFour) {
  for (const char* r : {"easy", "clairvoyant", "worstcase"}) {
    for (double eps : {0.5, 0.3, 0.1, 1.0 / 64.0, 0.01}) {
      const auto c = derive_regime(r, eps);
      EXPECT_NEAR(c.eta * c.rho * c.rho, 4.0, 1e-12) << r << " " << eps;
    }
  }
  for (double xi : {0.1, 0.5, 0.9}) {
    const auto c = derive_consistency(1024, xi);
    EXPECT_NEAR(c.eta * c.rho * c.rho, 4.0, 1e-12);
  }
}

TEST(DeriveRegime, Rejects) {
  EXPECT_THROW(derive_regime("hard", 0.1), std::invalid_argument);
  EXPECT_THROW(derive_regime("easy", 0.0), std::invalid_argument);
  EXPECT_THROW(derive_regime("easy", 0.75), std::invalid_argument);
  EXPECT_THROW(derive_consistency(1, 0.5), std::invalid_argument);
  EXPECT_THROW(derive_consistency(100, 1.0), std::invalid_argument);
}

TEST(DeriveConsistency, HandExample) {
  const auto c = derive_consistency(256, 0.925);
  EXPECT_EQ(c.m, 256u);
  EXPECT_EQ(c.rho, 0.5);
  EXPECT_EQ(c.eta, 16.0);
  EXPECT_NEAR(c.eps_gd, std::pow(256.0, -0.075), 1e-15);
  EXPECT_NEAR(c.eps_gd, 0.6598, 5e-5);
  EXPECT_EQ(c.t, 1u);
  EXPECT_EQ(c.n, 256u);
  EXPECT_TRUE(std::isinf(c.R_gd));
}

TEST(DeriveConsistency, XiNearOne) {
  const auto c = derive_consistency(256, 1.0 - 1e-14);
  EXPECT_EQ(c.m, 1u);
  EXPECT_EQ(c.t, 1u);
  EXPECT_EQ(c.rho, 1.0);
}

TEST(DeriveConsistency, HalfUnderCaps) {
  const auto c = derive_consistency(4096, 0.5);
  EXPECT_EQ(c.m, kDeskCap);
  EXPECT_TRUE(c.m_capped);
  EXPECT_EQ(c.rho, 0.25);
  EXPECT_EQ(c.eta, 64.0);
  EXPECT_EQ(c.t, 8u);
  EXPECT_EQ(c.eps_gd, 1.0 / 64.0);
  const auto again = derive_consistency(4096, 0.5);
  EXPECT_EQ(nlohmann::json(c), nlohmann::json(again));
}

TEST(BoundTerms, PrintedFormulas) {
  auto cfg = derive_regime("clairvoyant", 0.5);
  cfg.m = 4096;
  cfg.n = 4096;
  cfg.rho = std::pow(4096.0, -0.125);
  cfg.d = 2;
  cfg.t = 8;
  cfg.R_gd = kInfinity;
  const auto b = compute_bound_terms(cfg, 4.0, 0.5, 0.45);
  const double e = std::numbers::e;
  const double L = std::log(e * 4096.0 * 4096.0 * 8.0 / 0.05);
  EXPECT_NEAR(b.tau_n, 80 * std::pow(2 * L, 1.5) / 64.0, 1e-12 * b.tau_n);
  EXPECT_TRUE(b.vacuous);
  EXPECT_TRUE(b.tau1_violation);
  EXPECT_EQ(b.k_bin, 0.5);
  const auto with_bayes = compute_bound_terms(cfg, 4.0, 0.5, 0.45, 0.4);
  EXPECT_NEAR(with_bayes.k_bin, 0.1, 1e-15);
}

TEST(BoundTerms, RadiusBranchAndMonotonicity) {
  auto cfg = derive_regime("clairvoyant", 0.5);
  cfg.R_gd = 1e-3;
  auto b = compute_bound_terms(cfg, 4.0, 0.3, 0.3);
  EXPECT_EQ(b.B, 1e-3);

  // Larger m lowers tau_1 and the m-dependent part of tau_0 at fixed B.
  cfg.R_gd = 5.0;
  cfg.rho = 0.5;
  cfg.m = 1024;
  const auto small = compute_bound_terms(cfg, 4.0, 0.3, 0.3);
  cfg.m = 1 << 20;
  const auto large = compute_bound_terms(cfg, 4.0, 0.3, 0.3);
  ASSERT_EQ(small.B, 5.0);
  ASSERT_EQ(large.B, 5.0);
  EXPECT_LT(large.tau_1, small.tau_1);
  const auto m_part = [](const BoundTerms& t, double rho, double d, double m) {
    return t.tau_0 - 6 * rho * d * std::log(std::numbers::e * m * d * d / 0.05);
  };
  EXPECT_LT(m_part(large, 0.5, 2, 1 << 20), m_part(small, 0.5, 2, 1024));
}

TEST(BoundTerms, RejectsBadInputs) {
  RegimeConfig cfg;
  EXPECT_THROW(compute_bound_terms(cfg, 0.0, 0.1, 0.1), std::invalid_argument);
  cfg.delta = 1.0;
  EXPECT_THROW(compute_bound_terms(cfg, 4.0, 0.1, 0.1), std::invalid_argument);
}

TEST(EffectiveR, Max) {
  EXPECT_EQ(effective_R(1.0, 2.0), 4.0);
  EXPECT_EQ(effective_R(5.0, 2.0), 5.0);
  EXPECT_EQ(effective_R(0.5, 6.0), 6.0);
}

TEST(RegimeConfigJson, RoundTripAndUnknownField) {
  auto c = derive_consistency(1024, 0.5);
  c.reference = {{"kind", "constant"}, {"vector", {0.0, 1.0}}};
  c.distribution_params = {{"s", 0.1}};
  const nlohmann::json j = c;
  const auto back = j.get<RegimeConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.rho, c.rho);
  EXPECT_EQ(back.eps_gd, c.eps_gd);
  EXPECT_TRUE(std::isinf(back.R_gd));

  auto bad = j;
  bad["width"] = 3;
  EXPECT_THROW(bad.get<RegimeConfig>(), std::invalid_argument);
}

TEST(TrainConfigFromRegime, CopiesSchedule) {
  const auto c = derive_regime("clairvoyant", 0.25);
  const auto t = train_config(c);
  EXPECT_EQ(t.eta, c.eta);
  EXPECT_EQ(t.t_max, c.t);
  EXPECT_EQ(t.R_gd, c.R_gd);
  EXPECT_EQ(t.eps_gd, c.eps_gd);
}
