#include <gtest/gtest.h>

#include <vector>

#include "srl/parallel.hpp"
#include "srl/stats.hpp"

using namespace srl;

TEST(Stats, QuantileType7) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_EQ(quantile(v, 0.0), 1.0);
  EXPECT_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(median(v), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  const auto q = quartiles({1, 2, 3, 4, 5});
  EXPECT_EQ(q.q1, 2.0);
  EXPECT_EQ(q.median, 3.0);
  EXPECT_EQ(q.q3, 4.0);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Stats, SlopeAndMonotone) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_NEAR(fit_slope(x, y), 2.0, 1e-14);
  const std::vector<double> flat{1, 1, 0.5};
  EXPECT_TRUE(is_non_increasing(flat));
  EXPECT_FALSE(is_strictly_decreasing(flat));
  const std::vector<double> down{3, 2, 1};
  EXPECT_TRUE(is_strictly_decreasing(down));
}

TEST(Parallel, OrderIndependentResults) {
  std::vector<std::size_t> out(1000);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = i * i; }, 4);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, 3),
               std::runtime_error);
}
