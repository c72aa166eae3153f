#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace srl {

// Linear-interpolation quantile (R type 7). Throws on empty input.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

Quartiles quartiles(const std::vector<double>& values);
void to_json(nlohmann::json& j, const Quartiles& q);

// Least-squares slope of y on x.
double fit_slope(std::span<const double> x, std::span<const double> y);

bool is_non_increasing(std::span<const double> values);
bool is_strictly_decreasing(std::span<const double> values);

}  // namespace srl
