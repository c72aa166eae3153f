#pragma once

#include <cstdint>

#include "srl/linalg.hpp"

namespace srl {

// Labeled points: one example per row of `points`, labels in {-1, +1}.
struct LabeledSample {
  Matrix points;
  Vector labels;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
};

}  // namespace srl
