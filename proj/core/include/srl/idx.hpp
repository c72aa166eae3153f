#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "srl/sample.hpp"

namespace srl {

// Malformed or truncated IDX input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

// Big-endian IDX: magic 0x00000803 with (count, rows, cols) for images,
// magic 0x00000801 with (count) for labels.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

// Keeps the two classes, labels `positive` as +1 and `negative` as -1,
// scales pixels by 1 / (255 sqrt(d)) and divides by max(1, ||x||).
// Throws std::invalid_argument for positive == negative or a class with no
// examples, FormatError for malformed files or mismatched counts.
LabeledSample load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       int positive, int negative);
LabeledSample idx_to_sample(const IdxImages& images, std::span<const std::uint8_t> labels,
                            int positive, int negative);

}  // namespace srl
