#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "srl/idx.hpp"

using namespace srl;

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::vector<std::uint8_t> image_file(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                     std::uint8_t fill_base) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x803);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  for (std::uint32_t i = 0; i < count * rows * cols; ++i) out.push_back(static_cast<std::uint8_t>(fill_base + 37 * i));
  return out;
}

std::vector<std::uint8_t> label_file(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x801);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

void dump(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Idx, FourImageFixture) {
  const auto dir = std::filesystem::temp_directory_path() / "srl_idx_fixture";
  std::filesystem::create_directories(dir);
  auto images = image_file(6, 3, 3, 200);
  // One saturated image so the clamp is exercised.
  for (std::size_t k = 16; k < 16 + 9; ++k) images[k] = 255;
  dump(dir / "img", images);
  dump(dir / "lab", label_file({1, 5, 7, 5, 1, 2}));

  const auto s = load_idx(dir / "img", dir / "lab", 1, 5);
  ASSERT_EQ(s.size(), 4u);
  ASSERT_EQ(s.dim(), 9u);
  const std::vector<double> expected{1, -1, -1, 1};
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_EQ(s.labels[i], expected[static_cast<std::size_t>(i)]);
    EXPECT_LE(s.points.row(i).norm(), 1.0 + 1e-12);
  }
  // A saturated image scales to exactly unit norm.
  EXPECT_NEAR(s.points.row(0).norm(), 1.0, 1e-12);
  // Second kept image is index 1 in the file.
  EXPECT_NEAR(s.points(1, 0), images[16 + 9] / (255.0 * 3.0), 1e-15);
  std::filesystem::remove_all(dir);
}

TEST(Idx, DegeneratePairRejected) {
  const auto images = parse_idx_images(image_file(2, 2, 2, 0));
  const std::vector<std::uint8_t> labels{3, 4};
  EXPECT_THROW(idx_to_sample(images, labels, 3, 3), std::invalid_argument);
  EXPECT_THROW(idx_to_sample(images, labels, 3, 9), std::invalid_argument);
}

TEST(Idx, MalformedInputs) {
  auto images = image_file(4, 2, 2, 0);
  images.pop_back();
  EXPECT_THROW(parse_idx_images(images), FormatError);
  EXPECT_THROW(parse_idx_images(std::vector<std::uint8_t>{0, 0, 8}), FormatError);
  auto bad_magic = image_file(1, 2, 2, 0);
  bad_magic[3] = 0x01;
  EXPECT_THROW(parse_idx_images(bad_magic), FormatError);
  auto labels = label_file({1, 2, 3});
  labels.pop_back();
  EXPECT_THROW(parse_idx_labels(labels), FormatError);
  const auto good = parse_idx_images(image_file(2, 2, 2, 0));
  const std::vector<std::uint8_t> short_labels{1};
  EXPECT_THROW(idx_to_sample(good, short_labels, 1, 0), FormatError);
  EXPECT_THROW(read_idx_images("/nonexistent/srl.idx"), FormatError);
}
