#include "srl/idx.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace srl {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("IDX: truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("IDX: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0) != kImageMagic) throw FormatError("IDX images: bad magic");
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  if (out.rows == 0 || out.cols == 0) throw FormatError("IDX images: zero dimension");
  if (out.rows * out.cols > bytes.size() || out.count > bytes.size()) {
    throw FormatError("IDX images: header dimensions exceed file size");
  }
  const std::size_t payload = out.count * out.rows * out.cols;
  if (bytes.size() != 16 + payload) {
    throw FormatError("IDX images: expected " + std::to_string(16 + payload) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (read_be32(bytes, 0) != kLabelMagic) throw FormatError("IDX labels: bad magic");
  const std::size_t count = read_be32(bytes, 4);
  if (bytes.size() != 8 + count) {
    throw FormatError("IDX labels: expected " + std::to_string(8 + count) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  return {bytes.begin() + 8, bytes.end()};
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(slurp(path));
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(slurp(path));
}

LabeledSample idx_to_sample(const IdxImages& images, std::span<const std::uint8_t> labels,
                            int positive, int negative) {
  if (positive == negative) throw std::invalid_argument("IDX: class pair must be distinct");
  if (labels.size() != images.count) throw FormatError("IDX: image and label counts differ");

  std::vector<std::size_t> keep;
  bool saw_pos = false, saw_neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == positive) saw_pos = true;
    if (labels[i] == negative) saw_neg = true;
    if (labels[i] == positive || labels[i] == negative) keep.push_back(i);
  }
  if (!saw_pos || !saw_neg) throw std::invalid_argument("IDX: class pair absent from labels");

  const std::size_t d = images.rows * images.cols;
  const double scale = 1.0 / (255.0 * std::sqrt(static_cast<double>(d)));
  LabeledSample out;
  out.points.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(d));
  out.labels.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const std::uint8_t* px = images.pixels.data() + keep[r] * d;
    for (std::size_t k = 0; k < d; ++k) out.points(row, static_cast<Eigen::Index>(k)) = px[k] * scale;
    const double norm = out.points.row(row).norm();
    if (norm > 1.0) out.points.row(row) /= norm;
    out.labels[row] = labels[keep[r]] == positive ? 1.0 : -1.0;
  }
  return out;
}

LabeledSample load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       int positive, int negative) {
  const auto img = read_idx_images(images);
  const auto lab = read_idx_labels(labels);
  return idx_to_sample(img, lab, positive, negative);
}

}  // namespace srl
