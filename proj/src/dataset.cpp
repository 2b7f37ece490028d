#include "vitslim/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "vitslim/error.hpp"
#include "vitslim/json_util.hpp"

namespace vitslim {

void Dataset::validate(std::size_t num_classes) const {
  if (n == 0) throw DataError(split + " dataset is empty");
  if (images.size() != n * image_numel() || labels.size() != n) {
    throw DataError(split + " dataset: array sizes disagree with n=" + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw DataError(split + " dataset: label " + std::to_string(labels[i]) + " at index " +
                      std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

void Dataset::check_compatible(const ViTConfig& config) const {
  if (channels != config.channels || size != config.image_size) {
    throw DataError(split + " dataset holds " + std::to_string(channels) + "x" +
                    std::to_string(size) + "x" + std::to_string(size) + " images, model expects " +
                    std::to_string(config.channels) + "x" + std::to_string(config.image_size) +
                    "x" + std::to_string(config.image_size));
  }
  validate(config.num_classes);
}

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t offset, const std::string& path) {
  if (b.size() < offset + 4) {
    throw DataError(path + ": truncated header at byte offset " + std::to_string(offset) +
                    " (file has " + std::to_string(b.size()) + " bytes)");
  }
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

NormStats compute_stats(std::span<const double> values) {
  // Two-pass mean/variance in index order.
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  double sd = std::sqrt(sq / static_cast<double>(values.size()));
  if (!(sd > 0.0)) sd = 1.0;
  return {mean, sd};
}

void normalize(Dataset& d, std::optional<NormStats> stats) {
  d.stats = stats ? *stats : compute_stats(d.images);
  if (!(d.stats.stddev > 0.0)) throw ConfigError("normalization stddev must be positive");
  for (double& v : d.images) v = round_to_precision((v - d.stats.mean) / d.stats.stddev);
}

}  // namespace

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         const std::string& split, std::optional<NormStats> stats) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  const std::uint32_t img_magic = be32(img, 0, images_path);
  if (img_magic != 0x00000803u) {
    throw DataError(images_path + ": bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", img_magic);
      return std::string(buf);
    }() + " at byte offset 0, expected 0x00000803");
  }
  const std::uint32_t lab_magic = be32(lab, 0, labels_path);
  if (lab_magic != 0x00000801u) {
    throw DataError(labels_path + ": bad magic 0x" + [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%08x", lab_magic);
      return std::string(buf);
    }() + " at byte offset 0, expected 0x00000801");
  }
  const std::size_t count = be32(img, 4, images_path);
  const std::size_t rows = be32(img, 8, images_path);
  const std::size_t cols = be32(img, 12, images_path);
  const std::size_t label_count = be32(lab, 4, labels_path);
  if (rows != cols) {
    throw DataError(images_path + ": non-square images " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " at byte offset 8");
  }
  if (count != label_count) {
    throw DataError("image count " + std::to_string(count) + " (" + images_path +
                    ", byte offset 4) != label count " + std::to_string(label_count) + " (" +
                    labels_path + ", byte offset 4)");
  }
  const std::size_t want_img = 16 + count * rows * cols;
  if (img.size() != want_img) {
    throw DataError(images_path + ": expected " + std::to_string(want_img) + " bytes, got " +
                    std::to_string(img.size()));
  }
  const std::size_t want_lab = 8 + count;
  if (lab.size() != want_lab) {
    throw DataError(labels_path + ": expected " + std::to_string(want_lab) + " bytes, got " +
                    std::to_string(lab.size()));
  }

  Dataset d;
  d.n = count;
  d.channels = 1;
  d.size = rows;
  d.split = split;
  d.provenance = images_path + "," + labels_path;
  d.images.resize(count * rows * cols);
  for (std::size_t i = 0; i < d.images.size(); ++i) d.images[i] = img[16 + i] / 255.0;
  d.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) d.labels[i] = lab[8 + i];
  normalize(d, stats);
  return d;
}

Dataset gen_synthetic(std::uint64_t seed, std::size_t n, const ViTConfig& config,
                      const std::string& split, std::optional<NormStats> stats) {
  const std::size_t K = config.num_classes;
  if (n < K) {
    throw ConfigError("synthetic dataset needs n >= classes (" + std::to_string(n) + " < " +
                      std::to_string(K) + ")");
  }
  const std::size_t S = config.image_size;
  const std::size_t C = config.channels;
  const double center = (static_cast<double>(S) - 1.0) / 2.0;
  const double radius = static_cast<double>(S) * 8.0 / 28.0;
  const double sigma = static_cast<double>(S) * 3.0 / 28.0;

  Rng rng(seed);
  Dataset d;
  d.n = n;
  d.channels = C;
  d.size = S;
  d.split = split;
  d.provenance = "synthetic:seed=" + std::to_string(seed) + ",n=" + std::to_string(n);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.labels[i] = static_cast<std::int32_t>(i % K);
  rng.shuffle(std::span<std::int32_t>(d.labels));

  d.images.resize(n * C * S * S);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * d.labels[i] / static_cast<double>(K);
    const double cx = center + radius * std::cos(angle) + rng.normal();
    const double cy = center + radius * std::sin(angle) + rng.normal();
    double* out = d.images.data() + i * C * S * S;
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t y = 0; y < S; ++y) {
        for (std::size_t x = 0; x < S; ++x) {
          const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
          *out++ = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) + 0.3 * rng.normal();
        }
      }
    }
  }
  normalize(d, stats);
  return d;
}

void to_json(nlohmann::json& j, const Augment& a) {
  j = nlohmann::json{{"crop_pad", a.crop_pad}, {"flip", a.flip}};
}

void from_json(const nlohmann::json& j, Augment& a) {
  json_util::ObjectReader r(j, "augment");
  r.read("crop_pad", a.crop_pad);
  r.read("flip", a.flip);
  r.finish();
}

Tensor make_batch(const Dataset& data, std::span<const std::size_t> indices,
                  const Augment& augment, Rng* rng) {
  const std::size_t C = data.channels, S = data.size, per = data.image_numel();
  Tensor batch({indices.size(), C, S, S});
  auto out = batch.data();
  const bool aug = augment.enabled() && rng != nullptr;
  const long pad = static_cast<long>(augment.crop_pad);
  const double bg = data.background();
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= data.n) throw DataError("sample index out of range");
    const double* src = data.images.data() + indices[b] * per;
    double* dst = out.data() + b * per;
    if (!aug) {
      std::copy(src, src + per, dst);
      continue;
    }
    // Offsets in [-pad, pad]; a shifted-out pixel reads the padding value.
    long oy = 0, ox = 0;
    if (pad > 0) {
      oy = static_cast<long>(rng->uniform_index(2 * pad + 1)) - pad;
      ox = static_cast<long>(rng->uniform_index(2 * pad + 1)) - pad;
    }
    const bool flip = augment.flip && rng->uniform_index(2) == 1;
    const long s = static_cast<long>(S);
    for (std::size_t c = 0; c < C; ++c) {
      for (long y = 0; y < s; ++y) {
        for (long x = 0; x < s; ++x) {
          const long sy = y + oy;
          const long sx0 = x + ox;
          const long sx = flip ? s - 1 - sx0 : sx0;
          const bool inside = sy >= 0 && sy < s && sx0 >= 0 && sx0 < s;
          dst[(c * S + y) * S + x] = inside ? src[(c * S + sy) * S + sx] : bg;
        }
      }
    }
  }
  return batch;
}

std::vector<std::int32_t> batch_labels(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<std::int32_t> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(data.labels.at(i));
  return out;
}

}  // namespace vitslim
