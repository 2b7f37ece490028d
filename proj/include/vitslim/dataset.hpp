#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vitslim/config.hpp"
#include "vitslim/rng.hpp"
#include "vitslim/tensor.hpp"

namespace vitslim {

struct NormStats {
  double mean = 0.0;
  double stddev = 1.0;
};

// n images [C×S×S], normalized, with integer labels.
struct Dataset {
  std::size_t n = 0;
  std::size_t channels = 1;
  std::size_t size = 0;  // S
  std::vector<double> images;
  std::vector<std::int32_t> labels;
  std::string split;
  std::string provenance;
  NormStats stats;  // applied as (x - mean) / stddev

  std::size_t image_numel() const { return channels * size * size; }
  // Normalized value of a zero pixel; used to fill padding.
  double background() const { return (0.0 - stats.mean) / stats.stddev; }

  // Throws DataError if labels fall outside [0, classes) or sizes disagree.
  void validate(std::size_t num_classes) const;
  void check_compatible(const ViTConfig& config) const;
};

// Big-endian IDX pair (magic 0x803 images, 0x801 labels). Pixels are scaled
// to [0,1] and normalized by `stats`, or by the file's own mean/std if none
// is given.
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                         const std::string& split, std::optional<NormStats> stats = {});

// Class-conditional Gaussian blobs: class c centers a blob on a circle
// around the image center, with per-sample position jitter and pixel noise.
// Stratified: every class gets n / classes samples (the first n % classes
// classes one more), in a seeded shuffled order.
Dataset gen_synthetic(std::uint64_t seed, std::size_t n, const ViTConfig& config,
                      const std::string& split = "train", std::optional<NormStats> stats = {});

struct Augment {
  std::size_t crop_pad = 0;  // random crop after zero padding by this many pixels
  bool flip = false;         // random horizontal flip

  bool enabled() const { return crop_pad > 0 || flip; }
};

void to_json(nlohmann::json& j, const Augment& a);
void from_json(const nlohmann::json& j, Augment& a);

// Images [B×C×S×S] for the given sample indices, augmented with `rng` if
// `augment` is enabled.
Tensor make_batch(const Dataset& data, std::span<const std::size_t> indices,
                  const Augment& augment, Rng* rng);
std::vector<std::int32_t> batch_labels(const Dataset& data, std::span<const std::size_t> indices);

}  // namespace vitslim
