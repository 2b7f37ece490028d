#pragma once

#include <cstddef>

#include "json.hpp"

namespace vitslim {

// Static architecture hyperparameters of the supernet.
struct ViTConfig {
  std::size_t layers = 4;       // L
  std::size_t heads = 3;        // H
  std::size_t head_dim = 8;     // d, maximum per-head dim
  std::size_t embed_dim = 24;   // D
  std::size_t mlp_dim = 48;     // M, maximum MLP hidden dim
  std::size_t patch_size = 7;
  std::size_t image_size = 28;
  std::size_t channels = 1;
  std::size_t num_classes = 10;
  bool use_class_token = true;

  std::size_t grid() const { return image_size / patch_size; }
  std::size_t num_patches() const { return grid() * grid(); }  // N
  std::size_t patch_dim() const { return patch_size * patch_size * channels; }
  // Index of the first patch token in the sequence (1 with a class token).
  std::size_t first_patch() const { return use_class_token ? 1 : 0; }

  // Throws ConfigError on inconsistent dimensions.
  void validate() const;

  bool operator==(const ViTConfig&) const = default;
};

void to_json(nlohmann::json& j, const ViTConfig& c);
// Rejects unknown keys; missing keys keep their defaults. An optional
// "num_patches" key is checked against image_size/patch_size.
void from_json(const nlohmann::json& j, ViTConfig& c);

}  // namespace vitslim
