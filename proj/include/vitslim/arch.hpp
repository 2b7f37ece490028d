#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

#include "vitslim/config.hpp"

namespace vitslim {

struct LayerArch {
  // Kept q/k/v dims of each head, ascending, drawn from [0, d). Empty heads
  // are allowed and are removed from the sliced model.
  std::vector<std::vector<std::size_t>> heads;
  // Kept MLP hidden dims, ascending, from [0, M).
  std::vector<std::size_t> mlp;
  // Patches alive at this layer's entry, ascending, from [0, N). The class
  // token is implicit and always kept.
  std::vector<std::size_t> patches;

  std::size_t attn_width() const;  // sum of kept head dims
  bool operator==(const LayerArch&) const = default;
};

// A concrete sub-network of the supernet.
struct SlimArchitecture {
  std::vector<LayerArch> layers;

  static SlimArchitecture full(const ViTConfig& config);

  bool is_full(const ViTConfig& config) const;
  bool patches_nested() const;
  // Throws ConfigError naming the offending layer/head.
  void validate(const ViTConfig& config) const;

  bool operator==(const SlimArchitecture&) const = default;
};

// {"layers":[{"heads":[[...],...],"mlp":[...],"patches":[...]},...]}
void to_json(nlohmann::json& j, const SlimArchitecture& arch);
void from_json(const nlohmann::json& j, SlimArchitecture& arch);

}  // namespace vitslim
