#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "vitslim/arch.hpp"
#include "vitslim/config.hpp"

// Closed-form parameter and MAC counts.
//
// MAC convention: one multiply-accumulate per scalar multiply inside a matrix
// product (patch projection, q/k/v, attention logits, attention-weighted
// values, output projection, MLP, classifier). Softmax, layernorm, GELU and
// residual additions are not counted. Counts are per image.
namespace vitslim {

struct LayerCost {
  std::uint64_t tokens = 0;  // sequence length entering the block
  std::uint64_t qkv = 0;
  std::uint64_t attention = 0;  // logits + weighted values
  std::uint64_t projection = 0;
  std::uint64_t mlp = 0;
  std::uint64_t params = 0;

  std::uint64_t macs() const { return qkv + attention + projection + mlp; }
};

struct CostReport {
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t embed_macs = 0;
  std::uint64_t head_macs = 0;
  std::uint64_t embed_params = 0;  // patch projection, class token, positions
  std::uint64_t head_params = 0;   // final norm + classifier
  std::vector<LayerCost> layers;
  double attn_keep = 1.0;   // realized kept fraction of attention dims
  double mlp_keep = 1.0;
  double patch_keep = 1.0;  // realized kept fraction of (layer, patch) slots
};

std::uint64_t count_params(const ViTConfig& config, const SlimArchitecture& arch);
std::uint64_t count_params(const ViTConfig& config);
std::uint64_t count_macs(const ViTConfig& config, const SlimArchitecture& arch);
std::uint64_t count_macs(const ViTConfig& config);

CostReport cost_report(const ViTConfig& config, const SlimArchitecture& arch);

void to_json(nlohmann::json& j, const CostReport& report);
std::string format_cost_table(const CostReport& report);

}  // namespace vitslim
