#include "vitslim/masks.hpp"

#include "vitslim/error.hpp"
#include "vitslim/ops.hpp"

namespace vitslim {

void MaskSet::validate(const ViTConfig& config) const {
  auto check = [](const Tensor& t, const Shape& want, const char* name) {
    if (!t.defined() || t.shape() != want) {
      throw ConfigError(std::string("mask family ") + name + " has shape " +
                        (t.defined() ? to_string(t.shape()) : std::string("<missing>")) +
                        ", config needs " + to_string(want));
    }
  };
  check(attn, {config.layers, config.heads, config.head_dim}, "attn");
  check(mlp, {config.layers, config.mlp_dim}, "mlp");
  check(patch_raw, {config.layers, config.num_patches()}, "patch");
}

MaskSet MaskSet::clone() const {
  return {attn.clone_as_leaf(true), mlp.clone_as_leaf(true), patch_raw.clone_as_leaf(true)};
}

void SparsityWeights::validate() const {
  if (attn < 0.0 || mlp < 0.0 || patch < 0.0) {
    throw ConfigError("sparsity weights must be non-negative");
  }
}

MaskSet init_masks(const ViTConfig& config) {
  config.validate();
  return {Tensor::full({config.layers, config.heads, config.head_dim}, kMaskInit, true),
          Tensor::full({config.layers, config.mlp_dim}, kMaskInit, true),
          Tensor::full({config.layers, config.num_patches()}, kPatchMaskInit, true)};
}

Tensor effective_patch_masks(const MaskSet& masks) { return tanh(masks.patch_raw); }

Tensor sparsity_penalty(const MaskSet& masks, const SparsityWeights& weights) {
  weights.validate();
  const Tensor patch = weights.patch_target == PatchPenaltyTarget::activated
                           ? effective_patch_masks(masks)
                           : masks.patch_raw;
  Tensor total = add(scale(l1_norm(masks.attn), weights.attn), scale(l1_norm(masks.mlp), weights.mlp));
  return add(total, scale(l1_norm(patch), weights.patch));
}

}  // namespace vitslim
