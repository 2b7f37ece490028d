#pragma once

#include "vitslim/config.hpp"
#include "vitslim/tensor.hpp"

namespace vitslim {

// Learnable soft masks searched jointly with the weights. All three tensors
// are leaves that require grad.
struct MaskSet {
  Tensor attn;       // [L×H×d] per-head q/k/v dim masks, init 1
  Tensor mlp;        // [L×M] MLP hidden dim masks, init 1
  Tensor patch_raw;  // [L×N] patch masks before tanh, init 3

  // Throws ConfigError if shapes disagree with the config.
  void validate(const ViTConfig& config) const;
  MaskSet clone() const;
};

inline constexpr double kMaskInit = 1.0;
inline constexpr double kPatchMaskInit = 3.0;

enum class PatchPenaltyTarget { activated, raw };

// Per-family L1 weights. Defaults are the tuned values for joint
// attention/MLP/patch search.
struct SparsityWeights {
  double attn = 2e-4;
  double mlp = 5e-5;
  double patch = 1e-4;
  PatchPenaltyTarget patch_target = PatchPenaltyTarget::activated;

  void validate() const;
};

MaskSet init_masks(const ViTConfig& config);

// tanh(patch_raw), differentiable.
Tensor effective_patch_masks(const MaskSet& masks);

// attn·‖z_a‖₁ + mlp·‖z_m‖₁ + patch·‖tanh(z_p)‖₁ as a scalar tensor.
Tensor sparsity_penalty(const MaskSet& masks, const SparsityWeights& weights);

}  // namespace vitslim
