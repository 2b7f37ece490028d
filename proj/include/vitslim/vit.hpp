#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitslim/arch.hpp"
#include "vitslim/config.hpp"
#include "vitslim/masks.hpp"
#include "vitslim/tensor.hpp"

namespace vitslim {

// Weights of one pre-norm transformer block. q/k/v/proj matrices hold the
// kept head dims of every head side by side, head 0 first; in the supernet
// these are the full [D × H·d] super weight matrices.
struct LayerParams {
  Tensor norm1_gamma, norm1_beta;
  Tensor wq, bq, wk, bk, wv, bv;  // [D × W], [W] with W = kept attention width
  Tensor wo, bo;                  // [W × D], [D]
  Tensor norm2_gamma, norm2_beta;
  Tensor w1, b1;                  // [D × M'], [M']
  Tensor w2, b2;                  // [M' × D], [D]
};

struct ModelParams {
  Tensor patch_w;    // [patch_dim × D]
  Tensor patch_b;    // [D]
  Tensor cls_token;  // [D]; undefined without a class token
  Tensor pos_embed;  // [(first_patch + kept layer-0 patches) × D]
  std::vector<LayerParams> layers;
  Tensor norm_gamma, norm_beta;
  Tensor head_w;     // [D × classes]
  Tensor head_b;     // [classes]

  // Stable (name, tensor) listing used by the optimizer and checkpoints.
  // The tensors alias the parameters.
  std::vector<std::pair<std::string, Tensor>> named() const;
  std::size_t count() const;
};

// A supernet (full architecture) or a sliced sub-network of it. The config
// always describes the supernet the model was derived from.
struct Model {
  ViTConfig config;
  SlimArchitecture arch;
  ModelParams params;

  Model clone() const;
  // Throws ConfigError if parameter shapes disagree with config/arch.
  void validate() const;
};

// Truncated-normal(0.02) weights, zero biases, unit layernorm gains.
Model init_model(const ViTConfig& config, std::uint64_t seed);

// All-zero parameters shaped for `arch`, to be
// filled from a checkpoint.
Model allocate_model(const ViTConfig& config, const SlimArchitecture& arch);

// Flattens the listed patches of images[B×C×S×S] into [B×K×patch_dim] in
// (channel, row, col) order.
Tensor patchify(const Tensor& images, const ViTConfig& config,
                std::span<const std::size_t> patches);

// Projected patches with the class token prepended and positions added.
Tensor patch_embed(const Model& model, const Tensor& images);

// Pre-norm attention sub-block with residual. attn_mask, if defined, is the
// [H·d] mask of this layer applied to q, k and v alike.
Tensor mhsa_forward(const Tensor& x, const LayerParams& layer, const LayerArch& arch,
                    const ViTConfig& config, const Tensor& attn_mask = {});

// Pre-norm MLP sub-block with residual; mlp_mask multiplies gelu(f1(x)).
Tensor mlp_forward(const Tensor& x, const LayerParams& layer, const Tensor& mlp_mask = {});

// Logits [B×classes]. masks == nullptr behaves exactly like all-ones masks.
Tensor forward(const Model& model, const MaskSet* masks, const Tensor& images);

inline constexpr double kLayerNormEps = 1e-6;

}  // namespace vitslim
