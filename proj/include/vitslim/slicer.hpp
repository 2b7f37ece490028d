#pragma once

#include <cstddef>
#include <vector>

#include "vitslim/arch.hpp"
#include "vitslim/masks.hpp"
#include "vitslim/ranking.hpp"
#include "vitslim/vit.hpp"

namespace vitslim {

// Fractions of each mask family to keep, each in (0, 1].
struct Budget {
  double attn = 1.0;
  double mlp = 1.0;
  double patch = 1.0;

  void validate() const;
};

// ceil(fraction * total), tolerant of binary rounding in the product
// (0.7 * 10 keeps 7, not 8).
std::size_t keep_count(double fraction, std::size_t total);

// keep'(0) = keep(0), keep'(l) = keep(l) ∩ keep'(l-1).
std::vector<std::vector<std::size_t>> enforce_patch_nesting(
    std::vector<std::vector<std::size_t>> keep_sets);

// Keeps the globally top-ranked entries of each family (one pool per family
// across all layers and heads), then nests the patch sets unless disabled.
SlimArchitecture select_architecture(const RankedMasks& ranked, const Budget& budget,
                                     const ViTConfig& config, bool enforce_nesting = true);

// Extracts the structurally smaller model described by `arch` from a
// supernet by copying the kept rows/columns of its super weight matrices.
Model slice_model(const Model& supernet, const SlimArchitecture& arch);

// 0/1 masks realizing `arch` on the supernet. Kept patches get a raw value
// whose tanh is exactly 1.0; dropped patches get 0.
MaskSet binarize_masks(const SlimArchitecture& arch, const ViTConfig& config);

inline constexpr double kPatchKeepRaw = 30.0;

}  // namespace vitslim
