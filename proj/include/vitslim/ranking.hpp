#pragma once

#include <cstddef>
#include <vector>

#include "vitslim/masks.hpp"

namespace vitslim {

struct RankedEntry {
  std::size_t index;  // flat index into the family tensor
  double value;       // final mask value (tanh-activated for patches)
};

// Per family, every flat index ordered by descending |value|; ties keep the
// lower flat index first.
struct RankedMasks {
  std::vector<RankedEntry> attn;   // over L·H·d
  std::vector<RankedEntry> mlp;    // over L·M
  std::vector<RankedEntry> patch;  // over L·N
};

std::vector<RankedEntry> rank_values(std::span<const double> values);
RankedMasks rank_masks(const MaskSet& masks);

}  // namespace vitslim
