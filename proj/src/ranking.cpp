#include "vitslim/ranking.hpp"

#include <algorithm>
#include <cmath>

#include "vitslim/autograd.hpp"
#include "vitslim/ops.hpp"

namespace vitslim {

std::vector<RankedEntry> rank_values(std::span<const double> values) {
  std::vector<RankedEntry> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.push_back({i, values[i]});
  std::stable_sort(out.begin(), out.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return std::abs(a.value) > std::abs(b.value);
  });
  return out;
}

RankedMasks rank_masks(const MaskSet& masks) {
  NoGradGuard no_grad;
  const Tensor patch = effective_patch_masks(masks);
  return {rank_values(masks.attn.data()), rank_values(masks.mlp.data()),
          rank_values(patch.data())};
}

}  // namespace vitslim
