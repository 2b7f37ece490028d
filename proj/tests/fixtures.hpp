#pragma once

#include <algorithm>
#include <vector>

#include "vitslim/arch.hpp"
#include "vitslim/rng.hpp"
#include "vitslim/vit.hpp"

namespace vitslim::testing {

// Model with every parameter drawn uniformly in [-amp, amp].
inline Model uniform_model(const ViTConfig& c, std::uint64_t seed, double amp = 0.5) {
  Model m = init_model(c, seed);
  Rng rng(seed + 1000);
  for (auto& [name, t] : m.params.named()) {
    for (double& v : t.data()) v = round_to_precision(amp * (2.0 * rng.uniform() - 1.0));
  }
  return m;
}

inline MaskSet uniform_masks(const ViTConfig& c, std::uint64_t seed, double lo = -0.5,
                             double hi = 1.5) {
  MaskSet z = init_masks(c);
  Rng rng(seed);
  for (Tensor* t : {&z.attn, &z.mlp, &z.patch_raw}) {
    for (double& v : t->data()) v = round_to_precision(lo + (hi - lo) * rng.uniform());
  }
  return z;
}

inline std::vector<std::size_t> random_subset(std::size_t n, Rng& rng, double keep_prob,
                                              bool nonempty = false) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < keep_prob) out.push_back(i);
  }
  if (nonempty && out.empty()) out.push_back(rng.uniform_index(n));
  return out;
}

// Random binary architecture. Heads may come out empty. With
// `random_patches`, patch sets form a random nonempty subset chain.
inline SlimArchitecture random_arch(const ViTConfig& c, Rng& rng, bool random_patches) {
  SlimArchitecture arch = SlimArchitecture::full(c);
  std::vector<std::size_t> prev(c.num_patches());
  for (std::size_t i = 0; i < prev.size(); ++i) prev[i] = i;
  for (LayerArch& layer : arch.layers) {
    const double p = rng.uniform();
    for (auto& head : layer.heads) head = random_subset(c.head_dim, rng, p);
    layer.mlp = random_subset(c.mlp_dim, rng, rng.uniform());
    if (random_patches) {
      std::vector<std::size_t> next;
      const double q = 0.5 + 0.5 * rng.uniform();
      for (std::size_t i : prev) {
        if (rng.uniform() < q) next.push_back(i);
      }
      if (next.empty()) next.push_back(prev[rng.uniform_index(prev.size())]);
      layer.patches = next;
      prev = next;
    }
  }
  return arch;
}

inline Tensor random_images(const ViTConfig& c, std::size_t batch, Rng& rng) {
  Tensor t({batch, c.channels, c.image_size, c.image_size});
  for (double& v : t.data()) v = round_to_precision(2.0 * rng.uniform() - 1.0);
  return t;
}

}  // namespace vitslim::testing
