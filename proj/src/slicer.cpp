#include "vitslim/slicer.hpp"

#include <algorithm>
#include <cmath>

#include "vitslim/error.hpp"

namespace vitslim {

namespace {

std::vector<bool> top_entries(const std::vector<RankedEntry>& ranked, std::size_t keep,
                              std::size_t total, const char* family) {
  if (ranked.size() != total) {
    throw ConfigError(std::string("ranked ") + family + " masks have " +
                      std::to_string(ranked.size()) + " entries, config needs " +
                      std::to_string(total));
  }
  std::vector<bool> kept(total, false);
  for (std::size_t i = 0; i < keep; ++i) kept[ranked[i].index] = true;
  return kept;
}

std::vector<std::size_t> kept_in_range(const std::vector<bool>& kept, std::size_t begin,
                                       std::size_t count) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (kept[begin + i]) out.push_back(i);
  }
  return out;
}

Tensor gather_columns(const Tensor& w, const std::vector<std::size_t>& cols) {
  const std::size_t rows = w.dim(0);
  const std::size_t n = w.dim(1);
  Tensor out({rows, cols.size()}, true);
  auto src = w.data();
  auto dst = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) dst[r * cols.size() + j] = src[r * n + cols[j]];
  }
  return out;
}

Tensor gather_rows(const Tensor& w, const std::vector<std::size_t>& rows) {
  const std::size_t n = w.numel() / std::max<std::size_t>(w.dim(0), 1);
  Shape shape = w.shape();
  shape[0] = rows.size();
  Tensor out(shape, true);
  auto src = w.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(rows[i] * n), n,
                dst.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  return out;
}

Tensor copy_leaf(const Tensor& t) { return t.defined() ? t.clone_as_leaf(true) : Tensor{}; }

}  // namespace

void Budget::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw ConfigError(std::string("budget.") + name + " = " + std::to_string(v) +
                        " is outside (0, 1]");
    }
  };
  check(attn, "attn");
  check(mlp, "mlp");
  check(patch, "patch");
}

std::size_t keep_count(double fraction, std::size_t total) {
  const double t = static_cast<double>(total);
  const double k = std::ceil(fraction * t - 1e-9 * std::max(t, 1.0));
  return static_cast<std::size_t>(std::clamp(k, 0.0, t));
}

std::vector<std::vector<std::size_t>> enforce_patch_nesting(
    std::vector<std::vector<std::size_t>> keep_sets) {
  for (std::size_t l = 1; l < keep_sets.size(); ++l) {
    std::vector<std::size_t> nested;
    std::set_intersection(keep_sets[l].begin(), keep_sets[l].end(), keep_sets[l - 1].begin(),
                          keep_sets[l - 1].end(), std::back_inserter(nested));
    keep_sets[l] = std::move(nested);
  }
  return keep_sets;
}

SlimArchitecture select_architecture(const RankedMasks& ranked, const Budget& budget,
                                     const ViTConfig& config, bool enforce_nesting) {
  budget.validate();
  const std::size_t L = config.layers, H = config.heads, d = config.head_dim;
  const std::size_t M = config.mlp_dim, N = config.num_patches();

  const auto attn = top_entries(ranked.attn, keep_count(budget.attn, L * H * d), L * H * d, "attn");
  const auto mlp = top_entries(ranked.mlp, keep_count(budget.mlp, L * M), L * M, "mlp");
  const auto patch = top_entries(ranked.patch, keep_count(budget.patch, L * N), L * N, "patch");

  SlimArchitecture arch;
  arch.layers.resize(L);
  std::vector<std::vector<std::size_t>> patch_sets(L);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t h = 0; h < H; ++h) {
      arch.layers[l].heads.push_back(kept_in_range(attn, (l * H + h) * d, d));
    }
    arch.layers[l].mlp = kept_in_range(mlp, l * M, M);
    patch_sets[l] = kept_in_range(patch, l * N, N);
  }
  if (enforce_nesting) patch_sets = enforce_patch_nesting(std::move(patch_sets));
  for (std::size_t l = 0; l < L; ++l) arch.layers[l].patches = std::move(patch_sets[l]);
  return arch;
}

Model slice_model(const Model& supernet, const SlimArchitecture& arch) {
  const ViTConfig& cfg = supernet.config;
  if (!supernet.arch.is_full(cfg)) {
    throw ConfigError("slice_model expects a supernet with the full architecture");
  }
  arch.validate(cfg);
  supernet.validate();

  const ModelParams& src = supernet.params;
  Model out{cfg, arch, {}};
  ModelParams& dst = out.params;
  dst.patch_w = copy_leaf(src.patch_w);
  dst.patch_b = copy_leaf(src.patch_b);
  dst.cls_token = copy_leaf(src.cls_token);

  // Positions of patches dropped before the first block are removed; later
  // drops keep their embedding row since the token exists until then.
  std::vector<std::size_t> pos_rows;
  if (cfg.use_class_token) pos_rows.push_back(0);
  for (std::size_t p : arch.layers[0].patches) pos_rows.push_back(cfg.first_patch() + p);
  dst.pos_embed = gather_rows(src.pos_embed, pos_rows);

  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const LayerParams& s = src.layers[l];
    const LayerArch& la = arch.layers[l];
    std::vector<std::size_t> attn_cols;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      for (std::size_t i : la.heads[h]) attn_cols.push_back(h * cfg.head_dim + i);
    }
    LayerParams p;
    p.norm1_gamma = copy_leaf(s.norm1_gamma);
    p.norm1_beta = copy_leaf(s.norm1_beta);
    p.wq = gather_columns(s.wq, attn_cols);
    p.bq = gather_rows(s.bq, attn_cols);
    p.wk = gather_columns(s.wk, attn_cols);
    p.bk = gather_rows(s.bk, attn_cols);
    p.wv = gather_columns(s.wv, attn_cols);
    p.bv = gather_rows(s.bv, attn_cols);
    p.wo = gather_rows(s.wo, attn_cols);
    p.bo = copy_leaf(s.bo);
    p.norm2_gamma = copy_leaf(s.norm2_gamma);
    p.norm2_beta = copy_leaf(s.norm2_beta);
    p.w1 = gather_columns(s.w1, la.mlp);
    p.b1 = gather_rows(s.b1, la.mlp);
    p.w2 = gather_rows(s.w2, la.mlp);
    p.b2 = copy_leaf(s.b2);
    dst.layers.push_back(std::move(p));
  }
  dst.norm_gamma = copy_leaf(src.norm_gamma);
  dst.norm_beta = copy_leaf(src.norm_beta);
  dst.head_w = copy_leaf(src.head_w);
  dst.head_b = copy_leaf(src.head_b);
  out.validate();
  return out;
}

MaskSet binarize_masks(const SlimArchitecture& arch, const ViTConfig& config) {
  arch.validate(config);
  const std::size_t H = config.heads, d = config.head_dim;
  const std::size_t M = config.mlp_dim, N = config.num_patches();
  MaskSet masks{Tensor::zeros({config.layers, H, d}, true), Tensor::zeros({config.layers, M}, true),
                Tensor::zeros({config.layers, N}, true)};
  auto attn = masks.attn.data();
  auto mlp = masks.mlp.data();
  auto patch = masks.patch_raw.data();
  for (std::size_t l = 0; l < config.layers; ++l) {
    const LayerArch& la = arch.layers[l];
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i : la.heads[h]) attn[(l * H + h) * d + i] = 1.0;
    }
    for (std::size_t i : la.mlp) mlp[l * M + i] = 1.0;
    for (std::size_t p : la.patches) patch[l * N + p] = kPatchKeepRaw;
  }
  return masks;
}

}  // namespace vitslim
