#include "vitslim/vit.hpp"

#include <cmath>

#include "vitslim/error.hpp"
#include "vitslim/ops.hpp"
#include "vitslim/rng.hpp"

namespace vitslim {

namespace {

constexpr double kInitStd = 0.02;

void check_shape(const Tensor& t, const Shape& want, const std::string& name) {
  if (!t.defined() || t.shape() != want) {
    throw ConfigError("parameter " + name + " has shape " +
                      (t.defined() ? to_string(t.shape()) : std::string("<missing>")) +
                      ", expected " + to_string(want));
  }
}

}  // namespace

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("patch_embed.weight", patch_w);
  out.emplace_back("patch_embed.bias", patch_b);
  if (cls_token.defined()) out.emplace_back("cls_token", cls_token);
  out.emplace_back("pos_embed", pos_embed);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParams& p = layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    out.emplace_back(prefix + "norm1.weight", p.norm1_gamma);
    out.emplace_back(prefix + "norm1.bias", p.norm1_beta);
    out.emplace_back(prefix + "attn.q.weight", p.wq);
    out.emplace_back(prefix + "attn.q.bias", p.bq);
    out.emplace_back(prefix + "attn.k.weight", p.wk);
    out.emplace_back(prefix + "attn.k.bias", p.bk);
    out.emplace_back(prefix + "attn.v.weight", p.wv);
    out.emplace_back(prefix + "attn.v.bias", p.bv);
    out.emplace_back(prefix + "attn.proj.weight", p.wo);
    out.emplace_back(prefix + "attn.proj.bias", p.bo);
    out.emplace_back(prefix + "norm2.weight", p.norm2_gamma);
    out.emplace_back(prefix + "norm2.bias", p.norm2_beta);
    out.emplace_back(prefix + "mlp.fc1.weight", p.w1);
    out.emplace_back(prefix + "mlp.fc1.bias", p.b1);
    out.emplace_back(prefix + "mlp.fc2.weight", p.w2);
    out.emplace_back(prefix + "mlp.fc2.bias", p.b2);
  }
  out.emplace_back("norm.weight", norm_gamma);
  out.emplace_back("norm.bias", norm_beta);
  out.emplace_back("head.weight", head_w);
  out.emplace_back("head.bias", head_b);
  return out;
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t.numel();
  return n;
}

Model Model::clone() const {
  Model m{config, arch, params};
  auto copy = [](Tensor& t) {
    if (t.defined()) t = t.clone_as_leaf(t.requires_grad());
  };
  copy(m.params.patch_w);
  copy(m.params.patch_b);
  copy(m.params.cls_token);
  copy(m.params.pos_embed);
  for (LayerParams& p : m.params.layers) {
    for (Tensor* t : {&p.norm1_gamma, &p.norm1_beta, &p.wq, &p.bq, &p.wk, &p.bk, &p.wv, &p.bv,
                      &p.wo, &p.bo, &p.norm2_gamma, &p.norm2_beta, &p.w1, &p.b1, &p.w2, &p.b2}) {
      copy(*t);
    }
  }
  copy(m.params.norm_gamma);
  copy(m.params.norm_beta);
  copy(m.params.head_w);
  copy(m.params.head_b);
  return m;
}

void Model::validate() const {
  config.validate();
  arch.validate(config);
  const std::size_t D = config.embed_dim;
  check_shape(params.patch_w, {config.patch_dim(), D}, "patch_embed.weight");
  check_shape(params.patch_b, {D}, "patch_embed.bias");
  if (config.use_class_token) {
    check_shape(params.cls_token, {D}, "cls_token");
  } else if (params.cls_token.defined()) {
    throw ConfigError("cls_token present but use_class_token is false");
  }
  check_shape(params.pos_embed, {config.first_patch() + arch.layers[0].patches.size(), D},
              "pos_embed");
  if (params.layers.size() != config.layers) {
    throw ConfigError("model has " + std::to_string(params.layers.size()) +
                      " parameter layers, config has " + std::to_string(config.layers));
  }
  for (std::size_t l = 0; l < config.layers; ++l) {
    const LayerParams& p = params.layers[l];
    const std::size_t W = arch.layers[l].attn_width();
    const std::size_t M = arch.layers[l].mlp.size();
    const std::string prefix = "layers." + std::to_string(l) + ".";
    check_shape(p.norm1_gamma, {D}, prefix + "norm1.weight");
    check_shape(p.norm1_beta, {D}, prefix + "norm1.bias");
    check_shape(p.wq, {D, W}, prefix + "attn.q.weight");
    check_shape(p.bq, {W}, prefix + "attn.q.bias");
    check_shape(p.wk, {D, W}, prefix + "attn.k.weight");
    check_shape(p.bk, {W}, prefix + "attn.k.bias");
    check_shape(p.wv, {D, W}, prefix + "attn.v.weight");
    check_shape(p.bv, {W}, prefix + "attn.v.bias");
    check_shape(p.wo, {W, D}, prefix + "attn.proj.weight");
    check_shape(p.bo, {D}, prefix + "attn.proj.bias");
    check_shape(p.norm2_gamma, {D}, prefix + "norm2.weight");
    check_shape(p.norm2_beta, {D}, prefix + "norm2.bias");
    check_shape(p.w1, {D, M}, prefix + "mlp.fc1.weight");
    check_shape(p.b1, {M}, prefix + "mlp.fc1.bias");
    check_shape(p.w2, {M, D}, prefix + "mlp.fc2.weight");
    check_shape(p.b2, {D}, prefix + "mlp.fc2.bias");
  }
  check_shape(params.norm_gamma, {D}, "norm.weight");
  check_shape(params.norm_beta, {D}, "norm.bias");
  check_shape(params.head_w, {D, config.num_classes}, "head.weight");
  check_shape(params.head_b, {config.num_classes}, "head.bias");
}

Model allocate_model(const ViTConfig& config, const SlimArchitecture& arch) {
  config.validate();
  arch.validate(config);
  auto zeros = [](Shape shape) { return Tensor::zeros(std::move(shape), true); };
  const std::size_t D = config.embed_dim;
  Model model{config, arch, {}};
  ModelParams& p = model.params;
  p.patch_w = zeros({config.patch_dim(), D});
  p.patch_b = zeros({D});
  if (config.use_class_token) p.cls_token = zeros({D});
  p.pos_embed = zeros({config.first_patch() + arch.layers[0].patches.size(), D});
  for (const LayerArch& la : arch.layers) {
    const std::size_t W = la.attn_width();
    const std::size_t M = la.mlp.size();
    LayerParams layer;
    layer.norm1_gamma = zeros({D});
    layer.norm1_beta = zeros({D});
    layer.wq = zeros({D, W});
    layer.bq = zeros({W});
    layer.wk = zeros({D, W});
    layer.bk = zeros({W});
    layer.wv = zeros({D, W});
    layer.bv = zeros({W});
    layer.wo = zeros({W, D});
    layer.bo = zeros({D});
    layer.norm2_gamma = zeros({D});
    layer.norm2_beta = zeros({D});
    layer.w1 = zeros({D, M});
    layer.b1 = zeros({M});
    layer.w2 = zeros({M, D});
    layer.b2 = zeros({D});
    p.layers.push_back(std::move(layer));
  }
  p.norm_gamma = zeros({D});
  p.norm_beta = zeros({D});
  p.head_w = zeros({D, config.num_classes});
  p.head_b = zeros({config.num_classes});
  return model;
}

Model init_model(const ViTConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  auto weight = [&rng](Shape shape) {
    Tensor t(std::move(shape), true);
    for (double& v : t.data()) v = round_to_precision(rng.truncated_normal(kInitStd));
    return t;
  };
  auto zeros = [](Shape shape) { return Tensor::zeros(std::move(shape), true); };
  auto ones = [](Shape shape) { return Tensor::full(std::move(shape), 1.0, true); };

  const std::size_t D = config.embed_dim;
  const std::size_t W = config.heads * config.head_dim;
  const std::size_t M = config.mlp_dim;
  Model model{config, SlimArchitecture::full(config), {}};
  ModelParams& p = model.params;
  p.patch_w = weight({config.patch_dim(), D});
  p.patch_b = zeros({D});
  if (config.use_class_token) p.cls_token = weight({D});
  p.pos_embed = weight({config.first_patch() + config.num_patches(), D});
  for (std::size_t l = 0; l < config.layers; ++l) {
    LayerParams layer;
    layer.norm1_gamma = ones({D});
    layer.norm1_beta = zeros({D});
    layer.wq = weight({D, W});
    layer.bq = zeros({W});
    layer.wk = weight({D, W});
    layer.bk = zeros({W});
    layer.wv = weight({D, W});
    layer.bv = zeros({W});
    layer.wo = weight({W, D});
    layer.bo = zeros({D});
    layer.norm2_gamma = ones({D});
    layer.norm2_beta = zeros({D});
    layer.w1 = weight({D, M});
    layer.b1 = zeros({M});
    layer.w2 = weight({M, D});
    layer.b2 = zeros({D});
    p.layers.push_back(std::move(layer));
  }
  p.norm_gamma = ones({D});
  p.norm_beta = zeros({D});
  p.head_w = weight({D, config.num_classes});
  p.head_b = zeros({config.num_classes});
  return model;
}

Tensor patchify(const Tensor& images, const ViTConfig& config,
                std::span<const std::size_t> patches) {
  const std::size_t S = config.image_size;
  const std::size_t C = config.channels;
  if (images.rank() != 4 || images.dim(1) != C || images.dim(2) != S || images.dim(3) != S) {
    throw DataError("images have shape " + to_string(images.shape()) + ", model expects [Bx" +
                    std::to_string(C) + "x" + std::to_string(S) + "x" + std::to_string(S) + "]");
  }
  const std::size_t B = images.dim(0);
  const std::size_t P = config.patch_size;
  const std::size_t G = config.grid();
  const std::size_t K = patches.size();
  const std::size_t width = config.patch_dim();
  Tensor out({B, K, width});
  auto src = images.data();
  auto dst = out.data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t gy = patches[k] / G;
      const std::size_t gx = patches[k] % G;
      double* row = dst.data() + (b * K + k) * width;
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t py = 0; py < P; ++py) {
          for (std::size_t px = 0; px < P; ++px) {
            row[(c * P + py) * P + px] =
                src[((b * C + c) * S + gy * P + py) * S + gx * P + px];
          }
        }
      }
    }
  }
  return out;
}

Tensor patch_embed(const Model& model, const Tensor& images) {
  const ModelParams& p = model.params;
  Tensor tokens = linear(patchify(images, model.config, model.arch.layers.at(0).patches),
                         p.patch_w, p.patch_b);
  if (model.config.use_class_token) tokens = prepend_token(p.cls_token, tokens);
  return add(tokens, p.pos_embed);
}

Tensor mhsa_forward(const Tensor& x, const LayerParams& layer, const LayerArch& arch,
                    const ViTConfig& config, const Tensor& attn_mask) {
  const Tensor h = layernorm(x, layer.norm1_gamma, layer.norm1_beta, kLayerNormEps);
  Tensor q = linear(h, layer.wq, layer.bq);
  Tensor k = linear(h, layer.wk, layer.bk);
  Tensor v = linear(h, layer.wv, layer.bv);
  if (attn_mask.defined()) {
    q = hadamard(q, attn_mask);
    k = hadamard(k, attn_mask);
    v = hadamard(v, attn_mask);
  }
  // The logit scale uses the supernet head dim so sliced and masked heads agree.
  const double logit_scale = 1.0 / std::sqrt(static_cast<double>(config.head_dim));
  std::vector<Tensor> heads;
  std::size_t offset = 0;
  for (const auto& kept : arch.heads) {
    const std::size_t width = kept.size();
    if (width == 0) continue;
    const Tensor qh = slice_lastdim(q, offset, width);
    const Tensor kh = slice_lastdim(k, offset, width);
    const Tensor vh = slice_lastdim(v, offset, width);
    const Tensor weights = softmax_lastdim(scale(bmm_nt(qh, kh), logit_scale));
    heads.push_back(bmm(weights, vh));
    offset += width;
  }
  Tensor merged = heads.empty() ? Tensor::zeros({x.dim(0), x.dim(1), 0}) : concat_lastdim(heads);
  return add(x, linear(merged, layer.wo, layer.bo));
}

Tensor mlp_forward(const Tensor& x, const LayerParams& layer, const Tensor& mlp_mask) {
  const Tensor h = layernorm(x, layer.norm2_gamma, layer.norm2_beta, kLayerNormEps);
  Tensor hidden = gelu(linear(h, layer.w1, layer.b1));
  if (mlp_mask.defined()) hidden = hadamard(hidden, mlp_mask);
  return add(x, linear(hidden, layer.w2, layer.b2));
}

Tensor forward(const Model& model, const MaskSet* masks, const Tensor& images) {
  const ViTConfig& cfg = model.config;
  if (masks != nullptr) {
    if (!model.arch.is_full(cfg)) {
      throw ConfigError("masks can only be applied to the full supernet, not a sliced model");
    }
    masks->validate(cfg);
  }
  Tensor x = patch_embed(model, images);
  std::vector<std::size_t> alive = model.arch.layers[0].patches;
  const Tensor patch_scales = masks ? effective_patch_masks(*masks) : Tensor{};
  const std::size_t first = cfg.first_patch();

  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const LayerArch& la = model.arch.layers[l];
    if (la.patches != alive) {
      std::vector<std::size_t> tokens;
      if (cfg.use_class_token) tokens.push_back(0);
      std::size_t pos = 0;
      for (std::size_t p : la.patches) {
        while (pos < alive.size() && alive[pos] != p) ++pos;
        if (pos == alive.size()) {
          throw ConfigError("layer " + std::to_string(l) + " keeps patch " + std::to_string(p) +
                            " that an earlier layer dropped");
        }
        tokens.push_back(first + pos);
      }
      x = gather_tokens(x, tokens);
      alive = la.patches;
    }
    Tensor attn_mask, mlp_mask;
    if (masks) {
      x = scale_patch_tokens(x, select_row(patch_scales, l), first);
      attn_mask = reshape(select_row(masks->attn, l), {cfg.heads * cfg.head_dim});
      mlp_mask = select_row(masks->mlp, l);
    }
    x = mhsa_forward(x, model.params.layers[l], la, cfg, attn_mask);
    x = mlp_forward(x, model.params.layers[l], mlp_mask);
  }
  Tensor pooled = cfg.use_class_token ? select_token(x, 0) : mean_tokens(x);
  pooled = layernorm(pooled, model.params.norm_gamma, model.params.norm_beta, kLayerNormEps);
  return linear(pooled, model.params.head_w, model.params.head_b);
}

}  // namespace vitslim
