#include "vitslim/accounting.hpp"

#include <cstdio>
#include <sstream>

namespace vitslim {

CostReport cost_report(const ViTConfig& config, const SlimArchitecture& arch) {
  arch.validate(config);
  const std::uint64_t D = config.embed_dim;
  const std::uint64_t first = config.first_patch();
  CostReport r;

  const std::uint64_t embedded = arch.layers[0].patches.size();
  r.embed_macs = embedded * config.patch_dim() * D;
  r.embed_params = config.patch_dim() * D + D + (config.use_class_token ? D : 0) +
                   (first + embedded) * D;
  r.head_macs = D * config.num_classes;
  r.head_params = 2 * D + D * config.num_classes + config.num_classes;

  std::uint64_t attn_dims = 0, mlp_dims = 0, patch_slots = 0;
  for (const LayerArch& la : arch.layers) {
    LayerCost c;
    const std::uint64_t T = first + la.patches.size();
    const std::uint64_t W = la.attn_width();
    const std::uint64_t M = la.mlp.size();
    c.tokens = T;
    c.qkv = 3 * T * D * W;
    c.attention = 2 * T * T * W;
    c.projection = T * W * D;
    c.mlp = 2 * T * D * M;
    c.params = 2 * D                  // norm1
               + 3 * (D * W + W)      // q, k, v
               + W * D + D            // projection
               + 2 * D                // norm2
               + D * M + M + M * D + D;  // fc1, fc2
    r.layers.push_back(c);
    attn_dims += W;
    mlp_dims += M;
    patch_slots += la.patches.size();
  }

  r.macs = r.embed_macs + r.head_macs;
  r.params = r.embed_params + r.head_params;
  for (const LayerCost& c : r.layers) {
    r.macs += c.macs();
    r.params += c.params;
  }
  const double L = static_cast<double>(config.layers);
  r.attn_keep = static_cast<double>(attn_dims) / (L * config.heads * config.head_dim);
  r.mlp_keep = static_cast<double>(mlp_dims) / (L * config.mlp_dim);
  r.patch_keep = static_cast<double>(patch_slots) / (L * config.num_patches());
  return r;
}

std::uint64_t count_params(const ViTConfig& config, const SlimArchitecture& arch) {
  return cost_report(config, arch).params;
}

std::uint64_t count_params(const ViTConfig& config) {
  return count_params(config, SlimArchitecture::full(config));
}

std::uint64_t count_macs(const ViTConfig& config, const SlimArchitecture& arch) {
  return cost_report(config, arch).macs;
}

std::uint64_t count_macs(const ViTConfig& config) {
  return count_macs(config, SlimArchitecture::full(config));
}

void to_json(nlohmann::json& j, const CostReport& r) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerCost& c : r.layers) {
    layers.push_back({{"tokens", c.tokens},
                      {"qkv", c.qkv},
                      {"attention", c.attention},
                      {"projection", c.projection},
                      {"mlp", c.mlp},
                      {"macs", c.macs()},
                      {"params", c.params}});
  }
  j = nlohmann::json{
      {"convention",
       "MACs: one per scalar multiply in matrix products; softmax, layernorm, GELU and "
       "residual adds uncounted; per image"},
      {"params", r.params},
      {"macs", r.macs},
      {"embed", {{"macs", r.embed_macs}, {"params", r.embed_params}}},
      {"head", {{"macs", r.head_macs}, {"params", r.head_params}}},
      {"layers", std::move(layers)},
      {"realized_budget", {{"attn", r.attn_keep}, {"mlp", r.mlp_keep}, {"patch", r.patch_keep}}}};
}

std::string format_cost_table(const CostReport& r) {
  std::ostringstream os;
  char line[256];
  os << "# MACs count scalar multiplies in matrix products (per image).\n"
     << "# Uncounted elementwise ops: softmax, layernorm, GELU, residual add.\n";
  std::snprintf(line, sizeof line, "%-8s %6s %14s %14s %14s %14s %14s %12s\n", "block", "tokens",
                "qkv", "attention", "projection", "mlp", "macs", "params");
  os << line;
  std::snprintf(line, sizeof line, "%-8s %6s %14s %14s %14s %14s %14llu %12llu\n", "embed", "-",
                "-", "-", "-", "-", static_cast<unsigned long long>(r.embed_macs),
                static_cast<unsigned long long>(r.embed_params));
  os << line;
  for (std::size_t l = 0; l < r.layers.size(); ++l) {
    const LayerCost& c = r.layers[l];
    std::snprintf(line, sizeof line, "layer%-3zu %6llu %14llu %14llu %14llu %14llu %14llu %12llu\n",
                  l, static_cast<unsigned long long>(c.tokens),
                  static_cast<unsigned long long>(c.qkv),
                  static_cast<unsigned long long>(c.attention),
                  static_cast<unsigned long long>(c.projection),
                  static_cast<unsigned long long>(c.mlp),
                  static_cast<unsigned long long>(c.macs()),
                  static_cast<unsigned long long>(c.params));
    os << line;
  }
  std::snprintf(line, sizeof line, "%-8s %6s %14s %14s %14s %14s %14llu %12llu\n", "head", "-",
                "-", "-", "-", "-", static_cast<unsigned long long>(r.head_macs),
                static_cast<unsigned long long>(r.head_params));
  os << line;
  std::snprintf(line, sizeof line, "total: %llu MACs (%.3fG), %llu params (%.3fM)\n",
                static_cast<unsigned long long>(r.macs), static_cast<double>(r.macs) / 1e9,
                static_cast<unsigned long long>(r.params), static_cast<double>(r.params) / 1e6);
  os << line;
  std::snprintf(line, sizeof line, "realized keep: attn %.4f, mlp %.4f, patch %.4f\n",
                r.attn_keep, r.mlp_keep, r.patch_keep);
  os << line;
  return os.str();
}

}  // namespace vitslim
