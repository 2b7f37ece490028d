#include "vitslim/arch.hpp"

#include <algorithm>
#include <numeric>

#include "vitslim/error.hpp"
#include "vitslim/json_util.hpp"

namespace vitslim {

namespace {

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

void check_index_list(const std::vector<std::size_t>& list, std::size_t bound,
                      const std::string& where) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] >= bound) {
      throw ConfigError(where + ": index " + std::to_string(list[i]) + " out of range [0, " +
                        std::to_string(bound) + ")");
    }
    if (i > 0 && list[i] <= list[i - 1]) {
      throw ConfigError(where + ": indices must be strictly ascending");
    }
  }
}

}  // namespace

std::size_t LayerArch::attn_width() const {
  std::size_t w = 0;
  for (const auto& h : heads) w += h.size();
  return w;
}

SlimArchitecture SlimArchitecture::full(const ViTConfig& config) {
  SlimArchitecture arch;
  arch.layers.resize(config.layers);
  for (LayerArch& layer : arch.layers) {
    layer.heads.assign(config.heads, iota_vec(config.head_dim));
    layer.mlp = iota_vec(config.mlp_dim);
    layer.patches = iota_vec(config.num_patches());
  }
  return arch;
}

bool SlimArchitecture::is_full(const ViTConfig& config) const {
  return *this == full(config);
}

bool SlimArchitecture::patches_nested() const {
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (!std::includes(layers[l - 1].patches.begin(), layers[l - 1].patches.end(),
                       layers[l].patches.begin(), layers[l].patches.end())) {
      return false;
    }
  }
  return true;
}

void SlimArchitecture::validate(const ViTConfig& config) const {
  if (layers.size() != config.layers) {
    throw ConfigError("architecture has " + std::to_string(layers.size()) +
                      " layers, model config has " + std::to_string(config.layers));
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerArch& layer = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.heads.size() != config.heads) {
      throw ConfigError(where + ": has " + std::to_string(layer.heads.size()) +
                        " heads, expected " + std::to_string(config.heads));
    }
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      check_index_list(layer.heads[h], config.head_dim, where + " head " + std::to_string(h));
    }
    check_index_list(layer.mlp, config.mlp_dim, where + " mlp");
    check_index_list(layer.patches, config.num_patches(), where + " patches");
    if (!config.use_class_token && layer.patches.empty()) {
      throw ConfigError(where + ": no tokens left (no class token and no patches)");
    }
  }
  if (!patches_nested()) throw ConfigError("architecture patch sets are not nested");
}

void to_json(nlohmann::json& j, const SlimArchitecture& arch) {
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerArch& layer : arch.layers) {
    layers.push_back({{"heads", layer.heads}, {"mlp", layer.mlp}, {"patches", layer.patches}});
  }
  j = nlohmann::json{{"layers", std::move(layers)}};
}

void from_json(const nlohmann::json& j, SlimArchitecture& arch) {
  json_util::ObjectReader root(j, "architecture");
  const nlohmann::json* layers = root.child("layers");
  root.finish();
  if (layers == nullptr || !layers->is_array()) {
    throw ConfigError("architecture: missing 'layers' array");
  }
  arch.layers.clear();
  for (std::size_t l = 0; l < layers->size(); ++l) {
    json_util::ObjectReader r((*layers)[l], "architecture.layers[" + std::to_string(l) + "]");
    LayerArch layer;
    r.read("heads", layer.heads);
    r.read("mlp", layer.mlp);
    r.read("patches", layer.patches);
    r.finish();
    arch.layers.push_back(std::move(layer));
  }
}

}  // namespace vitslim
