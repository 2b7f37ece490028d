#include "vitslim/config.hpp"

#include "vitslim/error.hpp"
#include "vitslim/json_util.hpp"

namespace vitslim {

void ViTConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model.") + name + " must be positive");
  };
  positive(layers, "layers");
  positive(heads, "heads");
  positive(head_dim, "head_dim");
  positive(embed_dim, "embed_dim");
  positive(mlp_dim, "mlp_dim");
  positive(patch_size, "patch_size");
  positive(image_size, "image_size");
  positive(channels, "channels");
  positive(num_classes, "num_classes");
  if (heads * head_dim != embed_dim) {
    throw ConfigError("model: heads*head_dim (" + std::to_string(heads * head_dim) +
                      ") must equal embed_dim (" + std::to_string(embed_dim) + ")");
  }
  if (image_size % patch_size != 0) {
    throw ConfigError("model: image_size " + std::to_string(image_size) +
                      " is not divisible by patch_size " + std::to_string(patch_size));
  }
}

void to_json(nlohmann::json& j, const ViTConfig& c) {
  j = nlohmann::json{{"layers", c.layers},
                     {"heads", c.heads},
                     {"head_dim", c.head_dim},
                     {"embed_dim", c.embed_dim},
                     {"mlp_dim", c.mlp_dim},
                     {"patch_size", c.patch_size},
                     {"image_size", c.image_size},
                     {"channels", c.channels},
                     {"num_classes", c.num_classes},
                     {"use_class_token", c.use_class_token}};
}

void from_json(const nlohmann::json& j, ViTConfig& c) {
  json_util::ObjectReader r(j, "model");
  r.read("layers", c.layers);
  r.read("heads", c.heads);
  r.read("head_dim", c.head_dim);
  r.read("embed_dim", c.embed_dim);
  r.read("mlp_dim", c.mlp_dim);
  r.read("patch_size", c.patch_size);
  r.read("image_size", c.image_size);
  r.read("channels", c.channels);
  r.read("num_classes", c.num_classes);
  r.read("use_class_token", c.use_class_token);
  std::size_t declared_patches = 0;
  const bool has_patches = r.read("num_patches", declared_patches);
  r.finish();
  c.validate();
  if (has_patches && declared_patches != c.num_patches()) {
    throw ConfigError("model.num_patches " + std::to_string(declared_patches) +
                      " disagrees with (image_size/patch_size)^2 = " +
                      std::to_string(c.num_patches()));
  }
}

}  // namespace vitslim
