#include "vitslim/run_config.hpp"

#include <filesystem>
#include <fstream>

#include "vitslim/error.hpp"
#include "vitslim/json_util.hpp"

namespace vitslim {

void RunConfig::validate() const {
  model.validate();
  if (data.source != "idx" && data.source != "synthetic") {
    throw ConfigError("data.source must be idx or synthetic, got '" + data.source + "'");
  }
  pretrain.validate();
  search.validate();
  retrain.validate();
  budget.validate();
  if (eval_batch_size == 0) throw ConfigError("eval_batch_size must be positive");
}

TrainHyper RunConfig::stage(const std::string& name) const {
  TrainHyper h;
  std::uint64_t tag;
  if (name == "pretrain") {
    h = pretrain;
    tag = 1;
  } else if (name == "search") {
    h = search;
    tag = 2;
  } else if (name == "retrain") {
    h = retrain;
    tag = 3;
  } else {
    throw UsageError("unknown stage '" + name + "'");
  }
  h.seed = Rng::derive(seed, {tag}).next_u64();
  return h;
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  auto stage = [](const TrainHyper& h) {
    nlohmann::json s = h;
    s.erase("seed");
    return s;
  };
  j = nlohmann::json{{"model", c.model},
                     {"precision", to_string(c.precision)},
                     {"seed", c.seed},
                     {"data",
                      {{"source", c.data.source},
                       {"train_images", c.data.train_images},
                       {"train_labels", c.data.train_labels},
                       {"test_images", c.data.test_images},
                       {"test_labels", c.data.test_labels},
                       {"synthetic_train", c.data.synthetic_train},
                       {"synthetic_test", c.data.synthetic_test}}},
                     {"pretrain", stage(c.pretrain)},
                     {"search", stage(c.search)},
                     {"retrain", stage(c.retrain)},
                     {"budget", {{"attn", c.budget.attn}, {"mlp", c.budget.mlp}, {"patch", c.budget.patch}}},
                     {"enforce_nesting", c.enforce_nesting},
                     {"eval_batch_size", c.eval_batch_size}};
}

namespace {

void read_stage(json_util::ObjectReader& r, const char* key, TrainHyper& h) {
  if (const auto* s = r.child(key)) {
    if (s->contains("seed")) {
      throw ConfigError(std::string(key) + ".seed: stage seeds derive from the top-level seed");
    }
    const std::uint64_t seed = h.seed;
    nlohmann::json merged = h;
    for (auto it = s->begin(); it != s->end(); ++it) {
      if (!merged.contains(it.key())) {
        throw ConfigError(std::string(key) + ": unknown key '" + it.key() + "'");
      }
      if (it.key() == "sparsity" || it.key() == "augment") {
        merged[it.key()].update(*it);
      } else {
        merged[it.key()] = *it;
      }
    }
    try {
      h = merged.get<TrainHyper>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string(key) + ": " + e.what());
    }
    h.seed = seed;
  }
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir) {
  RunConfig c;
  json_util::ObjectReader r(j, "config");
  if (const auto* m = r.child("model")) c.model = m->get<ViTConfig>();
  std::string prec;
  if (r.read("precision", prec)) c.precision = parse_precision(prec);
  r.read("seed", c.seed);
  if (const auto* d = r.child("data")) {
    json_util::ObjectReader dr(*d, "config.data");
    dr.read("source", c.data.source);
    dr.read("train_images", c.data.train_images);
    dr.read("train_labels", c.data.train_labels);
    dr.read("test_images", c.data.test_images);
    dr.read("test_labels", c.data.test_labels);
    dr.read("synthetic_train", c.data.synthetic_train);
    dr.read("synthetic_test", c.data.synthetic_test);
    dr.finish();
  }
  for (std::string* p : {&c.data.train_images, &c.data.train_labels, &c.data.test_images,
                         &c.data.test_labels}) {
    *p = resolve(base_dir, *p);
  }
  read_stage(r, "pretrain", c.pretrain);
  read_stage(r, "search", c.search);
  read_stage(r, "retrain", c.retrain);
  if (const auto* b = r.child("budget")) {
    json_util::ObjectReader br(*b, "config.budget");
    br.read("attn", c.budget.attn);
    br.read("mlp", c.budget.mlp);
    br.read("patch", c.budget.patch);
    br.finish();
  }
  r.read("enforce_nesting", c.enforce_nesting);
  r.read("eval_batch_size", c.eval_batch_size);
  r.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path().string());
}

DataSplits load_data(const RunConfig& config) {
  if (config.data.source == "idx") {
    Dataset train = load_idx_dataset(config.data.train_images, config.data.train_labels, "train");
    Dataset test = load_idx_dataset(config.data.test_images, config.data.test_labels, "test",
                                    train.stats);
    train.check_compatible(config.model);
    test.check_compatible(config.model);
    return {std::move(train), std::move(test)};
  }
  const std::uint64_t train_seed = Rng::derive(config.seed, {100}).next_u64();
  const std::uint64_t test_seed = Rng::derive(config.seed, {101}).next_u64();
  Dataset train = gen_synthetic(train_seed, config.data.synthetic_train, config.model, "train");
  Dataset test =
      gen_synthetic(test_seed, config.data.synthetic_test, config.model, "test", train.stats);
  return {std::move(train), std::move(test)};
}

}  // namespace vitslim
