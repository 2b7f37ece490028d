#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "vitslim/config.hpp"
#include "vitslim/dataset.hpp"
#include "vitslim/slicer.hpp"
#include "vitslim/trainer.hpp"

namespace vitslim {

struct DataConfig {
  std::string source = "synthetic";  // "idx" or "synthetic"
  // IDX paths; relative paths resolve against the config file's directory.
  std::string train_images, train_labels, test_images, test_labels;
  std::size_t synthetic_train = 2000;
  std::size_t synthetic_test = 1000;
};

// Every knob of every command. Unknown keys are rejected; absent keys keep
// the defaults below.
struct RunConfig {
  ViTConfig model;
  Precision precision = Precision::f32;
  std::uint64_t seed = 0;
  DataConfig data;
  TrainHyper pretrain = default_supervised_hyper();
  TrainHyper search;  // constant 5e-4, wd 1e-3, 50 epochs
  TrainHyper retrain = default_supervised_hyper();
  Budget budget{0.7, 0.7, 1.0};
  bool enforce_nesting = true;
  std::size_t eval_batch_size = 256;

  void validate() const;
  // Stage hyperparameters with the stage seed filled in from `seed`.
  TrainHyper stage(const std::string& name) const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
// base_dir resolves relative data paths.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

struct DataSplits {
  Dataset train;
  Dataset test;
};

// Test data is normalized with the training split's statistics.
DataSplits load_data(const RunConfig& config);

}  // namespace vitslim
