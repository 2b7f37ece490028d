#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vitslim/adamw.hpp"
#include "vitslim/dataset.hpp"
#include "vitslim/masks.hpp"
#include "vitslim/vit.hpp"

namespace vitslim {

enum class Schedule { constant, warmup_cosine };

const char* to_string(Schedule s);
Schedule parse_schedule(const std::string& name);

// Hyperparameters of one training stage. Defaults are the search recipe.
struct TrainHyper {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr = 5e-4;
  double weight_decay = 1e-3;  // model weights; masks never decay
  Schedule schedule = Schedule::constant;
  double warmup_fraction = 0.1;
  Augment augment;
  SparsityWeights sparsity;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainHyper& h);
void from_json(const nlohmann::json& j, TrainHyper& h);

struct StepRecord {
  std::uint64_t step = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double ce = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // loss value backpropagated: ce + penalty in working precision
};

// q0, q10, ..., q100 of |mask| over one family.
using Deciles = std::array<double, 11>;

struct EpochRecord {
  std::size_t epoch = 0;
  double ce = 0.0;       // mean over the epoch's steps
  double penalty = 0.0;
  double total = 0.0;
  double attn_l1 = 0.0;  // after the epoch
  double mlp_l1 = 0.0;
  double patch_l1 = 0.0;
  Deciles attn{}, mlp{}, patch{};
};

struct History {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

// Linear-interpolation quantiles of |values|.
Deciles magnitude_deciles(std::span<const double> values);

// Model, optional masks and optimizer state. The data order and augmentation
// of global step s derive from (seed, epoch) and (seed, s) alone, so a state
// restored at any step continues exactly as the uninterrupted run would.
struct TrainState {
  Model model;
  std::optional<MaskSet> masks;
  AdamW optimizer;
  std::uint64_t step = 0;  // completed optimizer steps

  TrainState(Model m, std::optional<MaskSet> z, const TrainHyper& hyper);
};

std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size);
double scheduled_lr(const TrainHyper& hyper, std::uint64_t step, std::uint64_t total_steps);

// Trains until hyper.epochs epochs are complete, or `max_steps` further
// steps were taken. Raises NumericError on a non-finite loss.
History train(TrainState& state, const Dataset& data, const TrainHyper& hyper,
              std::optional<std::uint64_t> max_steps = {});

// Masked search over a pretrained supernet (constant lr, weighted L1).
History search(TrainState& state, const Dataset& data, const TrainHyper& hyper,
               std::optional<std::uint64_t> max_steps = {});

// Top-1 accuracy in [0, 1].
double evaluate(const Model& model, const MaskSet* masks, const Dataset& data,
                std::size_t batch_size = 256);

// Pretraining and retraining defaults: warmup + cosine, light augmentation.
TrainHyper default_supervised_hyper();

}  // namespace vitslim
