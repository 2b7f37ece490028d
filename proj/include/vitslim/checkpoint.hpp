#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vitslim/masks.hpp"
#include "vitslim/trainer.hpp"
#include "vitslim/vit.hpp"

// Binary layout:
//   u64 little-endian header length H
//   H bytes of JSON header
//   body: raw little-endian arrays in directory order
// The header carries the format version, config, architecture, stage,
// hyperparameters, RNG state and a tensor directory (name, offset, shape,
// dtype). Each tensor is stored as f32 when every value is exactly
// representable in binary32, otherwise as f64, so round trips are exact.
namespace vitslim {

inline constexpr int kCheckpointVersion = 1;

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<std::string> names;  // slot order
  std::vector<std::vector<double>> m, v;
};

struct Checkpoint {
  std::string stage;  // init, pretrain, search, slice, retrain
  Precision precision = Precision::f32;
  Model model;
  std::optional<MaskSet> masks;
  nlohmann::json hyper;  // TrainHyper of the stage that wrote it, or null
  // RNG state: every random draw of a run derives from (seed, step).
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::optional<OptimizerState> optimizer;
  nlohmann::json extra = nlohmann::json::object();  // free-form metadata
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

// Atomic: writes a sibling temp file and renames it over `path`.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot of a training state, including optimizer moments.
Checkpoint checkpoint_from_state(const TrainState& state, const TrainHyper& hyper,
                                 const std::string& stage);
// Rebuilds a training state from the checkpoint's model and masks. With
// `resume`, the step counter and optimizer moments are restored too (the
// slot layout must match); otherwise training starts fresh at step 0.
TrainState state_from_checkpoint(const Checkpoint& ckpt, const TrainHyper& hyper, bool resume);

void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace vitslim
