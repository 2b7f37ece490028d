#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vitslim/tensor.hpp"

namespace vitslim {

struct AdamWConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
};

// One AdamW update of a single parameter array at 1-based step `step`:
//   p <- p * (1 - lr * wd)                      (decoupled decay)
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, double lr, const AdamWConfig& config,
                  double weight_decay, std::uint64_t step);

// AdamW over a fixed list of parameter tensors. Each parameter carries its
// own weight decay (mask parameters use 0). Parameters whose gradient was
// never touched this step are updated with a zero gradient.
class AdamW {
 public:
  struct Slot {
    std::string name;
    Tensor param;
    double weight_decay;
    std::vector<double> m;
    std::vector<double> v;
  };

  explicit AdamW(AdamWConfig config = {}) : config_(config) {}

  void add(std::string name, Tensor param, double weight_decay);
  void step();
  void zero_grad();

  double lr() const { return lr_override_ < 0.0 ? config_.lr : lr_override_; }
  void set_lr(double lr) { lr_override_ = lr; }
  const AdamWConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }
  void set_step_count(std::uint64_t step) { step_ = step; }

  std::span<Slot> slots() { return slots_; }
  std::span<const Slot> slots() const { return slots_; }

 private:
  AdamWConfig config_;
  double lr_override_ = -1.0;
  std::uint64_t step_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace vitslim
