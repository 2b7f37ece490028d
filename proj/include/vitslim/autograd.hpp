#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vitslim/tensor.hpp"

namespace vitslim {

enum class OpKind {
  matmul,
  linear,
  bmm,
  bmm_nt,
  add,
  hadamard,
  scale,
  gelu,
  tanh,
  softmax,
  layernorm,
  cross_entropy,
  l1_norm,
  slice_lastdim,
  concat_lastdim,
  select_row,
  select_token,
  mean_tokens,
  gather_tokens,
  scale_patch_tokens,
  prepend_token,
  reshape,
};

const char* to_string(OpKind kind);

// One recorded op. `forward` recomputes the output values from `inputs`;
// `backward` accumulates into the grads of those inputs that require grad,
// reading the upstream gradient from `output.grad()`.
struct TapeNode {
  using ForwardFn = std::function<std::vector<double>(std::span<const Tensor>)>;
  using BackwardFn = std::function<void(std::span<Tensor>, const Tensor&)>;

  OpKind kind;
  std::vector<Tensor> inputs;
  Tensor output;
  ForwardFn forward;
  BackwardFn backward;
};

// Append-only record of differentiable ops, in execution order (so every
// node's inputs were produced by earlier nodes or are leaves). One tape per
// thread; training loops clear it after each optimizer step.
class Tape {
 public:
  static Tape& active();

  void record(TapeNode node) { nodes_.push_back(std::move(node)); }
  std::span<const TapeNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Recomputes every node from its recorded inputs and reports whether all
  // outputs are reproduced bit-for-bit.
  bool replay() const;

  friend void backward(const Tensor& loss);

 private:
  std::vector<TapeNode> nodes_;
};

// Clears the active tape on scope exit.
class TapeScope {
 public:
  TapeScope() = default;
  ~TapeScope() { Tape::active().clear(); }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;
};

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

// Reverse sweep from a scalar loss; accumulates into every requires_grad
// tensor reachable on the active tape.
void backward(const Tensor& loss);

// Running total of scalar multiplies performed by the forward passes of
// matmul-type ops (matmul, linear, bmm, bmm_nt).
std::uint64_t multiply_count();
void reset_multiply_count();

}  // namespace vitslim
