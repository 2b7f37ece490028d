#include "vitslim/autograd.hpp"

#include <cstring>

#include "vitslim/error.hpp"

namespace vitslim {

namespace {
thread_local bool t_grad_enabled = true;
std::uint64_t g_multiplies = 0;
}  // namespace

namespace detail {
void count_multiplies(std::uint64_t n) { g_multiplies += n; }
}  // namespace detail

std::uint64_t multiply_count() { return g_multiplies; }
void reset_multiply_count() { g_multiplies = 0; }

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::linear: return "linear";
    case OpKind::bmm: return "bmm";
    case OpKind::bmm_nt: return "bmm_nt";
    case OpKind::add: return "add";
    case OpKind::hadamard: return "hadamard";
    case OpKind::scale: return "scale";
    case OpKind::gelu: return "gelu";
    case OpKind::tanh: return "tanh";
    case OpKind::softmax: return "softmax";
    case OpKind::layernorm: return "layernorm";
    case OpKind::cross_entropy: return "cross_entropy";
    case OpKind::l1_norm: return "l1_norm";
    case OpKind::slice_lastdim: return "slice_lastdim";
    case OpKind::concat_lastdim: return "concat_lastdim";
    case OpKind::select_row: return "select_row";
    case OpKind::select_token: return "select_token";
    case OpKind::mean_tokens: return "mean_tokens";
    case OpKind::gather_tokens: return "gather_tokens";
    case OpKind::scale_patch_tokens: return "scale_patch_tokens";
    case OpKind::prepend_token: return "prepend_token";
    case OpKind::reshape: return "reshape";
  }
  return "unknown";
}

Tape& Tape::active() {
  thread_local Tape tape;
  return tape;
}

bool Tape::replay() const {
  for (const TapeNode& node : nodes_) {
    std::vector<double> values = node.forward(node.inputs);
    round_to_precision(values);
    auto recorded = node.output.data();
    if (values.size() != recorded.size()) return false;
    if (!values.empty() &&
        std::memcmp(values.data(), recorded.data(), recorded.size_bytes()) != 0) {
      return false;
    }
  }
  return true;
}

bool grad_enabled() { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : saved_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = saved_; }

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward() needs a scalar loss, got shape " +
                     (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) {
    throw UsageError("backward() on a tensor that does not require grad");
  }
  auto& nodes = Tape::active().nodes_;
  std::ptrdiff_t start = static_cast<std::ptrdiff_t>(nodes.size()) - 1;
  while (start >= 0 && !nodes[static_cast<std::size_t>(start)].output.same_storage(loss)) --start;

  Tensor seed = loss;
  seed.grad()[0] += 1.0;
  for (std::ptrdiff_t i = start; i >= 0; --i) {
    TapeNode& node = nodes[static_cast<std::size_t>(i)];
    if (!node.output.has_grad()) continue;
    node.backward(node.inputs, node.output);
    for (Tensor& in : node.inputs) {
      if (in.requires_grad() && in.has_grad()) round_to_precision(in.grad());
    }
  }
}

}  // namespace vitslim
