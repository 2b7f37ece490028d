#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vitslim/autograd.hpp"
#include "vitslim/rng.hpp"
#include "vitslim/tensor.hpp"

namespace vitslim::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
  Tensor t(std::move(shape), requires_grad);
  for (double& v : t.data()) v = round_to_precision(lo + (hi - lo) * rng.uniform());
  return t;
}

// |a - b| / max(|a|, |b|, floor). The floor keeps entries whose true
// gradient is ~0 from dividing cancellation noise by ~0.
inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradCheck {
  double max_rel = 0.0;
  std::size_t checked = 0;
};

// Compares the autodiff gradient of loss_fn with central differences
// (step h) for every entry of every tensor in `leaves`. `stride` > 1 checks
// every stride-th entry only.
inline GradCheck check_gradients(const std::function<Tensor()>& loss_fn,
                                 const std::vector<Tensor>& leaves, double h = 1e-5,
                                 std::size_t stride = 1, double floor = 1e-6) {
  std::vector<std::vector<double>> analytic;
  {
    TapeScope scope;
    for (Tensor t : leaves) t.zero_grad();
    backward(loss_fn());
    for (const Tensor& t : leaves) analytic.emplace_back(t.grad().begin(), t.grad().end());
  }
  GradCheck out;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    Tensor t = leaves[k];
    for (std::size_t i = 0; i < t.numel(); i += stride) {
      const double saved = t.data()[i];
      t.data()[i] = saved + h;
      const double up = loss_fn().item();
      t.data()[i] = saved - h;
      const double down = loss_fn().item();
      t.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      out.max_rel = std::max(out.max_rel, rel_err(analytic[k][i], numeric, floor));
      ++out.checked;
    }
  }
  return out;
}

}  // namespace vitslim::testing
