#include "vitslim/adamw.hpp"

#include <cmath>

#include "vitslim/error.hpp"

namespace vitslim {

void adamw_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                  std::span<double> v, double lr, const AdamWConfig& config,
                  double weight_decay, std::uint64_t step) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw UsageError("adamw_update: parameter has " + std::to_string(param.size()) +
                     " values but grad/m/v have " + std::to_string(grad.size()) + "/" +
                     std::to_string(m.size()) + "/" + std::to_string(v.size()));
  }
  if (!(lr > 0.0)) throw UsageError("adamw_update: learning rate must be positive");
  if (step == 0) throw UsageError("adamw_update: step counter is 1-based");
  const double t = static_cast<double>(step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  const double decay = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = round_to_precision(config.beta1 * m[i] + (1.0 - config.beta1) * g);
    v[i] = round_to_precision(config.beta2 * v[i] + (1.0 - config.beta2) * g * g);
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] = round_to_precision(param[i] * decay - lr * m_hat / (std::sqrt(v_hat) + config.eps));
  }
}

void AdamW::add(std::string name, Tensor param, double weight_decay) {
  const std::size_t n = param.numel();
  slots_.push_back({std::move(name), std::move(param), weight_decay, std::vector<double>(n, 0.0),
                    std::vector<double>(n, 0.0)});
}

void AdamW::step() {
  ++step_;
  std::vector<double> zeros;
  for (Slot& s : slots_) {
    std::span<const double> g = s.param.grad();
    if (!s.param.has_grad()) {
      zeros.assign(s.param.numel(), 0.0);
      g = zeros;
    }
    adamw_update(s.param.data(), g, s.m, s.v, lr(), config_, s.weight_decay, step_);
  }
}

void AdamW::zero_grad() {
  for (Slot& s : slots_) s.param.zero_grad();
}

}  // namespace vitslim
