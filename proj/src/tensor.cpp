#include "vitslim/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

#include "vitslim/error.hpp"

namespace vitslim {

namespace {
Precision g_precision = Precision::f32;
}  // namespace

Precision precision() { return g_precision; }
void set_precision(Precision p) { g_precision = p; }

const char* to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& name) {
  if (name == "f32" || name == "float32") return Precision::f32;
  if (name == "f64" || name == "float64") return Precision::f64;
  throw ConfigError("unknown precision '" + name + "' (expected f32 or f64)");
}

double round_to_precision(double v) {
  return g_precision == Precision::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}

void round_to_precision(std::span<double> values) {
  if (g_precision == Precision::f64) return;
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  impl_->data.assign(vitslim::numel(shape), 0.0);
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (vitslim::numel(shape) != data.size()) {
    throw ConfigError("tensor shape " + to_string(shape) + " holds " +
                      std::to_string(vitslim::numel(shape)) + " values, got " +
                      std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return Tensor(std::move(shape), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  std::fill(t.impl_->data.begin(), t.impl_->data.end(), round_to_precision(value));
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {round_to_precision(value)}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw UsageError("item() on tensor of shape " + to_string(shape()));
  }
  return impl_->data[0];
}

std::span<double> Tensor::grad() {
  if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorImpl>(*impl_);
  return t;
}

Tensor Tensor::clone_as_leaf(bool requires_grad) const {
  return Tensor(impl_->shape, impl_->data, requires_grad);
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  auto x = a.data();
  auto y = b.data();
  return x.empty() || std::memcmp(x.data(), y.data(), x.size_bytes()) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("max_abs_diff: shapes " + to_string(a.shape()) + " and " +
                      to_string(b.shape()) + " differ");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace vitslim
