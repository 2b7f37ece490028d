#include "vitslim/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "vitslim/autograd.hpp"
#include "vitslim/error.hpp"
#include "vitslim/kernels.hpp"

namespace vitslim {

namespace detail {
void count_multiplies(std::uint64_t n);
}  // namespace detail

namespace {

using ForwardFn = TapeNode::ForwardFn;
using BackwardFn = TapeNode::BackwardFn;

Tensor make_op(OpKind kind, std::vector<Tensor> inputs, Shape shape, ForwardFn forward,
               BackwardFn backward) {
  std::vector<double> values = forward(inputs);
  round_to_precision(values);
  const bool track =
      grad_enabled() &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  Tensor out(std::move(shape), std::move(values), track);
  if (track) {
    Tape::active().record(
        {kind, std::move(inputs), out, std::move(forward), std::move(backward)});
  }
  return out;
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ConfigError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) +
                    " and " + to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& x, std::size_t rank) {
  if (x.rank() != rank) {
    throw ConfigError(std::string(op) + ": expected rank " + std::to_string(rank) +
                      " tensor, got " + to_string(x.shape()));
  }
}

// The operand with fewer elements must match the trailing axes of the other.
struct Broadcast {
  bool a_is_big;
  std::size_t inner;
  std::size_t outer;
};

Broadcast broadcast_plan(const char* op, const Tensor& a, const Tensor& b) {
  const bool a_big = a.rank() >= b.rank();
  const Shape& big = a_big ? a.shape() : b.shape();
  const Shape& small = a_big ? b.shape() : a.shape();
  if (!std::equal(small.rbegin(), small.rend(), big.rbegin())) shape_error(op, a, b);
  const std::size_t inner = numel(small);
  return {a_big, inner, inner == 0 ? 0 : numel(big) / inner};
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  if (a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
  const kernels::GemmShape s{1, a.dim(0), a.dim(1), b.dim(1)};
  detail::count_multiplies(s.m * s.k * s.n);
  return make_op(
      OpKind::matmul, {a, b}, {s.m, s.n},
      [s](std::span<const Tensor> in) {
        std::vector<double> out(s.m * s.n);
        kernels::gemm_nn(s, in[0].data(), in[1].data(), out, false);
        return out;
      },
      [s](std::span<Tensor> in, const Tensor& out) {
        if (in[0].requires_grad()) {
          kernels::gemm_nt({1, s.m, s.n, s.k}, out.grad(), in[1].data(), in[0].grad(), true);
        }
        if (in[1].requires_grad()) {
          kernels::gemm_tn({1, s.k, s.m, s.n}, in[0].data(), out.grad(), in[1].grad(), true);
        }
      });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require_rank("linear", w, 2);
  if (x.rank() < 1 || x.shape().back() != w.dim(0)) shape_error("linear", x, w);
  const std::size_t k = w.dim(0);
  const std::size_t n = w.dim(1);
  const std::size_t rows = k == 0 ? numel(Shape(x.shape().begin(), x.shape().end() - 1))
                                  : x.numel() / k;
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != n)) shape_error("linear", w, bias);
  Shape shape = x.shape();
  shape.back() = n;
  detail::count_multiplies(rows * k * n);
  std::vector<Tensor> inputs{x, w};
  if (has_bias) inputs.push_back(bias);
  const kernels::GemmShape s{1, rows, k, n};
  return make_op(
      OpKind::linear, std::move(inputs), std::move(shape),
      [s, has_bias](std::span<const Tensor> in) {
        std::vector<double> out(s.m * s.n);
        kernels::gemm_nn(s, in[0].data(), in[1].data(), out, false);
        if (has_bias) {
          auto b = in[2].data();
          for (std::size_t r = 0; r < s.m; ++r) {
            for (std::size_t j = 0; j < s.n; ++j) out[r * s.n + j] += b[j];
          }
        }
        return out;
      },
      [s, has_bias](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        if (in[0].requires_grad()) {
          kernels::gemm_nt({1, s.m, s.n, s.k}, g, in[1].data(), in[0].grad(), true);
        }
        if (in[1].requires_grad()) {
          kernels::gemm_tn({1, s.k, s.m, s.n}, in[0].data(), g, in[1].grad(), true);
        }
        if (has_bias && in[2].requires_grad()) {
          auto db = in[2].grad();
          for (std::size_t r = 0; r < s.m; ++r) {
            for (std::size_t j = 0; j < s.n; ++j) db[j] += g[r * s.n + j];
          }
        }
      });
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank("bmm", a, 3);
  require_rank("bmm", b, 3);
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) shape_error("bmm", a, b);
  const kernels::GemmShape s{a.dim(0), a.dim(1), a.dim(2), b.dim(2)};
  detail::count_multiplies(s.batch * s.m * s.k * s.n);
  return make_op(
      OpKind::bmm, {a, b}, {s.batch, s.m, s.n},
      [s](std::span<const Tensor> in) {
        std::vector<double> out(s.batch * s.m * s.n);
        kernels::gemm_nn(s, in[0].data(), in[1].data(), out, false);
        return out;
      },
      [s](std::span<Tensor> in, const Tensor& out) {
        if (in[0].requires_grad()) {
          kernels::gemm_nt({s.batch, s.m, s.n, s.k}, out.grad(), in[1].data(), in[0].grad(),
                           true);
        }
        if (in[1].requires_grad()) {
          kernels::gemm_tn({s.batch, s.k, s.m, s.n}, in[0].data(), out.grad(), in[1].grad(),
                           true);
        }
      });
}

Tensor bmm_nt(const Tensor& a, const Tensor& b) {
  require_rank("bmm_nt", a, 3);
  require_rank("bmm_nt", b, 3);
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2)) shape_error("bmm_nt", a, b);
  const kernels::GemmShape s{a.dim(0), a.dim(1), a.dim(2), b.dim(1)};
  detail::count_multiplies(s.batch * s.m * s.k * s.n);
  return make_op(
      OpKind::bmm_nt, {a, b}, {s.batch, s.m, s.n},
      [s](std::span<const Tensor> in) {
        std::vector<double> out(s.batch * s.m * s.n);
        kernels::gemm_nt(s, in[0].data(), in[1].data(), out, false);
        return out;
      },
      [s](std::span<Tensor> in, const Tensor& out) {
        if (in[0].requires_grad()) {
          kernels::gemm_nn({s.batch, s.m, s.n, s.k}, out.grad(), in[1].data(), in[0].grad(),
                           true);
        }
        if (in[1].requires_grad()) {
          kernels::gemm_tn({s.batch, s.n, s.m, s.k}, out.grad(), in[0].data(), in[1].grad(),
                           true);
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const Broadcast bc = broadcast_plan("add", a, b);
  const Shape shape = bc.a_is_big ? a.shape() : b.shape();
  return make_op(
      OpKind::add, {a, b}, shape,
      [bc](std::span<const Tensor> in) {
        auto big = in[bc.a_is_big ? 0 : 1].data();
        auto small = in[bc.a_is_big ? 1 : 0].data();
        std::vector<double> out(big.size());
        for (std::size_t o = 0; o < bc.outer; ++o) {
          for (std::size_t i = 0; i < bc.inner; ++i) {
            const std::size_t idx = o * bc.inner + i;
            // Operand order is preserved so a+b and b+a round identically.
            out[idx] = bc.a_is_big ? big[idx] + small[i] : small[i] + big[idx];
          }
        }
        return out;
      },
      [bc](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        Tensor& big = in[bc.a_is_big ? 0 : 1];
        Tensor& small = in[bc.a_is_big ? 1 : 0];
        if (big.requires_grad()) {
          auto db = big.grad();
          for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
        }
        if (small.requires_grad()) {
          auto ds = small.grad();
          for (std::size_t o = 0; o < bc.outer; ++o) {
            for (std::size_t i = 0; i < bc.inner; ++i) ds[i] += g[o * bc.inner + i];
          }
        }
      });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  const Broadcast bc = broadcast_plan("hadamard", a, b);
  const Shape shape = bc.a_is_big ? a.shape() : b.shape();
  return make_op(
      OpKind::hadamard, {a, b}, shape,
      [bc](std::span<const Tensor> in) {
        auto big = in[bc.a_is_big ? 0 : 1].data();
        auto small = in[bc.a_is_big ? 1 : 0].data();
        std::vector<double> out(big.size());
        for (std::size_t o = 0; o < bc.outer; ++o) {
          for (std::size_t i = 0; i < bc.inner; ++i) {
            out[o * bc.inner + i] = big[o * bc.inner + i] * small[i];
          }
        }
        return out;
      },
      [bc](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        Tensor& big = in[bc.a_is_big ? 0 : 1];
        Tensor& small = in[bc.a_is_big ? 1 : 0];
        auto bv = big.data();
        auto sv = small.data();
        if (big.requires_grad()) {
          auto db = big.grad();
          for (std::size_t o = 0; o < bc.outer; ++o) {
            for (std::size_t i = 0; i < bc.inner; ++i) {
              db[o * bc.inner + i] += g[o * bc.inner + i] * sv[i];
            }
          }
        }
        if (small.requires_grad()) {
          auto ds = small.grad();
          for (std::size_t o = 0; o < bc.outer; ++o) {
            for (std::size_t i = 0; i < bc.inner; ++i) {
              ds[i] += g[o * bc.inner + i] * bv[o * bc.inner + i];
            }
          }
        }
      });
}

Tensor scale(const Tensor& x, double factor) {
  return make_op(
      OpKind::scale, {x}, x.shape(),
      [factor](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * factor;
        return out;
      },
      [factor](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * factor;
      });
}

Tensor gelu(const Tensor& x) {
  return make_op(
      OpKind::gelu, {x}, x.shape(),
      [](std::span<const Tensor> in) {
        std::vector<double> out(in[0].numel());
        kernels::gelu(in[0].data(), out);
        return out;
      },
      [](std::span<Tensor> in, const Tensor& out) {
        kernels::gelu_backward(in[0].data(), out.grad(), in[0].grad());
      });
}

Tensor tanh(const Tensor& x) {
  return make_op(
      OpKind::tanh, {x}, x.shape(),
      [](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
        return out;
      },
      [](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto y = out.data();
        auto dx = in[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
      });
}

Tensor softmax_lastdim(const Tensor& x) {
  if (x.rank() == 0 || x.shape().back() == 0) {
    throw ConfigError("softmax_lastdim: last axis must be non-empty, got " +
                      to_string(x.shape()));
  }
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.numel() / n;
  return make_op(
      OpKind::softmax, {x}, x.shape(),
      [rows, n](std::span<const Tensor> in) {
        std::vector<double> out(rows * n);
        kernels::softmax_rows(rows, n, in[0].data(), out);
        return out;
      },
      [rows, n](std::span<Tensor> in, const Tensor& out) {
        kernels::softmax_rows_backward(rows, n, out.data(), out.grad(), in[0].grad());
      });
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (!(eps > 0.0)) throw ConfigError("layernorm: eps must be positive");
  if (x.rank() == 0 || gamma.rank() != 1 || beta.rank() != 1 ||
      gamma.dim(0) != x.shape().back() || beta.dim(0) != x.shape().back()) {
    shape_error("layernorm", x, gamma);
  }
  const std::size_t n = x.shape().back();
  const std::size_t rows = n == 0 ? 0 : x.numel() / n;
  auto mean = std::make_shared<std::vector<double>>(rows);
  auto rstd = std::make_shared<std::vector<double>>(rows);
  return make_op(
      OpKind::layernorm, {x, gamma, beta}, x.shape(),
      [rows, n, eps, mean, rstd](std::span<const Tensor> in) {
        std::vector<double> out(rows * n);
        kernels::layernorm_rows(rows, n, in[0].data(), in[1].data(), in[2].data(), eps, out,
                                *mean, *rstd);
        return out;
      },
      [rows, n, mean, rstd](std::span<Tensor> in, const Tensor& out) {
        std::span<double> dx, dgamma, dbeta;
        if (in[0].requires_grad()) dx = in[0].grad();
        if (in[1].requires_grad()) dgamma = in[1].grad();
        if (in[2].requires_grad()) dbeta = in[2].grad();
        kernels::layernorm_rows_backward(rows, n, in[0].data(), in[1].data(), *mean, *rstd,
                                         out.grad(), dx, dgamma, dbeta);
      });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels) {
  require_rank("cross_entropy", logits, 2);
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  if (labels.size() != batch) {
    throw DataError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                    std::to_string(batch));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw DataError("cross_entropy: label " + std::to_string(labels[i]) + " at index " +
                      std::to_string(i) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
  std::vector<std::int32_t> y(labels.begin(), labels.end());
  return make_op(
      OpKind::cross_entropy, {logits}, {1},
      [batch, classes, y](std::span<const Tensor> in) {
        auto v = in[0].data();
        double total = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          const double* row = v.data() + b * classes;
          const double mx = *std::max_element(row, row + classes);
          double sum = 0.0;
          for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
          total += mx + std::log(sum) - row[y[b]];
        }
        return std::vector<double>{total / static_cast<double>(batch)};
      },
      [batch, classes, y](std::span<Tensor> in, const Tensor& out) {
        const double g = out.grad()[0] / static_cast<double>(batch);
        auto v = in[0].data();
        auto dx = in[0].grad();
        for (std::size_t b = 0; b < batch; ++b) {
          const double* row = v.data() + b * classes;
          const double mx = *std::max_element(row, row + classes);
          double sum = 0.0;
          for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
          for (std::size_t c = 0; c < classes; ++c) {
            const double p = std::exp(row[c] - mx) / sum;
            dx[b * classes + c] += g * (p - (static_cast<std::size_t>(y[b]) == c ? 1.0 : 0.0));
          }
        }
      });
}

Tensor l1_norm(const Tensor& x) {
  return make_op(
      OpKind::l1_norm, {x}, {1},
      [](std::span<const Tensor> in) {
        double s = 0.0;
        for (double v : in[0].data()) s += std::abs(v);
        return std::vector<double>{s};
      },
      [](std::span<Tensor> in, const Tensor& out) {
        const double g = out.grad()[0];
        auto v = in[0].data();
        auto dx = in[0].grad();
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (v[i] > 0.0) dx[i] += g;
          else if (v[i] < 0.0) dx[i] -= g;
        }
      });
}

Tensor slice_lastdim(const Tensor& x, std::size_t offset, std::size_t length) {
  if (x.rank() == 0 || offset + length > x.shape().back()) {
    throw ConfigError("slice_lastdim: range [" + std::to_string(offset) + ", " +
                      std::to_string(offset + length) + ") outside " + to_string(x.shape()));
  }
  const std::size_t n = x.shape().back();
  const std::size_t rows = n == 0 ? 0 : x.numel() / n;
  Shape shape = x.shape();
  shape.back() = length;
  return make_op(
      OpKind::slice_lastdim, {x}, std::move(shape),
      [rows, n, offset, length](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(rows * length);
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * n + offset), length,
                      out.begin() + static_cast<std::ptrdiff_t>(r * length));
        }
        return out;
      },
      [rows, n, offset, length](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < length; ++j) dx[r * n + offset + j] += g[r * length + j];
        }
      });
}

Tensor concat_lastdim(std::span<const Tensor> parts) {
  if (parts.empty()) throw ConfigError("concat_lastdim: no inputs");
  const Shape lead(parts[0].shape().begin(), parts[0].shape().end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != lead.size() + 1 || !std::equal(lead.begin(), lead.end(), p.shape().begin())) {
      shape_error("concat_lastdim", parts[0], p);
    }
    widths.push_back(p.shape().back());
    total += p.shape().back();
  }
  const std::size_t rows = numel(lead);
  Shape shape = lead;
  shape.push_back(total);
  return make_op(
      OpKind::concat_lastdim, std::vector<Tensor>(parts.begin(), parts.end()), std::move(shape),
      [rows, total, widths](std::span<const Tensor> in) {
        std::vector<double> out(rows * total);
        std::size_t offset = 0;
        for (std::size_t p = 0; p < in.size(); ++p) {
          auto v = in[p].data();
          for (std::size_t r = 0; r < rows; ++r) {
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * widths[p]), widths[p],
                        out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
          }
          offset += widths[p];
        }
        return out;
      },
      [rows, total, widths](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        std::size_t offset = 0;
        for (std::size_t p = 0; p < in.size(); ++p) {
          if (in[p].requires_grad()) {
            auto dx = in[p].grad();
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t j = 0; j < widths[p]; ++j) {
                dx[r * widths[p] + j] += g[r * total + offset + j];
              }
            }
          }
          offset += widths[p];
        }
      });
}

Tensor select_row(const Tensor& x, std::size_t index) {
  if (x.rank() < 2 || index >= x.dim(0)) {
    throw ConfigError("select_row: index " + std::to_string(index) + " outside " +
                      to_string(x.shape()));
  }
  Shape shape(x.shape().begin() + 1, x.shape().end());
  const std::size_t width = numel(shape);
  return make_op(
      OpKind::select_row, {x}, std::move(shape),
      [index, width](std::span<const Tensor> in) {
        auto v = in[0].data().subspan(index * width, width);
        return std::vector<double>(v.begin(), v.end());
      },
      [index, width](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t i = 0; i < width; ++i) dx[index * width + i] += g[i];
      });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ConfigError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  return make_op(
      OpKind::reshape, {x}, std::move(shape),
      [](std::span<const Tensor> in) {
        return std::vector<double>(in[0].data().begin(), in[0].data().end());
      },
      [](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
      });
}

Tensor select_token(const Tensor& x, std::size_t token) {
  require_rank("select_token", x, 3);
  if (token >= x.dim(1)) {
    throw ConfigError("select_token: token " + std::to_string(token) + " outside " +
                      to_string(x.shape()));
  }
  const std::size_t B = x.dim(0), T = x.dim(1), D = x.dim(2);
  return make_op(
      OpKind::select_token, {x}, {B, D},
      [B, T, D, token](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(B * D);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t d = 0; d < D; ++d) out[b * D + d] = v[(b * T + token) * D + d];
        }
        return out;
      },
      [B, T, D, token](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t d = 0; d < D; ++d) dx[(b * T + token) * D + d] += g[b * D + d];
        }
      });
}

Tensor mean_tokens(const Tensor& x) {
  require_rank("mean_tokens", x, 3);
  const std::size_t B = x.dim(0), T = x.dim(1), D = x.dim(2);
  if (T == 0) throw ConfigError("mean_tokens: no tokens to pool");
  return make_op(
      OpKind::mean_tokens, {x}, {B, D},
      [B, T, D](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(B * D, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t d = 0; d < D; ++d) out[b * D + d] += v[(b * T + t) * D + d];
          }
        }
        for (double& o : out) o /= static_cast<double>(T);
        return out;
      },
      [B, T, D](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t d = 0; d < D; ++d) {
              dx[(b * T + t) * D + d] += g[b * D + d] / static_cast<double>(T);
            }
          }
        }
      });
}

Tensor gather_tokens(const Tensor& x, std::span<const std::size_t> tokens) {
  require_rank("gather_tokens", x, 3);
  const std::size_t B = x.dim(0), T = x.dim(1), D = x.dim(2);
  for (std::size_t t : tokens) {
    if (t >= T) {
      throw ConfigError("gather_tokens: token " + std::to_string(t) + " outside " +
                        to_string(x.shape()));
    }
  }
  std::vector<std::size_t> idx(tokens.begin(), tokens.end());
  const std::size_t K = idx.size();
  return make_op(
      OpKind::gather_tokens, {x}, {B, K, D},
      [B, T, D, idx](std::span<const Tensor> in) {
        auto v = in[0].data();
        std::vector<double> out(B * idx.size() * D);
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t k = 0; k < idx.size(); ++k) {
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>((b * T + idx[k]) * D), D,
                        out.begin() + static_cast<std::ptrdiff_t>((b * idx.size() + k) * D));
          }
        }
        return out;
      },
      [B, T, D, idx](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto dx = in[0].grad();
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t k = 0; k < idx.size(); ++k) {
            for (std::size_t d = 0; d < D; ++d) {
              dx[(b * T + idx[k]) * D + d] += g[(b * idx.size() + k) * D + d];
            }
          }
        }
      });
}

Tensor scale_patch_tokens(const Tensor& x, const Tensor& scales, std::size_t first_patch) {
  require_rank("scale_patch_tokens", x, 3);
  require_rank("scale_patch_tokens", scales, 1);
  const std::size_t B = x.dim(0), T = x.dim(1), D = x.dim(2);
  if (first_patch > T || scales.dim(0) != T - first_patch) {
    shape_error("scale_patch_tokens", x, scales);
  }
  return make_op(
      OpKind::scale_patch_tokens, {x, scales}, x.shape(),
      [B, T, D, first_patch](std::span<const Tensor> in) {
        auto v = in[0].data();
        auto s = in[1].data();
        std::vector<double> out(v.begin(), v.end());
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t t = first_patch; t < T; ++t) {
            const double f = s[t - first_patch];
            for (std::size_t d = 0; d < D; ++d) out[(b * T + t) * D + d] *= f;
          }
        }
        return out;
      },
      [B, T, D, first_patch](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        auto v = in[0].data();
        auto s = in[1].data();
        if (in[0].requires_grad()) {
          auto dx = in[0].grad();
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t t = 0; t < T; ++t) {
              const double f = t < first_patch ? 1.0 : s[t - first_patch];
              for (std::size_t d = 0; d < D; ++d) dx[(b * T + t) * D + d] += g[(b * T + t) * D + d] * f;
            }
          }
        }
        if (in[1].requires_grad()) {
          auto ds = in[1].grad();
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t t = first_patch; t < T; ++t) {
              double acc = 0.0;
              for (std::size_t d = 0; d < D; ++d) {
                acc += g[(b * T + t) * D + d] * v[(b * T + t) * D + d];
              }
              ds[t - first_patch] += acc;
            }
          }
        }
      });
}

Tensor prepend_token(const Tensor& token, const Tensor& x) {
  require_rank("prepend_token", token, 1);
  require_rank("prepend_token", x, 3);
  const std::size_t B = x.dim(0), N = x.dim(1), D = x.dim(2);
  if (token.dim(0) != D) shape_error("prepend_token", token, x);
  return make_op(
      OpKind::prepend_token, {token, x}, {B, N + 1, D},
      [B, N, D](std::span<const Tensor> in) {
        auto tok = in[0].data();
        auto v = in[1].data();
        std::vector<double> out(B * (N + 1) * D);
        for (std::size_t b = 0; b < B; ++b) {
          std::copy(tok.begin(), tok.end(), out.begin() + static_cast<std::ptrdiff_t>(b * (N + 1) * D));
          std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(b * N * D), N * D,
                      out.begin() + static_cast<std::ptrdiff_t>((b * (N + 1) + 1) * D));
        }
        return out;
      },
      [B, N, D](std::span<Tensor> in, const Tensor& out) {
        auto g = out.grad();
        if (in[0].requires_grad()) {
          auto dt = in[0].grad();
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t d = 0; d < D; ++d) dt[d] += g[b * (N + 1) * D + d];
          }
        }
        if (in[1].requires_grad()) {
          auto dx = in[1].grad();
          for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t i = 0; i < N * D; ++i) dx[b * N * D + i] += g[(b * (N + 1) + 1) * D + i];
          }
        }
      });
}

}  // namespace vitslim
