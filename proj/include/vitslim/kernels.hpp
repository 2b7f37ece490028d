#pragma once

#include <cstddef>
#include <span>

// Dense numeric kernels behind the autodiff ops.
//
// Two implementations share one contract: `serial` is a plain loop-nest
// reference kept for testing; `parallel` is the cache-friendly OpenMP version
// used in training. Every output element is produced by exactly one thread and
// accumulated in the same (ascending index) order in both, so results are
// bitwise identical regardless of thread count. Reductions across rows
// (weight gradients, layernorm affine gradients) are partitioned over output
// columns, never over the reduced axis.
//
// Matrices are row-major; batched variants take `batch` contiguous operands.
// When `accumulate` is set, results are added to `c` instead of overwriting.
namespace vitslim::kernels {

struct GemmShape {
  std::size_t batch = 1;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t n = 0;
};

enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);

namespace serial {
// c[m×n] = a[m×k] · b[k×n]
void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
// c[m×n] = a[m×k] · b[n×k]ᵀ
void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
// c[m×n] = a[k×m]ᵀ · b[k×n]
void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);

void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y);
void softmax_rows_backward(std::size_t rows, std::size_t n, std::span<const double> y,
                           std::span<const double> dy, std::span<double> dx);

// mean/rstd receive one value per row for reuse by the backward pass.
void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd);
// Any of dx/dgamma/dbeta may be empty to skip it.
void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta);

void gelu(std::span<const double> x, std::span<double> y);
void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx);
}  // namespace serial

namespace parallel {
void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);

void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y);
void softmax_rows_backward(std::size_t rows, std::size_t n, std::span<const double> y,
                           std::span<const double> dy, std::span<double> dx);

void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd);
void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta);

void gelu(std::span<const double> x, std::span<double> y);
void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx);
}  // namespace parallel

// Dispatch to the backend selected by set_backend() (parallel by default).
void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate);
void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y);
void softmax_rows_backward(std::size_t rows, std::size_t n, std::span<const double> y,
                           std::span<const double> dy, std::span<double> dx);
void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd);
void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta);
void gelu(std::span<const double> x, std::span<double> y);
void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx);

}  // namespace vitslim::kernels
