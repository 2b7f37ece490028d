#include <algorithm>
#include <cmath>
#include <vector>

#include "kernels_common.hpp"
#include "vitslim/kernels.hpp"

namespace vitslim::kernels::parallel {

using detail::kParallelThreshold;

void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(s.batch * s.m);
  const bool wide = s.batch * s.m * s.k * s.n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    const std::size_t g = static_cast<std::size_t>(row) / s.m;
    const double* A = a.data() + static_cast<std::size_t>(row) * s.k;
    const double* B = b.data() + g * s.k * s.n;
    double* C = c.data() + static_cast<std::size_t>(row) * s.n;
    if (!accumulate) std::fill(C, C + s.n, 0.0);
    for (std::size_t p = 0; p < s.k; ++p) {
      const double av = A[p];
      const double* Bp = B + p * s.n;
      for (std::size_t j = 0; j < s.n; ++j) C[j] += av * Bp[j];
    }
  }
}

void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(s.batch * s.m);
  const bool wide = s.batch * s.m * s.k * s.n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    const std::size_t g = static_cast<std::size_t>(row) / s.m;
    const double* A = a.data() + static_cast<std::size_t>(row) * s.k;
    const double* B = b.data() + g * s.n * s.k;
    double* C = c.data() + static_cast<std::size_t>(row) * s.n;
    for (std::size_t j = 0; j < s.n; ++j) {
      const double* Bj = B + j * s.k;
      double acc = accumulate ? C[j] : 0.0;
      for (std::size_t p = 0; p < s.k; ++p) acc += A[p] * Bj[p];
      C[j] = acc;
    }
  }
}

void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(s.batch * s.m);
  const bool wide = s.batch * s.m * s.k * s.n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t row = 0; row < rows; ++row) {
    const std::size_t g = static_cast<std::size_t>(row) / s.m;
    const std::size_t i = static_cast<std::size_t>(row) % s.m;
    const double* A = a.data() + g * s.k * s.m;
    const double* B = b.data() + g * s.k * s.n;
    double* C = c.data() + static_cast<std::size_t>(row) * s.n;
    if (!accumulate) std::fill(C, C + s.n, 0.0);
    for (std::size_t p = 0; p < s.k; ++p) {
      const double av = A[p * s.m + i];
      const double* Bp = B + p * s.n;
      for (std::size_t j = 0; j < s.n; ++j) C[j] += av * Bp[j];
    }
  }
}

void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y) {
  const bool wide = rows * n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    const double* xr = x.data() + static_cast<std::size_t>(r) * n;
    double* yr = y.data() + static_cast<std::size_t>(r) * n;
    double mx = xr[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= sum;
  }
}

void softmax_rows_backward(std::size_t rows, std::size_t n, std::span<const double> y,
                           std::span<const double> dy, std::span<double> dx) {
  const bool wide = rows * n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(rows); ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * n;
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += y[base + j] * dy[base + j];
    for (std::size_t j = 0; j < n; ++j) dx[base + j] += y[base + j] * (dy[base + j] - dot);
  }
}

void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd) {
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool wide = rows * n > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(rows); ++ri) {
    const std::size_t r = static_cast<std::size_t>(ri);
    const double* xr = x.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xr[j];
    mu *= inv_n;
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var *= inv_n;
    const double rs = 1.0 / std::sqrt(var + eps);
    mean[r] = mu;
    rstd[r] = rs;
    double* yr = y.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) yr[j] = (xr[j] - mu) * rs * gamma[j] + beta[j];
  }
}

void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta) {
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool wide = rows * n > kParallelThreshold;
  if (!dx.empty()) {
#pragma omp parallel for schedule(static) if (wide)
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(rows); ++ri) {
      const std::size_t r = static_cast<std::size_t>(ri);
      const double* xr = x.data() + r * n;
      const double* gr = dy.data() + r * n;
      double sum_g = 0.0;
      double sum_gx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean[r]) * rstd[r];
        const double g = gr[j] * gamma[j];
        sum_g += g;
        sum_gx += g * xhat;
      }
      double* dr = dx.data() + r * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean[r]) * rstd[r];
        const double g = gr[j] * gamma[j];
        dr[j] += rstd[r] * (g - sum_g * inv_n - xhat * (sum_gx * inv_n));
      }
    }
  }
  // Column sums keep rows in ascending order; traverse row-major for locality.
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    const double* gr = dy.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double xhat = (xr[j] - mean[r]) * rstd[r];
      if (!dgamma.empty()) dgamma[j] += gr[j] * xhat;
      if (!dbeta.empty()) dbeta[j] += gr[j];
    }
  }
}

void gelu(std::span<const double> x, std::span<double> y) {
  const bool wide = x.size() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i) {
    y[static_cast<std::size_t>(i)] = detail::gelu(x[static_cast<std::size_t>(i)]);
  }
}

void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx) {
  const bool wide = x.size() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(x.size()); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    dx[i] += dy[i] * detail::gelu_grad(x[i]);
  }
}

}  // namespace vitslim::kernels::parallel
