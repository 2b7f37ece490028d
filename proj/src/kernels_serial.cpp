// Reference kernels: straightforward loop nests, no threading.
#include <algorithm>
#include <cmath>

#include "kernels_common.hpp"
#include "vitslim/kernels.hpp"

namespace vitslim::kernels::serial {

void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  for (std::size_t g = 0; g < s.batch; ++g) {
    const double* A = a.data() + g * s.m * s.k;
    const double* B = b.data() + g * s.k * s.n;
    double* C = c.data() + g * s.m * s.n;
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        double acc = accumulate ? C[i * s.n + j] : 0.0;
        for (std::size_t p = 0; p < s.k; ++p) acc += A[i * s.k + p] * B[p * s.n + j];
        C[i * s.n + j] = acc;
      }
    }
  }
}

void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  for (std::size_t g = 0; g < s.batch; ++g) {
    const double* A = a.data() + g * s.m * s.k;
    const double* B = b.data() + g * s.n * s.k;
    double* C = c.data() + g * s.m * s.n;
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        double acc = accumulate ? C[i * s.n + j] : 0.0;
        for (std::size_t p = 0; p < s.k; ++p) acc += A[i * s.k + p] * B[j * s.k + p];
        C[i * s.n + j] = acc;
      }
    }
  }
}

void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  for (std::size_t g = 0; g < s.batch; ++g) {
    const double* A = a.data() + g * s.k * s.m;
    const double* B = b.data() + g * s.k * s.n;
    double* C = c.data() + g * s.m * s.n;
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        double acc = accumulate ? C[i * s.n + j] : 0.0;
        for (std::size_t p = 0; p < s.k; ++p) acc += A[p * s.m + i] * B[p * s.n + j];
        C[i * s.n + j] = acc;
      }
    }
  }
}

void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * n;
    double* yr = y.data() + r * n;
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
  for (std::size_t r = 0; r < rows; ++r) {
    const double* yr = y.data() + r * n;
    const double* gr = dy.data() + r * n;
    double dot = 0.0;
    for (std::size_t j = 0; j < n; ++j) dot += yr[j] * gr[j];
    for (std::size_t j = 0; j < n; ++j) dx[r * n + j] += yr[j] * (gr[j] - dot);
  }
}

void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd) {
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < rows; ++r) {
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
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] = (xr[j] - mu) * rs * gamma[j] + beta[j];
  }
}

void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta) {
  const double inv_n = 1.0 / static_cast<double>(n);
  if (!dx.empty()) {
    for (std::size_t r = 0; r < rows; ++r) {
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
      for (std::size_t j = 0; j < n; ++j) {
        const double xhat = (xr[j] - mean[r]) * rstd[r];
        const double g = gr[j] * gamma[j];
        dx[r * n + j] += rstd[r] * (g - sum_g * inv_n - xhat * (sum_gx * inv_n));
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double xhat = (x[r * n + j] - mean[r]) * rstd[r];
      if (!dgamma.empty()) dgamma[j] += dy[r * n + j] * xhat;
      if (!dbeta.empty()) dbeta[j] += dy[r * n + j];
    }
  }
}

void gelu(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = detail::gelu(x[i]);
}

void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx) {
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] += dy[i] * detail::gelu_grad(x[i]);
}

}  // namespace vitslim::kernels::serial
