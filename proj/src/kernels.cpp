#include "vitslim/kernels.hpp"

namespace vitslim::kernels {

namespace {
Backend g_backend = Backend::parallel;
}  // namespace

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

#define VITSLIM_DISPATCH(fn, ...)                                        \
  do {                                                                   \
    if (g_backend == Backend::serial) return serial::fn(__VA_ARGS__);    \
    return parallel::fn(__VA_ARGS__);                                    \
  } while (0)

void gemm_nn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  VITSLIM_DISPATCH(gemm_nn, s, a, b, c, accumulate);
}
void gemm_nt(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  VITSLIM_DISPATCH(gemm_nt, s, a, b, c, accumulate);
}
void gemm_tn(GemmShape s, std::span<const double> a, std::span<const double> b,
             std::span<double> c, bool accumulate) {
  VITSLIM_DISPATCH(gemm_tn, s, a, b, c, accumulate);
}
void softmax_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                  std::span<double> y) {
  VITSLIM_DISPATCH(softmax_rows, rows, n, x, y);
}
void softmax_rows_backward(std::size_t rows, std::size_t n, std::span<const double> y,
                           std::span<const double> dy, std::span<double> dx) {
  VITSLIM_DISPATCH(softmax_rows_backward, rows, n, y, dy, dx);
}
void layernorm_rows(std::size_t rows, std::size_t n, std::span<const double> x,
                    std::span<const double> gamma, std::span<const double> beta, double eps,
                    std::span<double> y, std::span<double> mean, std::span<double> rstd) {
  VITSLIM_DISPATCH(layernorm_rows, rows, n, x, gamma, beta, eps, y, mean, rstd);
}
void layernorm_rows_backward(std::size_t rows, std::size_t n, std::span<const double> x,
                             std::span<const double> gamma, std::span<const double> mean,
                             std::span<const double> rstd, std::span<const double> dy,
                             std::span<double> dx, std::span<double> dgamma,
                             std::span<double> dbeta) {
  VITSLIM_DISPATCH(layernorm_rows_backward, rows, n, x, gamma, mean, rstd, dy, dx, dgamma,
                   dbeta);
}
void gelu(std::span<const double> x, std::span<double> y) { VITSLIM_DISPATCH(gelu, x, y); }
void gelu_backward(std::span<const double> x, std::span<const double> dy,
                   std::span<double> dx) {
  VITSLIM_DISPATCH(gelu_backward, x, dy, dx);
}

#undef VITSLIM_DISPATCH

}  // namespace vitslim::kernels
