#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "vitslim/error.hpp"
#include "vitslim/kernels.hpp"
#include "vitslim/ops.hpp"

using namespace vitslim;
using vitslim::testing::check_gradients;
using vitslim::testing::random_tensor;

namespace {

class F64 : public ::testing::Test {
 protected:
  PrecisionScope scope_{Precision::f64};
};

using Matmul = F64;
using Softmax = F64;
using LayerNorm = F64;
using Elementwise = F64;
using CrossEntropy = F64;
using L1 = F64;
using Backward = F64;
using Tape = F64;
using Kernels = F64;

TEST_F(Matmul, IdentityLeavesOperandUnchanged) {
  Rng rng(1);
  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor x = random_tensor({3, 3}, rng);
  EXPECT_TRUE(bitwise_equal(matmul(eye, x), x));
}

TEST_F(Matmul, TwoByTwo) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 1}, {1, 1});
  Tensor c = matmul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 1}));
  EXPECT_EQ(c[0], 3.0);
  EXPECT_EQ(c[1], 7.0);
}

TEST_F(Matmul, MatchesTripleLoop) {
  Rng rng(2);
  Tensor a = random_tensor({5, 4}, rng);
  Tensor b = random_tensor({4, 3}, rng);
  Tensor c = matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a[i * 4 + k] * b[k * 3 + j];
      EXPECT_LT(std::abs(c[i * 3 + j] - s), 1e-12);
    }
  }
}

TEST_F(Matmul, ShapeMismatchNamesBothShapes) {
  Tensor a({2, 3}), b({4, 2});
  try {
    matmul(a, b);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("[2x3]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("[4x2]"), std::string::npos) << e.what();
  }
}

TEST_F(Matmul, CounterAddsMKN) {
  Rng rng(3);
  reset_multiply_count();
  matmul(random_tensor({5, 4}, rng), random_tensor({4, 3}, rng));
  EXPECT_EQ(multiply_count(), 60u);
  matmul(random_tensor({2, 7}, rng), random_tensor({7, 6}, rng));
  EXPECT_EQ(multiply_count(), 60u + 84u);
  bmm(random_tensor({3, 2, 5}, rng), random_tensor({3, 5, 4}, rng));
  EXPECT_EQ(multiply_count(), 60u + 84u + 120u);
  linear(random_tensor({2, 3, 4}, rng), random_tensor({4, 5}, rng), random_tensor({5}, rng));
  EXPECT_EQ(multiply_count(), 60u + 84u + 120u + 120u);
}

TEST_F(Matmul, CounterIgnoresBackward) {
  Rng rng(4);
  Tensor a = random_tensor({3, 4}, rng, -1, 1, true);
  Tensor b = random_tensor({4, 2}, rng, -1, 1, true);
  TapeScope scope;
  Tensor loss = l1_norm(matmul(a, b));
  reset_multiply_count();
  backward(loss);
  EXPECT_EQ(multiply_count(), 0u);
}

TEST_F(Matmul, RandomSequencesCountExactly) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    reset_multiply_count();
    std::uint64_t expect = 0;
    for (int op = 0; op < 5; ++op) {
      const std::size_t m = 1 + rng.uniform_index(6), k = 1 + rng.uniform_index(6),
                        n = 1 + rng.uniform_index(6);
      matmul(random_tensor({m, k}, rng), random_tensor({k, n}, rng));
      expect += m * k * n;
    }
    EXPECT_EQ(multiply_count(), expect);
  }
}

TEST_F(Softmax, UniformInput) {
  Tensor y = softmax_lastdim(Tensor({4}, {0, 0, 0, 0}));
  for (double v : y.data()) EXPECT_EQ(v, 0.25);
}

TEST_F(Softmax, LargeLogitDoesNotOverflow) {
  Tensor y = softmax_lastdim(Tensor({2}, {1000, 0}));
  EXPECT_NEAR(y[0], 1.0, 1e-12);
  EXPECT_NEAR(y[1], 0.0, 1e-12);
}

TEST_F(Softmax, MatchesDirectFormula) {
  Rng rng(6);
  Tensor x = random_tensor({7}, rng, -3, 3);
  Tensor y = softmax_lastdim(x);
  double z = 0.0;
  for (double v : x.data()) z += std::exp(v);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_LT(std::abs(y[i] - std::exp(x[i]) / z), 1e-14);
}

TEST_F(Softmax, RowsSumToOneProperty) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.uniform_index(5), n = 1 + rng.uniform_index(9);
    const double span = std::pow(10.0, rng.uniform() * 4.0);
    Tensor y = softmax_lastdim(random_tensor({rows, n}, rng, -span, span));
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += y[r * n + j];
      ASSERT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST_F(Softmax, RowsSumToOneInF32) {
  PrecisionScope f32(Precision::f32);
  Rng rng(8);
  Tensor y = softmax_lastdim(random_tensor({16, 17}, rng, -20, 20));
  for (std::size_t r = 0; r < 16; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < 17; ++j) s += y[r * 17 + j];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST_F(LayerNorm, ConstantSliceCollapsesToBeta) {
  Tensor y = layernorm(Tensor({3}, {5, 5, 5}), Tensor::full({3}, 1.0), Tensor::zeros({3}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST_F(LayerNorm, TwoPointStandardization) {
  Tensor y = layernorm(Tensor({2}, {1, 3}), Tensor::full({2}, 1.0), Tensor::zeros({2}), 1e-12);
  EXPECT_NEAR(y[0], -1.0, 1e-9);
  EXPECT_NEAR(y[1], 1.0, 1e-9);
}

TEST_F(LayerNorm, MatchesScalarOracle) {
  Rng rng(9);
  Tensor x = random_tensor({4, 6}, rng, -2, 2);
  Tensor g = random_tensor({6}, rng);
  Tensor b = random_tensor({6}, rng);
  Tensor y = layernorm(x, g, b, 1e-6);
  for (std::size_t r = 0; r < 4; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 6; ++j) mean += x[r * 6 + j] / 6.0;
    for (std::size_t j = 0; j < 6; ++j) var += (x[r * 6 + j] - mean) * (x[r * 6 + j] - mean) / 6.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double want = (x[r * 6 + j] - mean) / std::sqrt(var + 1e-6) * g[j] + b[j];
      EXPECT_LT(std::abs(y[r * 6 + j] - want), 1e-12);
    }
  }
}

TEST_F(LayerNorm, OutputStandardizedBeforeAffine) {
  Rng rng(10);
  Tensor y = layernorm(random_tensor({3, 8}, rng, -5, 5), Tensor::full({8}, 1.0),
                       Tensor::zeros({8}), 1e-12);
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < 8; ++j) mean += y[r * 8 + j] / 8.0;
    for (std::size_t j = 0; j < 8; ++j) sq += y[r * 8 + j] * y[r * 8 + j] / 8.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq, 1.0, 1e-9);
  }
}

TEST_F(Elementwise, TanhOfThreeIsNearlyOne) {
  const double v = vitslim::tanh(Tensor::scalar(3.0)).item();
  EXPECT_NEAR(v, 0.99505, 1e-5);
  EXPECT_GT(v, 0.995);
}

TEST_F(Elementwise, HadamardWithOnesIsIdentity) {
  Rng rng(11);
  Tensor x = random_tensor({4, 5}, rng);
  EXPECT_TRUE(bitwise_equal(hadamard(x, Tensor::full({5}, 1.0)), x));
  EXPECT_TRUE(bitwise_equal(hadamard(x, Tensor::full({4, 5}, 1.0)), x));
}

TEST_F(Elementwise, GeluMatchesErfOracle) {
  EXPECT_EQ(gelu(Tensor::scalar(0.0)).item(), 0.0);
  const double x = 3.0;
  EXPECT_LT(std::abs(gelu(Tensor::scalar(x)).item() - 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)))),
            1e-12);
}

TEST_F(Elementwise, MaskBroadcastsAlongTrailingAxis) {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor y = hadamard(x, Tensor({3}, {1, 0, 2}));
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()),
            (std::vector<double>{1, 0, 6, 4, 0, 12}));
}

TEST_F(Elementwise, IncompatibleShapesAreConfigErrors) {
  EXPECT_THROW(add(Tensor({2, 3}), Tensor({2})), ConfigError);
  EXPECT_THROW(hadamard(Tensor({2, 3}), Tensor({3, 2})), ConfigError);
}

TEST_F(CrossEntropy, UniformLogits) {
  const std::vector<std::int32_t> labels{3, 7};
  EXPECT_NEAR(cross_entropy(Tensor::zeros({2, 10}), labels).item(), std::log(10.0), 1e-12);
}

TEST_F(CrossEntropy, LargeMarginDrivesLossToZero) {
  const std::vector<std::int32_t> labels{1};
  double prev = 1e9;
  for (double margin : {1.0, 10.0, 100.0}) {
    const double loss = cross_entropy(Tensor({1, 3}, {0, margin, 0}), labels).item();
    EXPECT_LT(loss, prev);
    prev = loss;
  }
  EXPECT_LT(prev, 1e-40);
}

TEST_F(CrossEntropy, MatchesScalarOracle) {
  Rng rng(12);
  Tensor logits = random_tensor({3, 4}, rng, -2, 2);
  const std::vector<std::int32_t> labels{0, 3, 2};
  double want = 0.0;
  for (std::size_t b = 0; b < 3; ++b) {
    double z = 0.0;
    for (std::size_t c = 0; c < 4; ++c) z += std::exp(logits[b * 4 + c]);
    want += -(logits[b * 4 + static_cast<std::size_t>(labels[b])] - std::log(z)) / 3.0;
  }
  EXPECT_LT(std::abs(cross_entropy(logits, labels).item() - want), 1e-12);
}

TEST_F(CrossEntropy, OutOfRangeLabelNamesIndex) {
  const std::vector<std::int32_t> labels{0, 4};
  try {
    cross_entropy(Tensor::zeros({2, 4}), labels);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
}

TEST_F(L1, Values) {
  EXPECT_EQ(l1_norm(Tensor::full({5}, 1.0)).item(), 5.0);
  EXPECT_EQ(l1_norm(Tensor({3}, {-1, 2, -3})).item(), 6.0);
}

TEST_F(L1, GradientAtHalfMatchesFiniteDifference) {
  Tensor x({1}, {0.5}, true);
  const auto r = check_gradients([&] { return l1_norm(x); }, {x});
  EXPECT_LT(r.max_rel, 1e-6);
}

TEST_F(L1, SubgradientAtZeroIsZero) {
  Tensor x({3}, {0.0, 2.0, -1.0}, true);
  TapeScope scope;
  backward(l1_norm(x));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 1.0);
  EXPECT_EQ(x.grad()[2], -1.0);
}

TEST_F(Backward, SquareAtThree) {
  Tensor x({1}, {3.0}, true);
  TapeScope scope;
  backward(hadamard(x, x));
  EXPECT_EQ(x.grad()[0], 6.0);
}

TEST_F(Backward, L1GradientIsSign) {
  Tensor x({2}, {1.0, -1.0}, true);
  TapeScope scope;
  backward(l1_norm(x));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1], -1.0);
}

TEST_F(Backward, NonScalarIsUsageError) {
  Tensor x({2}, {1.0, 2.0}, true);
  TapeScope scope;
  EXPECT_THROW(backward(scale(x, 2.0)), UsageError);
}

// Each differentiable op composed into a scalar, checked against central
// differences.
TEST_F(Backward, EveryOpMatchesFiniteDifferences) {
  Rng rng(13);
  auto leaf = [&rng](Shape s) { return random_tensor(std::move(s), rng, -1, 1, true); };
  auto sum_sq = [](const Tensor& t) { return l1_norm(hadamard(t, t)); };
  const std::vector<std::int32_t> labels{2, 0, 1};

  struct Case {
    const char* name;
    std::function<Tensor()> loss;
    std::vector<Tensor> leaves;
  };
  Tensor a = leaf({3, 4}), b = leaf({4, 5}), bias = leaf({5}), x3 = leaf({2, 3, 4});
  Tensor g = leaf({2, 3, 4}), h = leaf({2, 5, 4}), gamma = leaf({4}), beta = leaf({4});
  Tensor v = leaf({4}), tok = leaf({4}), scales = leaf({2});
  Tensor logits = leaf({3, 3}), bm = leaf({2, 4, 5});
  std::vector<Case> cases = {
      {"matmul", [&] { return sum_sq(matmul(a, b)); }, {a, b}},
      {"linear", [&] { return sum_sq(linear(x3, b, bias)); }, {x3, b, bias}},
      {"bmm", [&] { return sum_sq(bmm(g, bm)); }, {g, bm}},
      {"bmm_nt", [&] { return sum_sq(bmm_nt(g, h)); }, {g, h}},
      {"add", [&] { return sum_sq(add(x3, v)); }, {x3, v}},
      {"hadamard", [&] { return sum_sq(hadamard(x3, v)); }, {x3, v}},
      {"scale", [&] { return sum_sq(scale(a, -1.7)); }, {a}},
      {"gelu", [&] { return sum_sq(gelu(a)); }, {a}},
      {"tanh", [&] { return sum_sq(vitslim::tanh(a)); }, {a}},
      {"softmax", [&] { return sum_sq(hadamard(softmax_lastdim(x3), x3)); }, {x3}},
      {"layernorm", [&] { return sum_sq(hadamard(layernorm(x3, gamma, beta), x3)); },
       {x3, gamma, beta}},
      {"cross_entropy", [&] { return cross_entropy(logits, labels); }, {logits}},
      {"slice/concat",
       [&] {
         const Tensor parts[] = {slice_lastdim(a, 2, 2), scale(slice_lastdim(a, 0, 1), 3.0)};
         return sum_sq(concat_lastdim(parts));
       },
       {a}},
      {"select_row/reshape", [&] { return sum_sq(reshape(select_row(x3, 1), {4, 3})); }, {x3}},
      {"tokens",
       [&] {
         const std::size_t keep[] = {2, 0};
         return add(sum_sq(select_token(x3, 1)),
                    add(sum_sq(mean_tokens(x3)), sum_sq(gather_tokens(x3, keep))));
       },
       {x3}},
      {"scale_patch_tokens", [&] { return sum_sq(scale_patch_tokens(x3, scales, 1)); },
       {x3, scales}},
      {"prepend_token", [&] { return sum_sq(prepend_token(tok, x3)); }, {tok, x3}},
  };
  for (const Case& c : cases) {
    const auto r = check_gradients(c.loss, c.leaves);
    EXPECT_LT(r.max_rel, 1e-4) << c.name;
    EXPECT_GT(r.checked, 0u) << c.name;
  }
}

TEST_F(Tape, ReplayIsBitExact) {
  Rng rng(14);
  Tensor x = random_tensor({2, 3, 4}, rng, -1, 1, true);
  Tensor w = random_tensor({4, 4}, rng, -1, 1, true);
  TapeScope scope;
  Tensor y = layernorm(gelu(linear(x, w)), Tensor::full({4}, 1.0), Tensor::zeros({4}));
  y = softmax_lastdim(bmm_nt(y, y));
  l1_norm(y);
  ASSERT_GT(vitslim::Tape::active().size(), 4u);
  EXPECT_TRUE(vitslim::Tape::active().replay());
}

TEST_F(Tape, TopologicalOrder) {
  Rng rng(15);
  Tensor x = random_tensor({3, 3}, rng, -1, 1, true);
  TapeScope scope;
  l1_norm(matmul(gelu(x), x));
  const auto nodes = vitslim::Tape::active().nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const Tensor& in : nodes[i].inputs) {
      bool produced_later = false;
      for (std::size_t j = i; j < nodes.size(); ++j) {
        produced_later |= nodes[j].output.same_storage(in);
      }
      EXPECT_FALSE(produced_later);
    }
  }
}

TEST_F(Tape, NoGradRecordsNothing) {
  Tensor x = Tensor::full({2, 2}, 1.0, true);
  TapeScope scope;
  {
    NoGradGuard guard;
    matmul(x, x);
  }
  EXPECT_EQ(vitslim::Tape::active().size(), 0u);
}

void expect_backends_agree(const std::function<Tensor()>& f) {
  kernels::set_backend(kernels::Backend::serial);
  const Tensor a = f();
  kernels::set_backend(kernels::Backend::parallel);
  const Tensor b = f();
  EXPECT_TRUE(bitwise_equal(a, b));
}

TEST_F(Kernels, SerialAndParallelGemmBitwiseEqual) {
  Rng rng(16);
  for (auto [m, k, n] : {std::tuple{1, 1, 1}, {7, 13, 5}, {130, 70, 90}, {300, 24, 72}}) {
    const std::size_t M = m, K = k, N = n;
    std::vector<double> a(M * K), b(K * N), bt(N * K), at(K * M);
    for (double& v : a) v = rng.uniform() - 0.5;
    for (double& v : b) v = rng.uniform() - 0.5;
    for (double& v : bt) v = rng.uniform() - 0.5;
    for (double& v : at) v = rng.uniform() - 0.5;
    std::vector<double> c1(M * N, 0.25), c2(M * N, 0.25);
    kernels::GemmShape s{1, M, K, N};
    for (bool acc : {false, true}) {
      kernels::serial::gemm_nn(s, a, b, c1, acc);
      kernels::parallel::gemm_nn(s, a, b, c2, acc);
      EXPECT_EQ(c1, c2);
      kernels::serial::gemm_nt(s, a, bt, c1, acc);
      kernels::parallel::gemm_nt(s, a, bt, c2, acc);
      EXPECT_EQ(c1, c2);
      kernels::serial::gemm_tn(s, at, b, c1, acc);
      kernels::parallel::gemm_tn(s, at, b, c2, acc);
      EXPECT_EQ(c1, c2);
    }
  }
}

TEST_F(Kernels, SerialAndParallelRowKernelsBitwiseEqual) {
  Rng rng(17);
  const std::size_t rows = 500, n = 40;
  std::vector<double> x(rows * n), dy(rows * n), gamma(n), beta(n);
  for (double& v : x) v = 4.0 * rng.uniform() - 2.0;
  for (double& v : dy) v = rng.uniform() - 0.5;
  for (double& v : gamma) v = rng.uniform();
  for (double& v : beta) v = rng.uniform();
  auto run = [&](bool parallel) {
    std::vector<double> y(rows * n), dx(rows * n), mean(rows), rstd(rows), dg(n), db(n), sm(rows * n),
        dsm(rows * n), ge(rows * n), dge(rows * n);
    if (parallel) {
      kernels::parallel::layernorm_rows(rows, n, x, gamma, beta, 1e-6, y, mean, rstd);
      kernels::parallel::layernorm_rows_backward(rows, n, x, gamma, mean, rstd, dy, dx, dg, db);
      kernels::parallel::softmax_rows(rows, n, x, sm);
      kernels::parallel::softmax_rows_backward(rows, n, sm, dy, dsm);
      kernels::parallel::gelu(x, ge);
      kernels::parallel::gelu_backward(x, dy, dge);
    } else {
      kernels::serial::layernorm_rows(rows, n, x, gamma, beta, 1e-6, y, mean, rstd);
      kernels::serial::layernorm_rows_backward(rows, n, x, gamma, mean, rstd, dy, dx, dg, db);
      kernels::serial::softmax_rows(rows, n, x, sm);
      kernels::serial::softmax_rows_backward(rows, n, sm, dy, dsm);
      kernels::serial::gelu(x, ge);
      kernels::serial::gelu_backward(x, dy, dge);
    }
    return std::vector<std::vector<double>>{y, dx, dg, db, sm, dsm, ge, dge};
  };
  EXPECT_EQ(run(false), run(true));
}

TEST_F(Kernels, BackendsAgreeThroughOps) {
  Rng rng(18);
  Tensor x = random_tensor({8, 17, 24}, rng);
  Tensor w = random_tensor({24, 72}, rng);
  expect_backends_agree([&] { return softmax_lastdim(bmm_nt(linear(x, w), linear(x, w))); });
}

TEST(Precision, F32RoundsEveryOutput) {
  PrecisionScope f32(Precision::f32);
  Tensor a({1, 1}, std::vector<double>{1.0 / 3.0});
  Tensor y = matmul(a, Tensor({1, 1}, std::vector<double>{1.0}));
  EXPECT_EQ(y[0], static_cast<double>(static_cast<float>(1.0 / 3.0)));
}

TEST(Precision, DefaultIsF32) { EXPECT_EQ(precision(), Precision::f32); }

}  // namespace
