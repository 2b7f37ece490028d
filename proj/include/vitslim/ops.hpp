#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vitslim/tensor.hpp"

// Differentiable ops. Leading-axis broadcasting for binary ops: the smaller
// operand's shape must equal the trailing axes of the larger one (a [d] mask
// applies along the last axis of [N×d]).
namespace vitslim {

// [m×k]·[k×n]
Tensor matmul(const Tensor& a, const Tensor& b);
// x[...×k]·w[k×n] (+ bias[n]); leading axes of x are flattened into rows.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias = {});
// Batched [g×m×k]·[g×k×n].
Tensor bmm(const Tensor& a, const Tensor& b);
// Batched [g×m×k]·[g×n×k]ᵀ.
Tensor bmm_nt(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor gelu(const Tensor& x);
Tensor tanh(const Tensor& x);

Tensor softmax_lastdim(const Tensor& x);
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-6);

// Mean over the batch of -log softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels);
// Sum of |x|; subgradient 0 at exactly 0.
Tensor l1_norm(const Tensor& x);

Tensor slice_lastdim(const Tensor& x, std::size_t offset, std::size_t length);
Tensor concat_lastdim(std::span<const Tensor> parts);
// x[r × ...] → x[index] with shape [...].
Tensor select_row(const Tensor& x, std::size_t index);
Tensor reshape(const Tensor& x, Shape shape);

// Token-axis ops on [B×T×D] activations.
Tensor select_token(const Tensor& x, std::size_t token);
Tensor mean_tokens(const Tensor& x);
Tensor gather_tokens(const Tensor& x, std::span<const std::size_t> tokens);
// Scales token first_patch + i by scales[i]; tokens before first_patch (the
// class token) pass through untouched.
Tensor scale_patch_tokens(const Tensor& x, const Tensor& scales, std::size_t first_patch);
// [D] token prepended to every sequence of x[B×N×D].
Tensor prepend_token(const Tensor& token, const Tensor& x);

}  // namespace vitslim
