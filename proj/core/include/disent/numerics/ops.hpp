#pragma once

#include "disent/numerics/tape.hpp"

// Differentiable operators. Each records its result and backward rule on the
// tape that owns its operands; operands must share a tape.
namespace disent::ops {

// [m x k] . [k x n] -> [m x n]
Var matmul(const Var& a, const Var& b);

// Per-sample products: [B x m x k] . [B x k x n] -> [B x m x n]
Var batched_matmul(const Var& a, const Var& b);

// Per-sample products against the transposed right operand:
// [B x m x k] . [B x n x k]^T -> [B x m x n]
Var batched_matmul_transposed(const Var& a, const Var& b);

// Softmax over the last axis with row-max subtraction.
Var softmax_rows(const Var& a);

// max(x, slope * x) elementwise; slope in (0, 1).
Var leaky_relu(const Var& a, double slope);

// x . W + b applied over the last axis of x (rank 1..3).
// weight is [p x q], bias is [q].
Var linear(const Var& x, const Var& weight, const Var& bias);

// scale * a + shift elementwise.
Var affine(const Var& a, double scale, double shift);

// Elementwise sum of same-shape operands.
Var add(const Var& a, const Var& b);

Var sum(const Var& a);
Var mean(const Var& a);

// Mean over all elements of (a - b)^2.
Var mse(const Var& a, const Var& b);

// <a, b> / (|a| |b|) over the flattened operands. Throws DegenerateInputError
// if either operand has zero norm.
Var cosine_sim(const Var& a, const Var& b);

// Cosine similarity per leading index: operands [B x ...] -> [B], each sample
// flattened over its trailing axes.
Var batched_cosine_sim(const Var& a, const Var& b);

}  // namespace disent::ops
