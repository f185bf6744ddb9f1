//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_OPS_H_
#define DUALRETRO_NUMERICS_OPS_H_

#include <span>
#include <vector>

#include "dualretro/numerics/tape.h"

// Differentiable operations over matrices recorded on a Tape. All inputs of
// one call must live on the same tape. Shape errors throw ShapeMismatch.
namespace dualretro {

Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double value);

// a (m x n) + b (1 x n), b broadcast over rows.
Var add_row(Var a, Var b);

// a (m x n) * s (m x 1), s broadcast over columns.
Var mul_col(Var a, Var s);

// Concatenate along columns; every part must have the same row count.
Var concat_cols(const std::vector<Var> &parts);

Var sigmoid(Var a);
Var relu(Var a);
Var silu(Var a);
Var log(Var a);
Var reciprocal(Var a);

Var softmax_rows(Var a);
Var log_softmax_rows(Var a);

// Column-wise mean and sum over rows: (m x n) -> (1 x n).
Var mean_rows(Var a);
Var sum_rows(Var a);

// Sum / mean of every entry -> 1 x 1.
Var sum(Var a);
Var mean(Var a);

// out[k, :] = a[index[k], :]
Var gather_rows(Var a, std::span<const int> index);

// out[index[k], :] += a[k, :], out has `rows` rows.
Var scatter_add_rows(Var a, std::span<const int> index, int rows);

// Per-row squared Euclidean norm: (m x n) -> (m x 1).
Var row_sqnorm(Var a);

// (1 x n) -> (rows x n).
Var repeat_rows(Var a, int rows);

// out[k, 0] = a[k, column[k]]
Var select_cols(Var a, std::span<const int> column);

// Row i of the result is update[i] where take_update[i] is set, else keep[i].
// Rows are copied, so kept rows are bit-identical to the input.
Var select_rows(Var keep, Var update, std::span<const char> take_update);

inline Var operator+(Var a, Var b) {
  return add(a, b);
}
inline Var operator-(Var a, Var b) {
  return sub(a, b);
}
inline Var operator*(Var a, Var b) {
  return mul(a, b);
}
inline Var operator*(double s, Var a) {
  return scale(a, s);
}

// Affine map x W + b with W (in x out) and b (1 x out).
inline Var affine(Var x, Var w, Var b) {
  return add_row(matmul(x, w), b);
}

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_OPS_H_
