#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hmtl/autodiff/tensor.hpp"
#include "hmtl/rng.hpp"

namespace hmtl::ad {

enum class Mode { Train, Eval };

// Arithmetic

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
// alpha * x + beta, elementwise.
Tensor affine(const Tensor& x, double alpha, double beta);
Tensor scale(const Tensor& x, double alpha);
// Adds a 1xN row to every row of an MxN tensor.
Tensor add_row(const Tensor& x, const Tensor& row);

// Elementwise nonlinearities

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);

// Normalizers and reductions

// Row-wise softmax, max-shifted. NaN inputs propagate to their row.
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
// log of the sum of exp over every element, max-shifted; 1x1 result.
Tensor log_sum_exp(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Sum over rows of -log softmax(row)[target]. When `mask` is given, entries
// with mask == 0 are excluded from the normalizer of their row. Rows whose
// target is negative are skipped.
Tensor cross_entropy_rows(const Tensor& logits, const std::vector<Index>& targets,
                          const Matrix* mask = nullptr);

// Shape manipulation

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, Index start, Index count);
Tensor slice_cols(const Tensor& x, Index start, Index count);
// Output(r, c) = x(coords[r * cols + c]).
Tensor gather(const Tensor& x, const std::vector<std::pair<Index, Index>>& coords, Index rows,
              Index cols);
// Rows of `table` selected by `ids`, one output row per id.
Tensor embedding_lookup(const Tensor& table, const std::vector<Index>& ids);
// Value copy with no gradient path.
Tensor stop_gradient(const Tensor& x);

// Bilinear scores. dep is Md x A, head is Mh x B, weights is A x (K * B)
// holding K blocks of A x B. Output is Md x (K * Mh) with
// out(i, k * Mh + j) = dep.row(i) * W_k * head.row(j)^T.
Tensor bilinear(const Tensor& dep, const Tensor& head, const Tensor& weights, Index labels);

// Inverted dropout: in training mode each element is zeroed with probability
// `rate` and survivors are scaled by 1 / (1 - rate). Identity in eval mode.
Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng);

}  // namespace hmtl::ad
