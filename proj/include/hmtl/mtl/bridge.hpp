#pragma once

#include "hmtl/autodiff/ops.hpp"
#include "hmtl/depparse/parser.hpp"

namespace hmtl::mtl {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

// Row i is the embedding of the highest-scoring label of word i (lowest id
// on ties). The argmax is a constant, so gradient reaches the table only.
Tensor bridge_hard(const Matrix& label_scores, const Tensor& table);

// Row i is softmax(label_scores.row(i)) applied to the table rows;
// differentiable in both arguments.
Tensor bridge_soft(const Tensor& label_scores, const Tensor& table);

// Identity on the low-level hidden states; checks the expected width.
Tensor bridge_repr(const Tensor& hidden, Index expected_width);

// Label scores a dependency-low bridge reads: for each word, the label row at
// its highest-scoring head.
inline Tensor dep_bridge_scores(const depparse::DepScores& scores) {
    return depparse::label_scores_at_best_heads(scores);
}

}  // namespace hmtl::mtl
