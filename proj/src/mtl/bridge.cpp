#include "hmtl/mtl/bridge.hpp"

#include "hmtl/errors.hpp"

namespace hmtl::mtl {

Tensor bridge_hard(const Matrix& label_scores, const Tensor& table) {
    if (label_scores.cols() != table.rows()) {
        throw DimensionError("bridge_hard: " + std::to_string(label_scores.cols()) +
                             " label scores for a table of " + std::to_string(table.rows()) + " rows");
    }
    std::vector<Index> ids(static_cast<std::size_t>(label_scores.rows()));
    for (Index i = 0; i < label_scores.rows(); ++i) {
        Index best = 0;
        for (Index k = 1; k < label_scores.cols(); ++k) {
            if (label_scores(i, k) > label_scores(i, best)) best = k;
        }
        ids[static_cast<std::size_t>(i)] = best;
    }
    return ad::embedding_lookup(table, ids);
}

Tensor bridge_soft(const Tensor& label_scores, const Tensor& table) {
    if (label_scores.cols() != table.rows()) {
        throw DimensionError("bridge_soft: " + std::to_string(label_scores.cols()) +
                             " label scores for a table of " + std::to_string(table.rows()) + " rows");
    }
    return ad::matmul(ad::softmax_rows(label_scores), table);
}

Tensor bridge_repr(const Tensor& hidden, Index expected_width) {
    if (hidden.cols() != expected_width) {
        throw ContractError("bridge_repr: hidden width " + std::to_string(hidden.cols()) +
                            " differs from the configured " + std::to_string(expected_width));
    }
    return hidden;
}

}  // namespace hmtl::mtl
