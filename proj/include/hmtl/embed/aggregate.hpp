#pragma once

#include <span>

#include <Eigen/Dense>

#include "hmtl/embed/provider.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/ingest/batch.hpp"

namespace hmtl::embed {

// Mean over the four layers of each subtoken, then mean over the subtokens
// of each word. Returns (words x d).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> aggregate_subwords(
    const std::array<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, kProviderLayers>&
        layers,
    std::span<const ingest::SubtokenSpan> spans) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index rows = layers[0].rows();
    for (const auto& layer : layers) {
        if (layer.rows() != rows || layer.cols() != layers[0].cols()) {
            throw DimensionError("aggregate_subwords: layer shapes differ");
        }
    }
    Mat layer_mean = layers[0];
    for (std::size_t l = 1; l < kProviderLayers; ++l) layer_mean += layers[l];
    layer_mean /= Scalar(kProviderLayers);

    Mat out(static_cast<Eigen::Index>(spans.size()), layer_mean.cols());
    for (std::size_t w = 0; w < spans.size(); ++w) {
        const auto& span = spans[w];
        if (span.size() == 0) {
            throw ContractError("aggregate_subwords: word " + std::to_string(w) + " has no subtokens");
        }
        if (span.end > static_cast<std::size_t>(rows)) {
            throw ContractError("aggregate_subwords: span exceeds provider output");
        }
        out.row(static_cast<Eigen::Index>(w)) =
            layer_mean.middleRows(static_cast<Eigen::Index>(span.begin),
                                  static_cast<Eigen::Index>(span.size()))
                .colwise()
                .mean();
    }
    return out;
}

}  // namespace hmtl::embed
