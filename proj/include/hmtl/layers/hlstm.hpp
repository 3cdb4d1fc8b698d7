#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmtl/layers/linear.hpp"

namespace hmtl::layers {

// Standard LSTM cell with gate blocks ordered (input, forget, candidate,
// output). The forget-gate bias starts at 1.
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(const std::string& name, Index in, Index hidden, Rng& rng);

    // Runs over the rows of x (n x in), right to left when `reverse` is set.
    // Row t of the result is the state after reading row t.
    Tensor run(Tape& tape, const Tensor& x, bool reverse);

    Index hidden() const { return w_hidden_.value.rows(); }
    std::vector<Parameter*> parameters() { return {&w_input_, &w_hidden_, &bias_}; }

private:
    Parameter w_input_;   // in x 4H
    Parameter w_hidden_;  // H x 4H
    Parameter bias_;      // 1 x 4H
};

struct HighwayLayer {
    LstmCell forward;
    LstmCell backward;
    Linear gate;                  // in -> 2H, sigmoid applied
    std::optional<Linear> carry;  // only when in != 2H
};

// Stacked bidirectional LSTM whose vertical flow is gated:
// h_i = T * biLSTM_i(h_{i-1}) + (1 - T) * carry(h_{i-1}), T = sigmoid(W h_{i-1} + b).
// ReLU is applied to the output of the last layer.
class HighwayLstmStack {
public:
    HighwayLstmStack() = default;
    HighwayLstmStack(const std::string& name, Index in, Index hidden, int layers, double dropout,
                     Rng& rng);

    Tensor forward(Tape& tape, const Tensor& x, ad::Mode mode, Rng& rng);

    Index in_dim() const { return in_; }
    Index hidden() const { return hidden_; }
    Index output_dim() const { return 2 * hidden_; }
    int depth() const { return static_cast<int>(layers_.size()); }
    HighwayLayer& layer(int i) { return layers_[static_cast<std::size_t>(i)]; }
    std::vector<Parameter*> parameters();

private:
    Index in_ = 0;
    Index hidden_ = 0;
    double dropout_ = 0.0;
    std::vector<HighwayLayer> layers_;
};

}  // namespace hmtl::layers
