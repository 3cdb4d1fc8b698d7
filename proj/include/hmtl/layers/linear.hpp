#pragma once

#include <string>
#include <vector>

#include "hmtl/autodiff/ops.hpp"
#include "hmtl/rng.hpp"

namespace hmtl::layers {

using ad::Index;
using ad::Matrix;
using ad::Parameter;
using ad::Tape;
using ad::Tensor;

// Uniform Glorot initialisation in +-sqrt(6 / (rows + cols)).
Matrix glorot(Index rows, Index cols, Rng& rng);

enum class Activation { None, Relu };

// y = act(x W + b) applied row-wise.
class Linear {
public:
    Linear() = default;
    Linear(const std::string& name, Index in, Index out, Rng& rng,
           Activation act = Activation::None);

    Tensor forward(Tape& tape, const Tensor& x);

    Index in_dim() const { return weight_.value.rows(); }
    Index out_dim() const { return weight_.value.cols(); }
    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

private:
    Parameter weight_;
    Parameter bias_;
    Activation act_ = Activation::None;
};

}  // namespace hmtl::layers
