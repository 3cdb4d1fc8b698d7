#include "hmtl/layers/linear.hpp"

#include <cmath>

#include "hmtl/errors.hpp"

namespace hmtl::layers {

Matrix glorot(Index rows, Index cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
    }
    return m;
}

Linear::Linear(const std::string& name, Index in, Index out, Rng& rng, Activation act)
    : weight_(name + ".W", glorot(in, out, rng)), bias_(name + ".b", Matrix::Zero(1, out)), act_(act) {
    if (in <= 0 || out <= 0) throw ContractError("linear layer " + name + " needs positive sizes");
}

Tensor Linear::forward(Tape& tape, const Tensor& x) {
    Tensor y = ad::add_row(ad::matmul(x, tape.param(weight_)), tape.param(bias_));
    return act_ == Activation::Relu ? ad::relu(y) : y;
}

}  // namespace hmtl::layers
