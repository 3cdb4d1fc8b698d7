#pragma once

#include <functional>
#include <vector>

#include "hmtl/autodiff/tensor.hpp"

namespace hmtl::ad {

using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;
using LossFn = std::function<Tensor(Tape&)>;

// Compares the tape gradient of scalar f at x against central differences,
// componentwise. Returns the largest relative error, where the denominator
// is max(|analytic|, |numeric|, 1e-8). Throws ContractError when f is not
// scalar or a step is <= 0.
//
// With several steps each entry keeps its smallest error over the steps. A
// wrong derivative disagrees at every step; a central difference straddling
// a ReLU kink, or one lost in roundoff, only disagrees at some.
double check_gradients(const ScalarFn& f, const Matrix& x, double step = 1e-5);
double check_gradients(const ScalarFn& f, const Matrix& x, const std::vector<double>& steps);

// Same comparison over every entry of every listed parameter. `loss` must
// rebuild the computation from the current parameter values on each call.
double check_parameter_gradients(const LossFn& loss, const std::vector<Parameter*>& params,
                                 double step = 1e-5);
double check_parameter_gradients(const LossFn& loss, const std::vector<Parameter*>& params,
                                 const std::vector<double>& steps);

}  // namespace hmtl::ad
