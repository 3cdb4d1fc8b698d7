#include "hmtl/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmtl/errors.hpp"

namespace hmtl::ad {
namespace {

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

double scalar_value(const Tensor& t) {
    if (t.value().size() != 1) {
        throw ContractError("gradient check needs a scalar function, got " +
                            std::to_string(t.rows()) + "x" + std::to_string(t.cols()));
    }
    return t.value()(0, 0);
}

void check_steps(const std::vector<double>& steps) {
    if (steps.empty()) throw ContractError("gradient check needs at least one step");
    for (double step : steps) {
        if (!(step > 0.0)) throw ContractError("gradient check step must be positive");
    }
}

// Smallest error of one entry over all steps; `at(v)` evaluates f with the
// entry set to v.
template <typename Eval>
double entry_error(double analytic, double saved, const std::vector<double>& steps, Eval&& at) {
    double best = std::numeric_limits<double>::infinity();
    for (double step : steps) {
        const double up = at(saved + step);
        const double down = at(saved - step);
        best = std::min(best, relative_error(analytic, (up - down) / (2.0 * step)));
    }
    at(saved);
    return best;
}

}  // namespace

double check_gradients(const ScalarFn& f, const Matrix& x, double step) {
    return check_gradients(f, x, std::vector<double>{step});
}

double check_parameter_gradients(const LossFn& loss, const std::vector<Parameter*>& params,
                                 double step) {
    return check_parameter_gradients(loss, params, std::vector<double>{step});
}

double check_gradients(const ScalarFn& f, const Matrix& x, const std::vector<double>& steps) {
    check_steps(steps);
    Matrix analytic;
    {
        Tape tape;
        Tensor xv = tape.variable(x);
        Tensor y = f(tape, xv);
        scalar_value(y);
        tape.backward(y);
        analytic = xv.grad();
    }
    auto eval_at = [&](const Matrix& point) {
        Tape tape;
        return scalar_value(f(tape, tape.constant(point)));
    };
    double worst = 0.0;
    Matrix probe = x;
    for (Index i = 0; i < x.size(); ++i) {
        double* entry = probe.data() + i;
        worst = std::max(worst, entry_error(analytic.data()[i], *entry, steps, [&](double v) {
                             *entry = v;
                             return eval_at(probe);
                         }));
    }
    return worst;
}

double check_parameter_gradients(const LossFn& loss, const std::vector<Parameter*>& params,
                                 const std::vector<double>& steps) {
    check_steps(steps);
    for (Parameter* p : params) {
        p->zero_grad();
    }
    {
        Tape tape;
        Tensor y = loss(tape);
        scalar_value(y);
        tape.backward(y);
    }
    auto eval = [&]() {
        Tape tape;
        return scalar_value(loss(tape));
    };
    double worst = 0.0;
    for (Parameter* p : params) {
        bool frozen_row_skip = false;
        for (Index i = 0; i < p->value.size(); ++i) {
            const Index row = i % p->value.rows();
            frozen_row_skip = std::find(p->frozen_rows.begin(), p->frozen_rows.end(), row) !=
                              p->frozen_rows.end();
            if (frozen_row_skip) {
                continue;
            }
            double* entry = p->value.data() + i;
            worst = std::max(worst, entry_error(p->grad.data()[i], *entry, steps, [&](double v) {
                                 *entry = v;
                                 return eval();
                             }));
        }
    }
    return worst;
}

}  // namespace hmtl::ad
