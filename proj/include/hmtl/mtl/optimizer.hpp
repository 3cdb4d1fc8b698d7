#pragma once

#include <unordered_map>
#include <vector>

#include "hmtl/autodiff/tensor.hpp"

namespace hmtl::mtl {

// Adam with decoupled weight decay. Moments and step counts are kept per
// parameter, so parameters skipped by a step keep their state untouched.
class AdamW {
public:
    AdamW(double lr, double weight_decay, double beta1 = 0.9, double beta2 = 0.999,
          double eps = 1e-8);

    void step(const std::vector<ad::Parameter*>& params);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    struct State {
        ad::Matrix m;
        ad::Matrix v;
        long steps = 0;
    };
    double lr_;
    double weight_decay_;
    double beta1_;
    double beta2_;
    double eps_;
    std::unordered_map<const ad::Parameter*, State> state_;
};

// Rescales the gradients so their joint L2 norm is at most max_norm; returns
// the norm before clipping.
double clip_grad_norm(const std::vector<ad::Parameter*>& params, double max_norm);

}  // namespace hmtl::mtl
