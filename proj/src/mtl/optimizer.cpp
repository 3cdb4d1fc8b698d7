#include "hmtl/mtl/optimizer.hpp"

#include <cmath>

#include "hmtl/errors.hpp"

namespace hmtl::mtl {

AdamW::AdamW(double lr, double weight_decay, double beta1, double beta2, double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0.0) throw ContractError("learning rate must be positive");
}

void AdamW::step(const std::vector<ad::Parameter*>& params) {
    for (ad::Parameter* p : params) {
        if (p->grad.size() != p->value.size()) continue;
        State& s = state_[p];
        if (s.steps == 0) {
            s.m = ad::Matrix::Zero(p->value.rows(), p->value.cols());
            s.v = ad::Matrix::Zero(p->value.rows(), p->value.cols());
        }
        ++s.steps;
        s.m = beta1_ * s.m + (1.0 - beta1_) * p->grad;
        s.v = beta2_ * s.v + (1.0 - beta2_) * p->grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s.steps));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s.steps));
        ad::Matrix update = (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps_);
        update += weight_decay_ * p->value;
        for (auto r : p->frozen_rows) update.row(r).setZero();
        p->value -= lr_ * update;
    }
}

double clip_grad_norm(const std::vector<ad::Parameter*>& params, double max_norm) {
    double sq = 0.0;
    for (const ad::Parameter* p : params) {
        if (p->grad.size() == p->value.size()) sq += p->grad.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double factor = max_norm / norm;
        for (ad::Parameter* p : params) {
            if (p->grad.size() == p->value.size()) p->grad *= factor;
        }
    }
    return norm;
}

}  // namespace hmtl::mtl
