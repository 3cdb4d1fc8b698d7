#include "hmtl/layers/biaffine.hpp"

#include "hmtl/errors.hpp"

namespace hmtl::layers {
namespace {

Tensor with_ones(const Tensor& v) {
    return ad::concat_cols({v, v.tape().constant(Matrix::Ones(v.rows(), 1))});
}

}  // namespace

BiaffineScorer::BiaffineScorer(const std::string& name, Index in, Index inner, Index labels,
                               Rng& rng)
    : dep_fc_(name + ".dep", in, inner, rng, Activation::Relu),
      head_fc_(name + ".head", in, inner, rng, Activation::Relu),
      u_(name + ".U", Matrix::Zero(inner + 1, labels * (inner + 1))),
      labels_(labels) {
    if (labels < 1) throw ContractError("biaffine scorer " + name + " needs at least one label");
}

Tensor BiaffineScorer::score_all(Tape& tape, const Tensor& dep_states, const Tensor& head_states) {
    return biaffine_score(project_dep(tape, dep_states), project_head(tape, head_states),
                          tape.param(u_), labels_);
}

std::vector<Parameter*> BiaffineScorer::parameters() {
    auto out = dep_fc_.parameters();
    for (auto* p : head_fc_.parameters()) out.push_back(p);
    out.push_back(&u_);
    return out;
}

Tensor biaffine_score(const Tensor& v_dep, const Tensor& v_head, const Tensor& u, Index labels) {
    if (v_dep.cols() != v_head.cols()) {
        throw DimensionError("biaffine_score: role vectors have different widths");
    }
    return ad::bilinear(with_ones(v_dep), with_ones(v_head), u, labels);
}

}  // namespace hmtl::layers
