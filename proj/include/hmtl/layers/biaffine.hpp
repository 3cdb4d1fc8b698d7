#pragma once

#include <string>
#include <vector>

#include "hmtl/layers/linear.hpp"

namespace hmtl::layers {

// Deep biaffine scorer. Two ReLU projections give dependent- and head-role
// vectors; each is extended with a constant 1 and scored through U, which
// holds K blocks of (inner+1) x (inner+1). U starts at zero.
class BiaffineScorer {
public:
    BiaffineScorer() = default;
    BiaffineScorer(const std::string& name, Index in, Index inner, Index labels, Rng& rng);

    // Scores of every (dependent row, head row) pair. Output is
    // Md x (K * Mh) with column k * Mh + j holding label k for head j.
    Tensor score_all(Tape& tape, const Tensor& dep_states, const Tensor& head_states);

    Tensor project_dep(Tape& tape, const Tensor& states) { return dep_fc_.forward(tape, states); }
    Tensor project_head(Tape& tape, const Tensor& states) { return head_fc_.forward(tape, states); }

    Index inner() const { return dep_fc_.out_dim(); }
    Index labels() const { return labels_; }
    Parameter& weights() { return u_; }
    Linear& dep_fc() { return dep_fc_; }
    Linear& head_fc() { return head_fc_; }
    std::vector<Parameter*> parameters();

private:
    Linear dep_fc_;
    Linear head_fc_;
    Parameter u_;
    Index labels_ = 1;
};

// s[k] = [v_dep; 1] U_k [v_head; 1]^T for role vectors already projected.
// Rows of v_dep and v_head are scored pairwise as in score_all.
Tensor biaffine_score(const Tensor& v_dep, const Tensor& v_head, const Tensor& u, Index labels);

}  // namespace hmtl::layers
