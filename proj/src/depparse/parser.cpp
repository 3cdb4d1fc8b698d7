#include "hmtl/depparse/parser.hpp"

#include "hmtl/depparse/mst.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/layers/linear.hpp"

namespace hmtl::depparse {
namespace {

Index argmax_row(const Eigen::RowVectorXd& row) {
    Index best = 0;
    for (Index k = 1; k < row.size(); ++k) {
        if (row(k) > row(best)) best = k;
    }
    return best;
}

Index best_head(const DepScores& scores, Index dep) {
    Index best = -1;
    for (Index j = 0; j <= scores.words; ++j) {
        if (j == dep) continue;
        if (best < 0 || scores.edge_score(dep, j) > scores.edge_score(dep, best)) best = j;
    }
    return best;
}

}  // namespace

Matrix DepScores::candidate_mask() const {
    Matrix mask = Matrix::Ones(words, words + 1);
    for (Index i = 0; i < words; ++i) mask(i, i + 1) = 0.0;
    return mask;
}

DepParser::DepParser(const DepConfig& config, Index in_dim, embed::Vocabulary deprels, Rng& init)
    : config_(config),
      deprels_(std::move(deprels)),
      stack_("dep.hlstm", in_dim, config.hidden, config.layers, config.lstm_dropout, init),
      root_("dep.root", layers::glorot(1, 2 * config.hidden, init)),
      edge_("dep.edge", 2 * config.hidden, config.inner, 1, init),
      label_("dep.label", 2 * config.hidden, config.inner, deprels_.size(), init) {
    if (deprels_.size() < 1) throw ContractError("dependency parser needs at least one label");
}

DepScores DepParser::score(ad::Tape& tape, const Tensor& inputs, ad::Mode mode, Rng& rng) {
    DepScores out;
    out.words = inputs.rows();
    out.labels = deprels_.size();
    out.hidden = stack_.forward(tape, inputs, mode, rng);
    Tensor states = ad::concat_rows({tape.param(root_), out.hidden});
    out.edge = edge_.score_all(tape, states, states);
    out.label = label_.score_all(tape, states, states);
    return out;
}

std::vector<ad::Parameter*> DepParser::parameters() {
    auto out = stack_.parameters();
    out.push_back(&root_);
    for (auto* p : edge_.parameters()) out.push_back(p);
    for (auto* p : label_.parameters()) out.push_back(p);
    return out;
}

Tensor dep_loss(const DepScores& scores, const std::vector<int>& gold_heads,
                const std::vector<Index>& gold_labels) {
    const Index n = scores.words;
    if (static_cast<Index>(gold_heads.size()) != n || static_cast<Index>(gold_labels.size()) != n) {
        throw ContractError("dep_loss: gold annotation length differs from the sentence");
    }
    std::vector<Index> heads(static_cast<std::size_t>(n));
    std::vector<std::pair<Index, Index>> coords;
    coords.reserve(static_cast<std::size_t>(n * scores.labels));
    for (Index i = 0; i < n; ++i) {
        const int h = gold_heads[static_cast<std::size_t>(i)];
        if (h < 0 || h > n || h == i + 1) {
            throw ContractError("dep_loss: gold head " + std::to_string(h) + " of word " +
                                std::to_string(i + 1) + " is out of range");
        }
        const Index l = gold_labels[static_cast<std::size_t>(i)];
        if (l < 0 || l >= scores.labels) throw ContractError("dep_loss: gold label out of range");
        heads[static_cast<std::size_t>(i)] = h;
        for (Index k = 0; k < scores.labels; ++k) coords.emplace_back(i + 1, k * (n + 1) + h);
    }
    const Matrix mask = scores.candidate_mask();
    Tensor edge_term = ad::cross_entropy_rows(ad::slice_rows(scores.edge, 1, n), heads, &mask);
    Tensor label_rows = ad::gather(scores.label, coords, n, scores.labels);
    Tensor label_term = ad::cross_entropy_rows(label_rows, gold_labels);
    return edge_term + label_term;
}

Tensor label_scores_at_best_heads(const DepScores& scores) {
    const Index n = scores.words;
    std::vector<std::pair<Index, Index>> coords;
    coords.reserve(static_cast<std::size_t>(n * scores.labels));
    for (Index i = 1; i <= n; ++i) {
        const Index h = best_head(scores, i);
        for (Index k = 0; k < scores.labels; ++k) coords.emplace_back(i, k * (n + 1) + h);
    }
    return ad::gather(scores.label, coords, n, scores.labels);
}

DepPrediction decode(const DepScores& scores) {
    DepPrediction out;
    out.heads = chu_liu_edmonds(scores.edge.value());
    const Index n = scores.words;
    for (Index i = 1; i <= n; ++i) {
        const Index h = out.heads[static_cast<std::size_t>(i - 1)];
        Eigen::RowVectorXd row(scores.labels);
        for (Index k = 0; k < scores.labels; ++k) row(k) = scores.label_score(i, h, k);
        out.labels.push_back(argmax_row(row));
    }
    return out;
}

AttachmentScores eval_las_uas(const std::vector<DepPrediction>& predicted,
                              const std::vector<DepPrediction>& gold) {
    if (predicted.size() != gold.size()) {
        throw ContractError("eval_las_uas: " + std::to_string(predicted.size()) +
                            " predictions for " + std::to_string(gold.size()) + " gold sentences");
    }
    AttachmentScores out;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        const auto& p = predicted[s];
        const auto& g = gold[s];
        if (p.heads.size() != g.heads.size() || p.labels.size() != p.heads.size() ||
            g.labels.size() != g.heads.size()) {
            throw ContractError("eval_las_uas: sentence " + std::to_string(s) + " length mismatch");
        }
        for (std::size_t i = 0; i < g.heads.size(); ++i) {
            ++out.words;
            if (p.heads[i] == g.heads[i]) {
                ++out.head_correct;
                if (p.labels[i] == g.labels[i]) ++out.both_correct;
            }
        }
    }
    return out;
}

}  // namespace hmtl::depparse
