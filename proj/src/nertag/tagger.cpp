#include "hmtl/nertag/tagger.hpp"

#include <algorithm>
#include <limits>

#include "hmtl/errors.hpp"
#include "hmtl/nertag/crf.hpp"

namespace hmtl::nertag {
namespace {

struct TagParts {
    char prefix = 'O';  // 'O', 'B', 'I' or '?' for malformed
    std::string type;
};

TagParts split_tag(const std::string& tag) {
    if (tag == "O") return {'O', {}};
    if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
        return {tag[0], tag.substr(2)};
    }
    return {'?', {}};
}

}  // namespace

Matrix iob_transition_mask(const embed::Vocabulary& tags) {
    const Index y = tags.size();
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    Matrix mask = Matrix::Zero(y + 2, y + 2);
    for (Index b = 0; b < y; ++b) {
        const TagParts to = split_tag(tags.symbol(b));
        if (to.prefix != 'I') continue;
        mask(start_state(y), b) = kNegInf;
        for (Index a = 0; a < y; ++a) {
            const TagParts from = split_tag(tags.symbol(a));
            if (from.prefix == 'O' || from.prefix == '?' || from.type != to.type) mask(a, b) = kNegInf;
        }
    }
    return mask;
}

Tensor crf_loss(const Tensor& emissions, const Tensor& transitions, const std::vector<Index>& gold,
                const Matrix* constraint) {
    const Matrix& s = emissions.value();
    Matrix t = transitions.value();
    if (constraint != nullptr) {
        if (constraint->rows() != t.rows() || constraint->cols() != t.cols()) {
            throw DimensionError("crf_loss: constraint shape differs from transitions");
        }
        t += *constraint;
    }
    if (static_cast<Index>(gold.size()) != s.rows()) {
        throw ContractError("crf_loss: gold length differs from emissions");
    }
    for (Index tag : gold) {
        if (tag < 0 || tag >= s.cols()) {
            throw ContractError("crf_loss: gold tag " + std::to_string(tag) + " outside the tag set");
        }
    }
    auto post = marginals(s, t);
    const double gold_score = path_score(s, t, gold);
    Matrix out(1, 1);
    // The gold path is one of the summed paths, so only roundoff can go below zero.
    out(0, 0) = std::max(0.0, post.log_partition - gold_score);
    const Index y = s.cols();
    // Gold path indicator counts subtracted from the marginals give the gradient.
    Matrix gs = post.unary;
    Matrix gt = post.transitions;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        gs(static_cast<Index>(i), gold[i]) -= 1.0;
        if (i > 0) gt(gold[i - 1], gold[i]) -= 1.0;
    }
    gt(start_state(y), gold.front()) -= 1.0;
    gt(gold.back(), stop_state(y)) -= 1.0;
    return emissions.tape().record(
        std::move(out), {emissions, transitions},
        [emissions, transitions, gs = std::move(gs), gt = std::move(gt)](const Matrix& g, ad::Tape& tape) {
            if (Matrix* d = tape.grad_sink(emissions)) *d += g(0, 0) * gs;
            if (Matrix* d = tape.grad_sink(transitions)) *d += g(0, 0) * gt;
        });
}

NerTagger::NerTagger(const NerConfig& config, Index in_dim, embed::Vocabulary tags, Rng& init)
    : config_(config),
      tags_(std::move(tags)),
      stack_("ner.hlstm", in_dim, config.hidden, config.layers, config.lstm_dropout, init),
      fc_("ner.fc", 2 * config.hidden, tags_.size(), init),
      transitions_("ner.transitions", Matrix::Zero(tags_.size() + 2, tags_.size() + 2)) {
    if (tags_.size() < 1) throw ContractError("NER tagger needs at least one tag");
    if (config_.iob_constraints) constraint_ = iob_transition_mask(tags_);
}

NerTagger::Output NerTagger::emissions(ad::Tape& tape, const Tensor& inputs, ad::Mode mode, Rng& rng) {
    Output out;
    out.hidden = stack_.forward(tape, inputs, mode, rng);
    out.emissions = fc_.forward(tape, out.hidden);
    return out;
}

Tensor NerTagger::loss(ad::Tape& tape, const Tensor& emissions, const std::vector<Index>& gold) {
    return crf_loss(emissions, tape.param(transitions_), gold,
                    config_.iob_constraints ? &constraint_ : nullptr);
}

std::vector<Index> NerTagger::decode(const Matrix& emissions) const {
    if (config_.iob_constraints) return viterbi(emissions, transitions_.value + constraint_);
    return viterbi(emissions, transitions_.value);
}

std::vector<ad::Parameter*> NerTagger::parameters() {
    auto out = stack_.parameters();
    for (auto* p : fc_.parameters()) out.push_back(p);
    out.push_back(&transitions_);
    return out;
}

std::vector<std::string> repair_iob2(const std::vector<std::string>& tags) {
    std::vector<std::string> out;
    out.reserve(tags.size());
    std::string open_type;
    for (const auto& tag : tags) {
        const TagParts parts = split_tag(tag);
        if (parts.prefix == 'B') {
            out.push_back(tag);
            open_type = parts.type;
        } else if (parts.prefix == 'I') {
            out.push_back(parts.type == open_type ? tag : "B-" + parts.type);
            open_type = parts.type;
        } else {
            out.emplace_back("O");
            open_type.clear();
        }
    }
    return out;
}

std::vector<Entity> extract_entities(const std::vector<std::string>& tags) {
    std::vector<Entity> out;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const TagParts parts = split_tag(tags[i]);
        if (parts.prefix == 'B') {
            out.push_back({parts.type, i, i + 1});
        } else if (parts.prefix == 'I' && !out.empty() && out.back().end == i &&
                   out.back().type == parts.type) {
            out.back().end = i + 1;
        }
    }
    return out;
}

F1Scores eval_micro_f1(const std::vector<std::vector<std::string>>& predicted,
                       const std::vector<std::vector<std::string>>& gold) {
    if (predicted.size() != gold.size()) {
        throw ContractError("eval_micro_f1: " + std::to_string(predicted.size()) +
                            " predicted sequences for " + std::to_string(gold.size()) + " gold");
    }
    F1Scores out;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        if (predicted[s].size() != gold[s].size()) {
            throw ContractError("eval_micro_f1: sequence " + std::to_string(s) + " length mismatch");
        }
        const auto pred = extract_entities(repair_iob2(predicted[s]));
        const auto ref = extract_entities(gold[s]);
        out.predicted += pred.size();
        out.gold += ref.size();
        for (const auto& e : pred) {
            for (const auto& g : ref) {
                if (e == g) {
                    ++out.true_positives;
                    break;
                }
            }
        }
    }
    return out;
}

}  // namespace hmtl::nertag
