#pragma once

#include <string>
#include <vector>

#include "hmtl/embed/embedding.hpp"
#include "hmtl/layers/hlstm.hpp"
#include "hmtl/layers/linear.hpp"

namespace hmtl::nertag {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

struct NerConfig {
    Index hidden = 400;
    int layers = 3;
    double lstm_dropout = 0.43;
    // Forbid transitions that break IOB-2 (O -> I-X, B-X -> I-Y, START -> I-X).
    bool iob_constraints = false;
};

// 0 where a transition is allowed and -inf where IOB-2 forbids it, in the
// (Y+2) x (Y+2) layout of the CRF.
Matrix iob_transition_mask(const embed::Vocabulary& tags);

// Negative log-likelihood of the gold path: forward_score - path_score.
// `constraint` (optional, same shape as the transitions) is added to them.
Tensor crf_loss(const Tensor& emissions, const Tensor& transitions,
                const std::vector<Index>& gold, const Matrix* constraint = nullptr);

class NerTagger {
public:
    NerTagger(const NerConfig& config, Index in_dim, embed::Vocabulary tags, Rng& init);

    struct Output {
        Tensor hidden;     // n x 2H
        Tensor emissions;  // n x Y
    };
    Output emissions(ad::Tape& tape, const Tensor& inputs, ad::Mode mode, Rng& rng);
    Tensor loss(ad::Tape& tape, const Tensor& emissions, const std::vector<Index>& gold);
    std::vector<Index> decode(const Matrix& emissions) const;

    const NerConfig& config() const { return config_; }
    const embed::Vocabulary& tags() const { return tags_; }
    Index in_dim() const { return stack_.in_dim(); }
    layers::HighwayLstmStack& stack() { return stack_; }
    layers::Linear& fc() { return fc_; }
    ad::Parameter& transitions() { return transitions_; }
    std::vector<ad::Parameter*> parameters();

private:
    NerConfig config_;
    embed::Vocabulary tags_;
    layers::HighwayLstmStack stack_;
    layers::Linear fc_;
    ad::Parameter transitions_;
    Matrix constraint_;
};

struct Entity {
    std::string type;
    std::size_t begin = 0;  // word positions, half-open
    std::size_t end = 0;
    bool operator==(const Entity&) const = default;
    auto operator<=>(const Entity&) const = default;
};

// Makes a tag sequence valid IOB-2: an I-X that does not continue an X
// entity becomes B-X; anything other than O, B-X or I-X becomes O.
std::vector<std::string> repair_iob2(const std::vector<std::string>& tags);

// Maximal typed spans of a valid IOB-2 sequence.
std::vector<Entity> extract_entities(const std::vector<std::string>& tags);

struct F1Scores {
    std::size_t true_positives = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;
    double precision() const { return predicted ? static_cast<double>(true_positives) / predicted : 0.0; }
    double recall() const { return gold ? static_cast<double>(true_positives) / gold : 0.0; }
    double f1() const {
        const double p = precision();
        const double r = recall();
        return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
};

// Corpus-level micro P/R/F1 over exact (type, span) matches. Predictions are
// repaired first.
F1Scores eval_micro_f1(const std::vector<std::vector<std::string>>& predicted,
                       const std::vector<std::vector<std::string>>& gold);

}  // namespace hmtl::nertag
