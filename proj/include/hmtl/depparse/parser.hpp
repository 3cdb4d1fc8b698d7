#pragma once

#include <string>
#include <vector>

#include "hmtl/embed/embedding.hpp"
#include "hmtl/layers/biaffine.hpp"
#include "hmtl/layers/hlstm.hpp"

namespace hmtl::depparse {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

struct DepConfig {
    Index hidden = 400;
    int layers = 3;
    Index inner = 400;
    double lstm_dropout = 0.34;
};

// Scores for one sentence of n words. Position 0 is the synthetic ROOT.
struct DepScores {
    Tensor edge;    // (n+1) x (n+1): row = dependent, column = candidate head
    Tensor label;   // (n+1) x (K * (n+1)): column k * (n+1) + j = label k for head j
    Tensor hidden;  // n x 2H encoder output
    Index words = 0;
    Index labels = 0;

    double edge_score(Index dep, Index head) const { return edge.value()(dep, head); }
    double label_score(Index dep, Index head, Index k) const {
        return label.value()(dep, k * (words + 1) + head);
    }
    // Candidate mask over dependent rows 1..n: 0 on the diagonal, 1 elsewhere.
    Matrix candidate_mask() const;
};

struct DepPrediction {
    std::vector<int> heads;     // 0 = ROOT, words are 1-based
    std::vector<Index> labels;  // ids into the deprel vocabulary
};

class DepParser {
public:
    DepParser(const DepConfig& config, Index in_dim, embed::Vocabulary deprels, Rng& init);

    DepScores score(ad::Tape& tape, const Tensor& inputs, ad::Mode mode, Rng& rng);

    const DepConfig& config() const { return config_; }
    const embed::Vocabulary& deprels() const { return deprels_; }
    Index in_dim() const { return stack_.in_dim(); }
    layers::HighwayLstmStack& stack() { return stack_; }
    layers::BiaffineScorer& edge_scorer() { return edge_; }
    layers::BiaffineScorer& label_scorer() { return label_; }
    ad::Parameter& root() { return root_; }
    std::vector<ad::Parameter*> parameters();

private:
    DepConfig config_;
    embed::Vocabulary deprels_;
    layers::HighwayLstmStack stack_;
    ad::Parameter root_;
    layers::BiaffineScorer edge_;
    layers::BiaffineScorer label_;
};

// Edge cross-entropy over candidate heads (diagonal excluded) plus label
// cross-entropy at the gold head, summed over the words of the sentence.
Tensor dep_loss(const DepScores& scores, const std::vector<int>& gold_heads,
                const std::vector<Index>& gold_labels);

// Label scores at each word's highest-scoring head (ROOT allowed, self
// excluded, lowest index on ties); n x K.
Tensor label_scores_at_best_heads(const DepScores& scores);

// Heads from Chu-Liu/Edmonds, then the best label at each chosen head.
DepPrediction decode(const DepScores& scores);

struct AttachmentScores {
    std::size_t words = 0;
    std::size_t head_correct = 0;
    std::size_t both_correct = 0;
    double uas() const { return words ? static_cast<double>(head_correct) / words : 0.0; }
    double las() const { return words ? static_cast<double>(both_correct) / words : 0.0; }
};

// Counts every word, punctuation included.
AttachmentScores eval_las_uas(const std::vector<DepPrediction>& predicted,
                              const std::vector<DepPrediction>& gold);

}  // namespace hmtl::depparse
