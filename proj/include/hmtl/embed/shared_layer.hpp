#pragma once

#include <vector>

#include "hmtl/autodiff/ops.hpp"
#include "hmtl/embed/embedding.hpp"
#include "hmtl/embed/provider.hpp"
#include "hmtl/ingest/batch.hpp"

namespace hmtl::embed {

struct SharedConfig {
    Index d_bert = 768;
    Index d_casing = 32;
    Index d_pos = 64;
    double bert_dropout = 0.5;
    double embedding_dropout = 0.4;
};

// Casing vocabulary: <PAD> followed by the five categories.
Vocabulary casing_vocabulary();

// Common layer shared by both task heads: o_j = bert_j (+) casing_j (+) pos_j,
// concatenated in that order.
class SharedLayer {
public:
    SharedLayer() = default;
    SharedLayer(const SharedConfig& config, Vocabulary xpos, Rng& init);

    Index output_dim() const { return config_.d_bert + config_.d_casing + config_.d_pos; }
    const SharedConfig& config() const { return config_; }

    // `bert_words` holds the frozen word vectors (n x d_bert) and enters the
    // tape as a constant.
    ad::Tensor encode(ad::Tape& tape, const ingest::Sentence& sentence,
                      const Eigen::MatrixXd& bert_words, ad::Mode mode, Rng& rng);

    EmbeddingTable& casing_table() { return casing_; }
    EmbeddingTable& pos_table() { return pos_; }
    const EmbeddingTable& casing_table() const { return casing_; }
    const EmbeddingTable& pos_table() const { return pos_; }
    std::vector<ad::Parameter*> parameters();

private:
    SharedConfig config_;
    EmbeddingTable casing_;
    EmbeddingTable pos_;
};

// Word vectors for sentence b of a batch: provider output on the padded
// subtoken row, averaged over layers and then over each word's subtokens.
Eigen::MatrixXd bert_word_vectors(const ingest::Batch& batch, std::size_t b,
                                  const ContextualProvider& provider);

// Shared encodings (real words only) for every sentence of a batch.
std::vector<ad::Tensor> encode_batch(ad::Tape& tape, const ingest::Batch& batch,
                                     const ContextualProvider& provider, SharedLayer& shared,
                                     ad::Mode mode, Rng& rng);

}  // namespace hmtl::embed
