#include "hmtl/embed/shared_layer.hpp"

#include "hmtl/embed/aggregate.hpp"
#include "hmtl/errors.hpp"

namespace hmtl::embed {

Vocabulary casing_vocabulary() {
    std::vector<std::string> names;
    for (auto c : ingest::kCasingCategories) names.emplace_back(ingest::to_string(c));
    return Vocabulary::with_specials(std::move(names), false);
}

SharedLayer::SharedLayer(const SharedConfig& config, Vocabulary xpos, Rng& init)
    : config_(config),
      casing_("shared.casing", casing_vocabulary(), config.d_casing, init),
      pos_("shared.pos", std::move(xpos), config.d_pos, init) {}

ad::Tensor SharedLayer::encode(ad::Tape& tape, const ingest::Sentence& sentence,
                               const Eigen::MatrixXd& bert_words, ad::Mode mode, Rng& rng) {
    const auto n = static_cast<Index>(sentence.size());
    if (bert_words.rows() != n || bert_words.cols() != config_.d_bert) {
        throw DimensionError("shared layer: expected " + std::to_string(n) + "x" +
                             std::to_string(config_.d_bert) + " word vectors, got " +
                             std::to_string(bert_words.rows()) + "x" +
                             std::to_string(bert_words.cols()));
    }
    std::vector<std::string> casing;
    casing.reserve(sentence.casing.size());
    for (auto c : sentence.casing) casing.emplace_back(ingest::to_string(c));

    auto bert = ad::dropout(tape.constant(bert_words), config_.bert_dropout, mode, rng);
    auto cas = ad::dropout(casing_.lookup(tape, casing_.ids(casing)), config_.embedding_dropout,
                           mode, rng);
    auto pos = ad::dropout(pos_.lookup(tape, pos_.ids(sentence.xpos)), config_.embedding_dropout,
                           mode, rng);
    return ad::concat_cols({bert, cas, pos});
}

std::vector<ad::Parameter*> SharedLayer::parameters() {
    return {&casing_.weights(), &pos_.weights()};
}

Eigen::MatrixXd bert_word_vectors(const ingest::Batch& batch, std::size_t b,
                                  const ContextualProvider& provider) {
    const auto layers = provider.encode(batch.sentences[b].id, batch.subtokens[b]);
    const auto spans = batch.word_spans(b);
    return aggregate_subwords<double>(layers, spans);
}

std::vector<ad::Tensor> encode_batch(ad::Tape& tape, const ingest::Batch& batch,
                                     const ContextualProvider& provider, SharedLayer& shared,
                                     ad::Mode mode, Rng& rng) {
    std::vector<ad::Tensor> out;
    out.reserve(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        out.push_back(shared.encode(tape, batch.sentences[b], bert_word_vectors(batch, b, provider),
                                    mode, rng));
    }
    return out;
}

}  // namespace hmtl::embed
