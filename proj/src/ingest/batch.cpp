#include "hmtl/ingest/batch.hpp"

#include <algorithm>
#include <numeric>

#include "hmtl/errors.hpp"
#include "hmtl/rng.hpp"

namespace hmtl::ingest {

std::size_t Batch::word_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
}

std::vector<SubtokenSpan> Batch::word_spans(std::size_t b) const {
    const auto& all = spans.at(b);
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(sentences.at(b).size())};
}

namespace {

Batch assemble(const std::vector<Sentence>& corpus, const std::vector<std::size_t>& members,
               const SubwordVocab& vocab) {
    Batch batch;
    batch.source_index = members;
    for (std::size_t idx : members) {
        batch.sentences.push_back(corpus[idx]);
        batch.word_length = std::max(batch.word_length, corpus[idx].size());
    }
    const std::size_t count = members.size();
    batch.word_mask.setConstant(static_cast<Eigen::Index>(count),
                                static_cast<Eigen::Index>(batch.word_length), false);

    // Stage 1: pad words, then tokenize every position.
    for (std::size_t b = 0; b < count; ++b) {
        const Sentence& s = batch.sentences[b];
        std::vector<std::string> words = s.words;
        words.resize(batch.word_length, std::string(kPadWord));
        std::vector<std::string> subtokens;
        std::vector<SubtokenSpan> spans;
        for (std::size_t j = 0; j < words.size(); ++j) {
            const bool real = j < s.size();
            batch.word_mask(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = real;
            const std::size_t begin = subtokens.size();
            if (real) {
                for (auto& piece : wordpiece_tokenize(words[j], vocab)) {
                    subtokens.push_back(std::move(piece));
                }
            } else {
                subtokens.emplace_back(kPadSubtoken);
            }
            spans.push_back({begin, subtokens.size()});
        }
        batch.subtoken_length = std::max(batch.subtoken_length, subtokens.size());
        batch.words.push_back(std::move(words));
        batch.subtokens.push_back(std::move(subtokens));
        batch.spans.push_back(std::move(spans));
    }
    // Stage 2: pad the subtoken rows to a common length.
    for (auto& row : batch.subtokens) {
        row.resize(batch.subtoken_length, std::string(kPadSubtoken));
    }
    return batch;
}

}  // namespace

std::vector<Batch> make_batches(const std::vector<Sentence>& sentences, std::size_t word_budget,
                                const SubwordVocab& vocab,
                                std::optional<std::uint64_t> shuffle_seed) {
    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i : order) {
        if (sentences[i].size() == 0) {
            throw ContractError("make_batches: sentence " + sentences[i].id + " is empty");
        }
        if (sentences[i].size() > word_budget) {
            throw OversizeError("sentence " + sentences[i].id + " has " +
                                std::to_string(sentences[i].size()) +
                                " words, above the batch budget of " + std::to_string(word_budget));
        }
    }
    if (shuffle_seed) {
        Rng rng(*shuffle_seed);
        rng.shuffle(order);
    }
    std::vector<Batch> batches;
    std::vector<std::size_t> members;
    std::size_t words = 0;
    for (std::size_t idx : order) {
        const std::size_t n = sentences[idx].size();
        if (!members.empty() && words + n > word_budget) {
            batches.push_back(assemble(sentences, members, vocab));
            members.clear();
            words = 0;
        }
        members.push_back(idx);
        words += n;
    }
    if (!members.empty()) {
        batches.push_back(assemble(sentences, members, vocab));
    }
    return batches;
}

std::vector<Sentence> unpad(const std::vector<Batch>& batches) {
    std::size_t total = 0;
    for (const auto& b : batches) total += b.size();
    std::vector<Sentence> out(total);
    for (const Batch& batch : batches) {
        for (std::size_t b = 0; b < batch.size(); ++b) {
            Sentence s = batch.sentences[b];
            s.words.clear();
            for (std::size_t j = 0; j < batch.word_length; ++j) {
                if (batch.word_mask(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j))) {
                    s.words.push_back(batch.words[b][j]);
                }
            }
            out.at(batch.source_index[b]) = std::move(s);
        }
    }
    return out;
}

std::vector<std::string> merge_spans(const Batch& batch, std::size_t b) {
    std::vector<std::string> words;
    for (const SubtokenSpan& span : batch.word_spans(b)) {
        std::string word;
        for (std::size_t k = span.begin; k < span.end; ++k) {
            std::string_view piece = batch.subtokens[b][k];
            if (piece.starts_with(kContinuation)) piece.remove_prefix(kContinuation.size());
            word += piece;
        }
        words.push_back(std::move(word));
    }
    return words;
}

}  // namespace hmtl::ingest
