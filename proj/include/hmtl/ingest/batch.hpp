#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hmtl/ingest/sentence.hpp"
#include "hmtl/ingest/wordpiece.hpp"

namespace hmtl::ingest {

inline constexpr std::string_view kPadWord = "[PAD]";

// Half-open range of subtoken positions belonging to one word.
struct SubtokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool operator==(const SubtokenSpan&) const = default;
};

// Sentences packed under a word budget with two padding stages: words are
// padded to `word_length` with [PAD] words, each of which tokenizes to one
// [PAD] subtoken; the resulting subtoken rows are padded again to
// `subtoken_length`.
struct Batch {
    std::vector<std::size_t> source_index;  // position of each sentence in the input
    std::vector<Sentence> sentences;        // unpadded, in batch order
    std::size_t word_length = 0;
    std::size_t subtoken_length = 0;
    std::vector<std::vector<std::string>> words;      // B x word_length
    std::vector<std::vector<std::string>> subtokens;  // B x subtoken_length
    // B x word_length; PAD words own a single [PAD] subtoken.
    std::vector<std::vector<SubtokenSpan>> spans;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> word_mask;  // true on real words

    std::size_t size() const { return sentences.size(); }
    std::size_t word_count() const;
    // Spans of the real words of sentence b.
    std::vector<SubtokenSpan> word_spans(std::size_t b) const;
};

// Greedy packing in input order (or in a seeded shuffled order). Throws
// OversizeError when a sentence alone exceeds the budget and ContractError
// on an empty sentence.
std::vector<Batch> make_batches(const std::vector<Sentence>& sentences, std::size_t word_budget,
                                const SubwordVocab& vocab,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// Strips both padding stages and restores the input order.
std::vector<Sentence> unpad(const std::vector<Batch>& batches);

// Rejoins the subtokens of every real word of sentence b, dropping the "##"
// continuation marks.
std::vector<std::string> merge_spans(const Batch& batch, std::size_t b);

}  // namespace hmtl::ingest
