#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hmtl/autodiff/tensor.hpp"
#include "hmtl/rng.hpp"

namespace hmtl::embed {

using ad::Index;

// Symbol <-> id map. Label inventories have no special entries; embedding
// vocabularies reserve id 0 for <PAD> and optionally id 1 for <UNK>.
class Vocabulary {
public:
    static constexpr std::string_view kPad = "<PAD>";
    static constexpr std::string_view kUnk = "<UNK>";

    Vocabulary() = default;
    Vocabulary(std::vector<std::string> entries, bool has_pad, bool has_unk);

    static Vocabulary labels(std::vector<std::string> symbols);
    static Vocabulary with_specials(std::vector<std::string> symbols, bool unk);

    std::optional<Index> find(std::string_view symbol) const;
    // Falls back to <UNK>; throws VocabularyError when absent and no <UNK>.
    Index id(std::string_view symbol) const;
    const std::string& symbol(Index id) const;
    Index size() const { return static_cast<Index>(entries_.size()); }

    std::optional<Index> pad_id() const { return has_pad_ ? std::optional<Index>(0) : std::nullopt; }
    std::optional<Index> unk_id() const;
    bool has_pad() const { return has_pad_; }
    bool has_unk() const { return has_unk_; }
    const std::vector<std::string>& entries() const { return entries_; }

    bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

private:
    std::vector<std::string> entries_;
    std::unordered_map<std::string, Index> index_;
    bool has_pad_ = false;
    bool has_unk_ = false;
};

// Trainable lookup table initialised uniformly in +-sqrt(6 / (|L| + dim)),
// where |L| is the number of categories. The <PAD> row is zero and frozen.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(const std::string& name, Vocabulary vocab, Index dim, Rng& rng);

    static double init_bound(Index categories, Index dim);

    ad::Tensor lookup(ad::Tape& tape, const std::vector<Index>& ids);
    std::vector<Index> ids(const std::vector<std::string>& symbols) const;

    const Vocabulary& vocab() const { return vocab_; }
    Index dim() const { return weights_.value.cols(); }
    ad::Parameter& weights() { return weights_; }
    const ad::Parameter& weights() const { return weights_; }

private:
    Vocabulary vocab_;
    ad::Parameter weights_;
};

}  // namespace hmtl::embed
