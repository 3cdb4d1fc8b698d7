#include "hmtl/embed/embedding.hpp"

#include <cmath>

#include "hmtl/autodiff/ops.hpp"
#include "hmtl/errors.hpp"

namespace hmtl::embed {

Vocabulary::Vocabulary(std::vector<std::string> entries, bool has_pad, bool has_unk)
    : entries_(std::move(entries)), has_pad_(has_pad), has_unk_(has_unk) {
    if (has_pad_ && (entries_.empty() || entries_[0] != kPad)) {
        throw ContractError("vocabulary with <PAD> must hold it at id 0");
    }
    if (has_unk_ && (entries_.size() < 2 || entries_[1] != kUnk)) {
        throw ContractError("vocabulary with <UNK> must hold it at id 1");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!index_.emplace(entries_[i], static_cast<Index>(i)).second) {
            throw VocabularyError("duplicate vocabulary entry '" + entries_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::labels(std::vector<std::string> symbols) {
    return Vocabulary(std::move(symbols), false, false);
}

Vocabulary Vocabulary::with_specials(std::vector<std::string> symbols, bool unk) {
    std::vector<std::string> entries{std::string(kPad)};
    if (unk) entries.emplace_back(kUnk);
    for (auto& s : symbols) {
        if (s == kPad || s == kUnk) continue;
        entries.push_back(std::move(s));
    }
    return Vocabulary(std::move(entries), true, unk);
}

std::optional<Index> Vocabulary::find(std::string_view symbol) const {
    auto it = index_.find(std::string(symbol));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Index Vocabulary::id(std::string_view symbol) const {
    if (auto found = find(symbol)) return *found;
    if (has_unk_) return 1;
    throw VocabularyError("unknown symbol '" + std::string(symbol) + "'");
}

const std::string& Vocabulary::symbol(Index id) const {
    if (id < 0 || id >= size()) {
        throw ContractError("vocabulary id " + std::to_string(id) + " out of range");
    }
    return entries_[static_cast<std::size_t>(id)];
}

std::optional<Index> Vocabulary::unk_id() const {
    return has_unk_ ? std::optional<Index>(1) : std::nullopt;
}

EmbeddingTable::EmbeddingTable(const std::string& name, Vocabulary vocab, Index dim, Rng& rng)
    : vocab_(std::move(vocab)) {
    if (dim <= 0) throw ContractError("embedding dimension must be positive");
    const double bound = init_bound(vocab_.size(), dim);
    ad::Matrix w(vocab_.size(), dim);
    for (Index r = 0; r < w.rows(); ++r) {
        for (Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    weights_ = ad::Parameter(name, std::move(w));
    if (auto pad = vocab_.pad_id()) {
        weights_.value.row(*pad).setZero();
        weights_.frozen_rows.push_back(*pad);
    }
}

double EmbeddingTable::init_bound(Index categories, Index dim) {
    return std::sqrt(6.0 / static_cast<double>(categories + dim));
}

ad::Tensor EmbeddingTable::lookup(ad::Tape& tape, const std::vector<Index>& ids) {
    return ad::embedding_lookup(tape.param(weights_), ids);
}

std::vector<Index> EmbeddingTable::ids(const std::vector<std::string>& symbols) const {
    std::vector<Index> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(vocab_.id(s));
    return out;
}

}  // namespace hmtl::embed
