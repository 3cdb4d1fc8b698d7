#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hmtl::ingest {

enum class CasingCategory { Title, AllCaps, Lower, Apostrophe, Numeric };

inline constexpr std::array<CasingCategory, 5> kCasingCategories = {
    CasingCategory::Title, CasingCategory::AllCaps, CasingCategory::Lower,
    CasingCategory::Apostrophe, CasingCategory::Numeric};

std::string_view to_string(CasingCategory c);

// One annotated sentence. Heads are 1-based word positions with 0 for the
// synthetic root, as in CoNLL-U.
struct Sentence {
    std::string id;
    std::vector<std::string> words;
    std::vector<std::string> xpos;
    std::vector<CasingCategory> casing;
    std::optional<std::vector<int>> gold_heads;
    std::optional<std::vector<std::string>> gold_deprels;
    std::optional<std::vector<std::string>> gold_ner;

    std::size_t size() const { return words.size(); }
    bool operator==(const Sentence&) const = default;
};

// Builds a sentence and fills in the casing column.
Sentence make_sentence(std::string id, std::vector<std::string> words,
                       std::vector<std::string> xpos);

// Throws ValidationError when annotation lengths disagree, a head is out of
// range or points at its own word, or the NER column is not valid IOB-2.
void validate(const Sentence& s);

// Position of the first tag breaking IOB-2 (malformed tag, or I-X not
// preceded by B-X / I-X), or nullopt for a valid sequence.
std::optional<std::size_t> first_iob2_violation(std::span<const std::string> tags);

inline bool is_valid_iob2(std::span<const std::string> tags) {
    return !first_iob2_violation(tags).has_value();
}

}  // namespace hmtl::ingest
