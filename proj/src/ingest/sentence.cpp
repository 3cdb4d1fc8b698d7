#include "hmtl/ingest/sentence.hpp"

#include "hmtl/errors.hpp"
#include "hmtl/ingest/text.hpp"

namespace hmtl::ingest {

std::string_view to_string(CasingCategory c) {
    switch (c) {
        case CasingCategory::Title: return "TITLE";
        case CasingCategory::AllCaps: return "ALLCAPS";
        case CasingCategory::Lower: return "LOWER";
        case CasingCategory::Apostrophe: return "APOSTROPHE";
        case CasingCategory::Numeric: return "NUMERIC";
    }
    return "LOWER";
}

Sentence make_sentence(std::string id, std::vector<std::string> words,
                       std::vector<std::string> xpos) {
    Sentence s;
    s.id = std::move(id);
    s.words = std::move(words);
    s.xpos = std::move(xpos);
    s.casing.reserve(s.words.size());
    for (const auto& w : s.words) {
        s.casing.push_back(classify_casing(w));
    }
    return s;
}

std::optional<std::size_t> first_iob2_violation(std::span<const std::string> tags) {
    std::string_view open_type;
    bool open = false;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        std::string_view tag = tags[i];
        if (tag == "O") {
            open = false;
            continue;
        }
        if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
            return i;
        }
        std::string_view type = tag.substr(2);
        if (tag[0] == 'I' && (!open || type != open_type)) {
            return i;
        }
        open = true;
        open_type = type;
    }
    return std::nullopt;
}

void validate(const Sentence& s) {
    const std::size_t n = s.words.size();
    auto fail = [&](const std::string& what) {
        throw ValidationError("sentence " + s.id + ": " + what);
    };
    if (s.xpos.size() != n || s.casing.size() != n) {
        fail("xpos/casing length differs from word count");
    }
    if (s.gold_heads) {
        if (s.gold_heads->size() != n) fail("head column length differs from word count");
        for (std::size_t i = 0; i < n; ++i) {
            const int h = (*s.gold_heads)[i];
            if (h < 0 || h > static_cast<int>(n)) {
                fail("head " + std::to_string(h) + " of word " + std::to_string(i + 1) +
                     " is out of range");
            }
            if (h == static_cast<int>(i + 1)) {
                fail("word " + std::to_string(i + 1) + " is its own head");
            }
        }
    }
    if (s.gold_deprels && s.gold_deprels->size() != n) {
        fail("deprel column length differs from word count");
    }
    if (s.gold_ner) {
        if (s.gold_ner->size() != n) fail("NER column length differs from word count");
        if (auto bad = first_iob2_violation(*s.gold_ner)) {
            fail("invalid IOB-2 tag '" + (*s.gold_ner)[*bad] + "' at position " +
                 std::to_string(*bad + 1));
        }
    }
}

}  // namespace hmtl::ingest
