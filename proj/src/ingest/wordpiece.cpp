#include "hmtl/ingest/wordpiece.hpp"

#include <fstream>

#include "hmtl/errors.hpp"
#include "hmtl/ingest/text.hpp"

namespace hmtl::ingest {

SubwordVocab::SubwordVocab(std::vector<std::string> tokens, bool lowercase)
    : tokens_(std::move(tokens)), lowercase_(lowercase) {
    index_.insert(tokens_.begin(), tokens_.end());
    if (!index_.contains(std::string(kUnkSubtoken)) || !index_.contains(std::string(kPadSubtoken))) {
        throw VocabularyError("subword vocabulary must contain [UNK] and [PAD]");
    }
}

SubwordVocab SubwordVocab::load(const std::string& path, bool lowercase) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open subword vocabulary " + path);
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    return SubwordVocab(std::move(tokens), lowercase);
}

bool SubwordVocab::contains(std::string_view piece) const {
    return index_.contains(std::string(piece));
}

std::vector<std::string> wordpiece_tokenize(std::string_view word, const SubwordVocab& vocab) {
    const std::u32string chars = decode_utf8(vocab.lowercase() ? to_lower(word) : std::string(word));
    if (chars.empty() || chars.size() > kMaxWordChars) {
        return {std::string(kUnkSubtoken)};
    }
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < chars.size()) {
        std::size_t end = chars.size();
        std::string match;
        while (end > start) {
            std::string candidate = encode_utf8(chars.substr(start, end - start));
            if (start > 0) candidate.insert(0, kContinuation);
            if (vocab.contains(candidate)) {
                match = std::move(candidate);
                break;
            }
            --end;
        }
        if (match.empty()) {
            return {std::string(kUnkSubtoken)};
        }
        pieces.push_back(std::move(match));
        start = end;
    }
    return pieces;
}

}  // namespace hmtl::ingest
