#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace hmtl::ingest {

inline constexpr std::string_view kUnkSubtoken = "[UNK]";
inline constexpr std::string_view kPadSubtoken = "[PAD]";
inline constexpr std::string_view kContinuation = "##";

// Subtoken inventory for greedy longest-match segmentation. Continuation
// pieces carry the literal "##" prefix. With `lowercase` set, words are
// lowercased before matching, as uncased multilingual vocabularies expect.
class SubwordVocab {
public:
    SubwordVocab() = default;
    explicit SubwordVocab(std::vector<std::string> tokens, bool lowercase = false);

    // One subtoken per line; must contain [UNK] and [PAD].
    static SubwordVocab load(const std::string& path, bool lowercase = false);

    bool contains(std::string_view piece) const;
    const std::vector<std::string>& tokens() const { return tokens_; }
    bool lowercase() const { return lowercase_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_set<std::string> index_;
    bool lowercase_ = false;
};

// Words longer than this many characters map straight to [UNK].
inline constexpr std::size_t kMaxWordChars = 100;

std::vector<std::string> wordpiece_tokenize(std::string_view word, const SubwordVocab& vocab);

}  // namespace hmtl::ingest
