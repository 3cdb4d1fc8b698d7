#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace hmtl::cli {

using WordCorpus = std::vector<std::vector<std::string>>;

// Rare-word profile: sentences are drawn uniformly without replacement until
// the sample first reaches `target_words` (the crossing sentence is kept),
// repeated `repeats` times. Entry f is the mean number of sampled tokens
// whose word type occurs exactly f times in its sample, so the entries sum
// to the mean sample size.
struct RareHistogram {
    std::map<std::size_t, double> tokens_by_frequency;
    double mean_words = 0.0;
};

RareHistogram rare_word_histogram(const WordCorpus& corpus, std::size_t target_words, int repeats,
                                  std::uint64_t seed);

// Unknown-word curve: one test sample of exactly `test_words` tokens (the
// last sentence drawn is cut), then for each repeat a shuffled order of the
// remaining sentences whose prefixes form the training samples of every
// size. Reports the mean number of test tokens absent from training.
struct UnknownCurve {
    std::size_t test_words = 0;
    std::vector<std::size_t> sizes;
    std::vector<double> mean_unknown;
};

UnknownCurve unknown_word_curve(const WordCorpus& corpus, std::size_t test_words,
                                const std::vector<std::size_t>& sizes, int repeats,
                                std::uint64_t seed);

void write_csv(std::ostream& out, const RareHistogram& h);
void write_csv(std::ostream& out, const UnknownCurve& c);

}  // namespace hmtl::cli
