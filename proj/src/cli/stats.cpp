#include "hmtl/cli/stats.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "hmtl/errors.hpp"
#include "hmtl/rng.hpp"

namespace hmtl::cli {
namespace {

std::size_t word_total(const WordCorpus& corpus) {
    std::size_t n = 0;
    for (const auto& s : corpus) n += s.size();
    return n;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return order;
}

}  // namespace

RareHistogram rare_word_histogram(const WordCorpus& corpus, std::size_t target_words, int repeats,
                                  std::uint64_t seed) {
    if (repeats < 1) throw UsageError("repeats must be positive");
    const std::size_t total = word_total(corpus);
    if (total < target_words) {
        throw UsageError("corpus has " + std::to_string(total) + " words, fewer than the " +
                         std::to_string(target_words) + " requested");
    }
    Rng rng(seed);
    RareHistogram out;
    for (int r = 0; r < repeats; ++r) {
        std::unordered_map<std::string, std::size_t> counts;
        std::size_t words = 0;
        for (std::size_t idx : shuffled_indices(corpus.size(), rng)) {
            if (words >= target_words) break;
            for (const auto& w : corpus[idx]) ++counts[w];
            words += corpus[idx].size();
        }
        for (const auto& [word, f] : counts) out.tokens_by_frequency[f] += static_cast<double>(f);
        out.mean_words += static_cast<double>(words);
    }
    for (auto& [f, v] : out.tokens_by_frequency) v /= repeats;
    out.mean_words /= repeats;
    return out;
}

UnknownCurve unknown_word_curve(const WordCorpus& corpus, std::size_t test_words,
                                const std::vector<std::size_t>& sizes, int repeats,
                                std::uint64_t seed) {
    if (repeats < 1) throw UsageError("repeats must be positive");
    if (sizes.empty()) throw UsageError("no training sizes requested");
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw UsageError("training sizes must ascend");
    Rng rng(seed);
    const auto order = shuffled_indices(corpus.size(), rng);

    std::vector<std::string> test;
    std::size_t used = 0;
    while (test.size() < test_words && used < order.size()) {
        for (const auto& w : corpus[order[used]]) {
            if (test.size() == test_words) break;
            test.push_back(w);
        }
        ++used;
    }
    if (test.size() < test_words) {
        throw UsageError("corpus has fewer than " + std::to_string(test_words) + " words for the test sample");
    }
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(used), order.end());
    std::size_t rest_words = 0;
    for (std::size_t idx : rest) rest_words += corpus[idx].size();
    if (rest_words < sizes.back()) {
        throw UsageError("only " + std::to_string(rest_words) + " words remain after the test sample; " +
                         std::to_string(sizes.back()) + " requested");
    }

    UnknownCurve out;
    out.test_words = test_words;
    out.sizes = sizes;
    out.mean_unknown.assign(sizes.size(), 0.0);
    for (int r = 0; r < repeats; ++r) {
        auto sample = rest;
        rng.shuffle(sample);
        std::unordered_set<std::string> seen;
        std::size_t words = 0;
        std::size_t next = 0;
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            while (words < sizes[k]) {
                for (const auto& w : corpus[sample[next]]) seen.insert(w);
                words += corpus[sample[next]].size();
                ++next;
            }
            const auto unknown = std::count_if(test.begin(), test.end(),
                                               [&](const std::string& w) { return !seen.count(w); });
            out.mean_unknown[k] += static_cast<double>(unknown);
        }
    }
    for (double& v : out.mean_unknown) v /= repeats;
    return out;
}

void write_csv(std::ostream& out, const RareHistogram& h) {
    out << "frequency,mean_tokens\n";
    for (const auto& [f, v] : h.tokens_by_frequency) out << f << ',' << v << '\n';
}

void write_csv(std::ostream& out, const UnknownCurve& c) {
    out << "train_words,mean_unknown\n";
    for (std::size_t k = 0; k < c.sizes.size(); ++k) out << c.sizes[k] << ',' << c.mean_unknown[k] << '\n';
}

}  // namespace hmtl::cli
