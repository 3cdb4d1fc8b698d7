#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance runner. Nothing here calls into the library's algorithms.

#include <cmath>
#include <limits>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "hmtl/rng.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;

inline MatrixXd random_matrix(Index rows, Index cols, hmtl::Rng& rng, double lo = -1.0,
                              double hi = 1.0) {
    MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    }
    return m;
}

// Advances an odometer over [0, base)^n; false once it wraps.
inline bool next_assignment(std::vector<int>& digits, int base) {
    for (auto& d : digits) {
        if (++d < base) return true;
        d = 0;
    }
    return false;
}

inline bool single_root_tree(const std::vector<int>& heads) {
    const int n = static_cast<int>(heads.size());
    int roots = 0;
    for (int i = 0; i < n; ++i) {
        if (heads[i] == i + 1) return false;
        if (heads[i] == 0) ++roots;
    }
    if (roots != 1) return false;
    for (int i = 1; i <= n; ++i) {
        std::set<int> seen;
        for (int v = i; v != 0; v = heads[v - 1]) {
            if (!seen.insert(v).second) return false;
        }
    }
    return true;
}

// Every single-root dependency tree over n words, heads 1-based with 0 = ROOT.
inline std::vector<std::vector<int>> all_trees(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> heads(n, 0);
    do {
        if (single_root_tree(heads)) out.push_back(heads);
    } while (next_assignment(heads, n + 1));
    return out;
}

inline double tree_total(const MatrixXd& scores, const std::vector<int>& heads) {
    double total = 0.0;
    for (std::size_t i = 0; i < heads.size(); ++i) total += scores(Index(i + 1), heads[i]);
    return total;
}

inline double best_tree_score(const MatrixXd& scores) {
    const int n = static_cast<int>(scores.rows()) - 1;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& heads : all_trees(n)) best = std::max(best, tree_total(scores, heads));
    return best;
}

// Linear-chain CRF by explicit path enumeration. t has Y+2 rows/cols, START = Y,
// STOP = Y+1, t(a, b) scores moving from a to b.
inline double crf_path(const MatrixXd& s, const MatrixXd& t, const std::vector<int>& y) {
    const Index tags = s.cols();
    double total = t(tags, y.front()) + t(y.back(), tags + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        total += s(Index(i), y[i]);
        if (i > 0) total += t(y[i - 1], y[i]);
    }
    return total;
}

inline std::vector<std::vector<int>> all_paths(Index n, Index tags) {
    std::vector<std::vector<int>> out;
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    do {
        out.push_back(y);
    } while (next_assignment(y, static_cast<int>(tags)));
    return out;
}

inline double crf_log_partition(const MatrixXd& s, const MatrixXd& t) {
    std::vector<double> scores;
    for (const auto& y : all_paths(s.rows(), s.cols())) scores.push_back(crf_path(s, t, y));
    const double top = *std::max_element(scores.begin(), scores.end());
    double acc = 0.0;
    for (double v : scores) acc += std::exp(v - top);
    return top + std::log(acc);
}

inline double crf_best_path(const MatrixXd& s, const MatrixXd& t) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& y : all_paths(s.rows(), s.cols())) best = std::max(best, crf_path(s, t, y));
    return best;
}

// Entity spans found by matching "B-X (I-X)*" with a regex over the tag
// string, one character per tag. With `lenient` a stray I-X also opens a
// span, which is how predictions are read.
using Span = std::tuple<std::string, std::size_t, std::size_t>;

inline std::set<Span> regex_spans(const std::vector<std::string>& tags, bool lenient = false) {
    std::vector<std::string> types;
    std::string code;
    for (const auto& tag : tags) {
        if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
            const std::string type = tag.substr(2);
            auto it = std::find(types.begin(), types.end(), type);
            const std::size_t k = static_cast<std::size_t>(it - types.begin());
            if (it == types.end()) types.push_back(type);
            code += static_cast<char>((tag[0] == 'B' ? 'A' : 'a') + k);
        } else {
            code += 'O';
        }
    }
    std::set<Span> out;
    for (std::size_t k = 0; k < types.size(); ++k) {
        const char b = static_cast<char>('A' + k);
        const char i = static_cast<char>('a' + k);
        const std::string head = lenient ? std::string("[") + b + i + "]" : std::string(1, b);
        const std::regex pattern(head + std::string(1, i) + "*");
        for (auto it = std::sregex_iterator(code.begin(), code.end(), pattern);
             it != std::sregex_iterator(); ++it) {
            const std::size_t begin = static_cast<std::size_t>(it->position());
            out.emplace(types[k], begin, begin + static_cast<std::size_t>(it->length()));
        }
    }
    return out;
}

inline double span_f1(const std::vector<std::vector<std::string>>& pred,
                      const std::vector<std::vector<std::string>>& gold, bool lenient = false) {
    std::size_t tp = 0, np = 0, ng = 0;
    for (std::size_t s = 0; s < pred.size(); ++s) {
        const auto p = regex_spans(pred[s], lenient);
        const auto g = regex_spans(gold[s]);
        np += p.size();
        ng += g.size();
        for (const auto& e : p) tp += g.count(e);
    }
    if (tp == 0) return 0.0;
    const double precision = double(tp) / double(np);
    const double recall = double(tp) / double(ng);
    return 2.0 * precision * recall / (precision + recall);
}

// out(i, k * Mh + j) = sum_a sum_b dep(i, a) W(a, k * B + b) head(j, b).
inline MatrixXd bilinear(const MatrixXd& dep, const MatrixXd& head, const MatrixXd& w,
                         Index labels) {
    const Index b_dim = head.cols();
    MatrixXd out = MatrixXd::Zero(dep.rows(), labels * head.rows());
    for (Index i = 0; i < dep.rows(); ++i) {
        for (Index k = 0; k < labels; ++k) {
            for (Index j = 0; j < head.rows(); ++j) {
                double acc = 0.0;
                for (Index a = 0; a < dep.cols(); ++a) {
                    for (Index b = 0; b < b_dim; ++b) {
                        acc += dep(i, a) * w(a, k * b_dim + b) * head(j, b);
                    }
                }
                out(i, k * head.rows() + j) = acc;
            }
        }
    }
    return out;
}

inline std::vector<double> softmax(const std::vector<double>& x) {
    std::vector<double> e;
    double total = 0.0;
    for (double v : x) {
        e.push_back(std::exp(v));
        total += e.back();
    }
    for (double& v : e) v /= total;
    return e;
}

// -log softmax(row)[target] summed over rows, skipping masked-out columns.
inline double nll(const MatrixXd& logits, const std::vector<Index>& targets,
                  const MatrixXd* mask = nullptr) {
    double total = 0.0;
    for (Index r = 0; r < logits.rows(); ++r) {
        double z = 0.0;
        for (Index c = 0; c < logits.cols(); ++c) {
            if (mask && (*mask)(r, c) == 0.0) continue;
            z += std::exp(logits(r, c));
        }
        total += std::log(z) - logits(r, targets[static_cast<std::size_t>(r)]);
    }
    return total;
}

}  // namespace oracle
