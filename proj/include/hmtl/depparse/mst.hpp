#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hmtl/errors.hpp"

namespace hmtl::depparse {

namespace detail {

// Maximum arborescence rooted at node 0 of a dense graph, by greedy head
// selection plus recursive cycle contraction. scores(d, h) is the weight of
// the arc h -> d; -inf marks a missing arc. Returns head[d] for every node
// (head[0] = -1). Ties go to the lowest head index.
template <typename Scalar>
std::vector<int> max_arborescence(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& w) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int m = static_cast<int>(w.rows());
    constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

    std::vector<int> head(static_cast<std::size_t>(m), -1);
    for (int d = 1; d < m; ++d) {
        int best = -1;
        for (int h = 0; h < m; ++h) {
            if (h == d || w(d, h) == kNegInf) continue;
            if (best < 0 || w(d, h) > w(d, best)) best = h;
        }
        if (best < 0) throw ContractError("chu_liu_edmonds: node without any incoming arc");
        head[static_cast<std::size_t>(d)] = best;
    }

    // Find a cycle among the greedy choices.
    std::vector<int> color(static_cast<std::size_t>(m), 0);
    std::vector<int> cycle;
    for (int start = 1; start < m && cycle.empty(); ++start) {
        if (color[static_cast<std::size_t>(start)] != 0) continue;
        int v = start;
        while (v > 0 && color[static_cast<std::size_t>(v)] == 0) {
            color[static_cast<std::size_t>(v)] = start;
            v = head[static_cast<std::size_t>(v)];
        }
        if (v > 0 && color[static_cast<std::size_t>(v)] == start) {
            int u = v;
            do {
                cycle.push_back(u);
                u = head[static_cast<std::size_t>(u)];
            } while (u != v);
        }
        for (int u = start; u > 0 && color[static_cast<std::size_t>(u)] == start;
             u = head[static_cast<std::size_t>(u)]) {
            color[static_cast<std::size_t>(u)] = -1;
        }
    }
    if (cycle.empty()) return head;

    std::vector<bool> in_cycle(static_cast<std::size_t>(m), false);
    for (int v : cycle) in_cycle[static_cast<std::size_t>(v)] = true;

    // Contracted graph: surviving nodes keep their relative order, the cycle
    // becomes the last node.
    std::vector<int> to_new(static_cast<std::size_t>(m), -1);
    std::vector<int> to_old;
    for (int v = 0; v < m; ++v) {
        if (!in_cycle[static_cast<std::size_t>(v)]) {
            to_new[static_cast<std::size_t>(v)] = static_cast<int>(to_old.size());
            to_old.push_back(v);
        }
    }
    const int c = static_cast<int>(to_old.size());
    const int mc = c + 1;
    Mat wc = Mat::Constant(mc, mc, kNegInf);
    std::vector<int> enter_head(static_cast<std::size_t>(mc), -1);  // outside d <- cycle member
    std::vector<int> enter_dep(static_cast<std::size_t>(mc), -1);   // cycle member <- outside h

    for (int nd = 1; nd < c; ++nd) {
        const int d = to_old[static_cast<std::size_t>(nd)];
        for (int nh = 0; nh < c; ++nh) {
            if (nh != nd) wc(nd, nh) = w(d, to_old[static_cast<std::size_t>(nh)]);
        }
        for (int h : cycle) {
            if (w(d, h) == kNegInf) continue;
            if (enter_head[static_cast<std::size_t>(nd)] < 0 || w(d, h) > wc(nd, c) ||
                (w(d, h) == wc(nd, c) && h < enter_head[static_cast<std::size_t>(nd)])) {
                wc(nd, c) = w(d, h);
                enter_head[static_cast<std::size_t>(nd)] = h;
            }
        }
    }
    for (int nh = 0; nh < c; ++nh) {
        const int h = to_old[static_cast<std::size_t>(nh)];
        for (int d : cycle) {
            if (w(d, h) == kNegInf) continue;
            const Scalar adjusted = w(d, h) - w(d, head[static_cast<std::size_t>(d)]);
            if (enter_dep[static_cast<std::size_t>(nh)] < 0 || adjusted > wc(c, nh) ||
                (adjusted == wc(c, nh) && d < enter_dep[static_cast<std::size_t>(nh)])) {
                wc(c, nh) = adjusted;
                enter_dep[static_cast<std::size_t>(nh)] = d;
            }
        }
    }

    const std::vector<int> sub = max_arborescence<Scalar>(wc);
    std::vector<int> result = head;
    for (int nd = 1; nd < c; ++nd) {
        const int nh = sub[static_cast<std::size_t>(nd)];
        result[static_cast<std::size_t>(to_old[static_cast<std::size_t>(nd)])] =
            nh == c ? enter_head[static_cast<std::size_t>(nd)] : to_old[static_cast<std::size_t>(nh)];
    }
    const int nh = sub[static_cast<std::size_t>(c)];
    const int entry = enter_dep[static_cast<std::size_t>(nh)];
    result[static_cast<std::size_t>(entry)] = to_old[static_cast<std::size_t>(nh)];
    return result;
}

}  // namespace detail

// Sum of scores(i, heads[i-1]) for i = 1..n, accumulated in that order.
template <typename Derived>
typename Derived::Scalar tree_score(const Eigen::MatrixBase<Derived>& scores,
                                    const std::vector<int>& heads) {
    typename Derived::Scalar total(0);
    for (std::size_t i = 0; i < heads.size(); ++i) {
        total += scores(static_cast<Eigen::Index>(i + 1), heads[i]);
    }
    return total;
}

// Highest-scoring dependency tree over an (n+1) x (n+1) score matrix with
// rows = dependents and columns = candidate heads, node 0 being ROOT. The
// tree has exactly one word attached to ROOT: every choice of ROOT child is
// solved with the other ROOT arcs removed and the best total is kept
// (earliest child on ties). Returns the heads of words 1..n.
template <typename Derived>
std::vector<int> chu_liu_edmonds(const Eigen::MatrixBase<Derived>& scores) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index size = scores.rows();
    if (scores.cols() != size) throw DimensionError("chu_liu_edmonds: score matrix is not square");
    if (size < 2) throw ContractError("chu_liu_edmonds: sentence has no words");
    constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

    Mat base = scores;
    for (Eigen::Index i = 0; i < size; ++i) base(i, i) = kNegInf;
    base.row(0).setConstant(kNegInf);

    std::vector<int> best;
    Scalar best_score = kNegInf;
    for (Eigen::Index r = 1; r < size; ++r) {
        Mat w = base;
        for (Eigen::Index d = 1; d < size; ++d) {
            if (d != r) w(d, 0) = kNegInf;
        }
        const std::vector<int> full = detail::max_arborescence<Scalar>(w);
        std::vector<int> heads(full.begin() + 1, full.end());
        const Scalar total = tree_score(scores, heads);
        if (best.empty() || total > best_score) {
            best = std::move(heads);
            best_score = total;
        }
    }
    return best;
}

// True when heads (for words 1..n) form a tree rooted at 0 with exactly one
// ROOT child.
inline bool is_single_root_tree(const std::vector<int>& heads) {
    const int n = static_cast<int>(heads.size());
    int roots = 0;
    for (int i = 0; i < n; ++i) {
        const int h = heads[static_cast<std::size_t>(i)];
        if (h < 0 || h > n || h == i + 1) return false;
        if (h == 0) ++roots;
    }
    if (roots != 1) return false;
    for (int i = 1; i <= n; ++i) {
        int v = i;
        for (int steps = 0; v != 0; ++steps) {
            if (steps > n) return false;
            v = heads[static_cast<std::size_t>(v - 1)];
        }
    }
    return true;
}

}  // namespace hmtl::depparse
