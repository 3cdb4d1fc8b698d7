#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hmtl/errors.hpp"

namespace hmtl::nertag {

// Linear-chain CRF over Y tags. Transition matrices are (Y+2) x (Y+2) with
// trans(a, b) scoring a -> b; index Y is START and Y+1 is STOP. Transitions
// into START and out of STOP never occur in a path.
inline Eigen::Index start_state(Eigen::Index tags) { return tags; }
inline Eigen::Index stop_state(Eigen::Index tags) { return tags + 1; }

namespace detail {

template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
    constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

template <typename Derived>
typename Derived::Scalar log_sum(const Eigen::DenseBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    const Scalar m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.derived().array() - m).exp().sum());
}

template <typename DS, typename DT>
void check_shapes(const Eigen::MatrixBase<DS>& s, const Eigen::MatrixBase<DT>& t) {
    if (s.rows() < 1) throw ContractError("crf: empty sequence");
    if (t.rows() != s.cols() + 2 || t.cols() != s.cols() + 2) {
        throw DimensionError("crf: transition matrix must be (Y+2)x(Y+2) for Y=" +
                             std::to_string(s.cols()));
    }
}

}  // namespace detail

template <typename DS, typename DT>
typename DS::Scalar path_score(const Eigen::MatrixBase<DS>& s, const Eigen::MatrixBase<DT>& t,
                               const std::vector<Eigen::Index>& tags) {
    detail::check_shapes(s, t);
    const Eigen::Index y = s.cols();
    if (static_cast<Eigen::Index>(tags.size()) != s.rows()) {
        throw ContractError("crf: tag sequence length differs from emissions");
    }
    for (auto tag : tags) {
        if (tag < 0 || tag >= y) throw ContractError("crf: tag id outside the tag set");
    }
    typename DS::Scalar total = t(start_state(y), tags.front());
    for (std::size_t i = 0; i < tags.size(); ++i) {
        total += s(static_cast<Eigen::Index>(i), tags[i]);
        if (i > 0) total += t(tags[i - 1], tags[i]);
    }
    return total + t(tags.back(), stop_state(y));
}

// Forward-algorithm log partition function.
template <typename DS, typename DT>
typename DS::Scalar forward_score(const Eigen::MatrixBase<DS>& s, const Eigen::MatrixBase<DT>& t) {
    using Scalar = typename DS::Scalar;
    using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
    detail::check_shapes(s, t);
    const Eigen::Index n = s.rows();
    const Eigen::Index y = s.cols();
    Row alpha = t.row(start_state(y)).head(y) + s.row(0);
    Row next(y);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index b = 0; b < y; ++b) {
            next(b) = detail::log_sum((alpha.transpose() + t.col(b).head(y)).eval()) + s(i, b);
        }
        alpha.swap(next);
    }
    return detail::log_sum((alpha + t.col(stop_state(y)).head(y).transpose()).eval());
}

template <typename Scalar>
struct CrfMarginals {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> unary;        // n x Y
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> transitions;  // (Y+2) x (Y+2) expected counts
    Scalar log_partition{};
};

// Forward-backward posterior marginals; these are the gradients of the log
// partition with respect to emissions and transitions.
template <typename DS, typename DT>
CrfMarginals<typename DS::Scalar> marginals(const Eigen::MatrixBase<DS>& s,
                                            const Eigen::MatrixBase<DT>& t) {
    using Scalar = typename DS::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::check_shapes(s, t);
    const Eigen::Index n = s.rows();
    const Eigen::Index y = s.cols();
    const Eigen::Index start = start_state(y);
    const Eigen::Index stop = stop_state(y);
    constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
    Mat alpha(n, y);
    Mat beta(n, y);
    for (Eigen::Index b = 0; b < y; ++b) alpha(0, b) = t(start, b) + s(0, b);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index b = 0; b < y; ++b) {
            Scalar acc = kNegInf;
            for (Eigen::Index a = 0; a < y; ++a) acc = detail::log_add(acc, alpha(i - 1, a) + t(a, b));
            alpha(i, b) = acc + s(i, b);
        }
    }
    for (Eigen::Index a = 0; a < y; ++a) beta(n - 1, a) = t(a, stop);
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        for (Eigen::Index a = 0; a < y; ++a) {
            Scalar acc = kNegInf;
            for (Eigen::Index b = 0; b < y; ++b) {
                acc = detail::log_add(acc, t(a, b) + s(i + 1, b) + beta(i + 1, b));
            }
            beta(i, a) = acc;
        }
    }
    CrfMarginals<Scalar> out;
    Scalar z = kNegInf;
    for (Eigen::Index a = 0; a < y; ++a) z = detail::log_add(z, alpha(n - 1, a) + t(a, stop));
    out.log_partition = z;
    auto prob = [z](Scalar log_value) {
        return log_value == -std::numeric_limits<Scalar>::infinity() ? Scalar(0)
                                                                     : std::exp(log_value - z);
    };
    out.unary.resize(n, y);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < y; ++a) out.unary(i, a) = prob(alpha(i, a) + beta(i, a));
    }
    out.transitions = Mat::Zero(y + 2, y + 2);
    for (Eigen::Index b = 0; b < y; ++b) {
        out.transitions(start, b) = out.unary(0, b);
        out.transitions(b, stop) = out.unary(n - 1, b);
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index a = 0; a < y; ++a) {
            for (Eigen::Index b = 0; b < y; ++b) {
                out.transitions(a, b) += prob(alpha(i - 1, a) + t(a, b) + s(i, b) + beta(i, b));
            }
        }
    }
    return out;
}

// Max-product decoding with backpointers; lowest tag id wins ties.
template <typename DS, typename DT>
std::vector<Eigen::Index> viterbi(const Eigen::MatrixBase<DS>& s, const Eigen::MatrixBase<DT>& t) {
    using Scalar = typename DS::Scalar;
    detail::check_shapes(s, t);
    const Eigen::Index n = s.rows();
    const Eigen::Index y = s.cols();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> delta(n, y);
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> back(n, y);
    for (Eigen::Index b = 0; b < y; ++b) delta(0, b) = t(start_state(y), b) + s(0, b);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index b = 0; b < y; ++b) {
            Eigen::Index arg = 0;
            Scalar best = delta(i - 1, 0) + t(0, b);
            for (Eigen::Index a = 1; a < y; ++a) {
                const Scalar v = delta(i - 1, a) + t(a, b);
                if (v > best) {
                    best = v;
                    arg = a;
                }
            }
            delta(i, b) = best + s(i, b);
            back(i, b) = arg;
        }
    }
    Eigen::Index last = 0;
    Scalar best = delta(n - 1, 0) + t(0, stop_state(y));
    for (Eigen::Index b = 1; b < y; ++b) {
        const Scalar v = delta(n - 1, b) + t(b, stop_state(y));
        if (v > best) {
            best = v;
            last = b;
        }
    }
    std::vector<Eigen::Index> path(static_cast<std::size_t>(n));
    path.back() = last;
    for (Eigen::Index i = n - 1; i > 0; --i) {
        path[static_cast<std::size_t>(i - 1)] = back(i, path[static_cast<std::size_t>(i)]);
    }
    return path;
}

}  // namespace hmtl::nertag
