#include "hmtl/autodiff/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hmtl/errors.hpp"

namespace hmtl::ad {
namespace {

std::string shape_str(const Tensor& t) {
    return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shapes " + shape_str(a) + " and " +
                             shape_str(b) + " differ");
    }
}

double stable_lse(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    const double m = row.maxCoeff();
    if (m == -std::numeric_limits<double>::infinity()) {
        return m;
    }
    return m + std::log((row.array() - m).exp().sum());
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions of " + shape_str(a) + " and " +
                             shape_str(b) + " disagree");
    }
    Tape& tape = a.tape();
    return tape.record(a.value() * b.value(), {a, b}, [a, b](const Matrix& g, Tape& t) {
        if (Matrix* ga = t.grad_sink(a)) {
            ga->noalias() += g * b.value().transpose();
        }
        if (Matrix* gb = t.grad_sink(b)) {
            gb->noalias() += a.value().transpose() * g;
        }
    });
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    return a.tape().record(a.value() + b.value(), {a, b}, [a, b](const Matrix& g, Tape& t) {
        if (Matrix* ga = t.grad_sink(a)) *ga += g;
        if (Matrix* gb = t.grad_sink(b)) *gb += g;
    });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    return a.tape().record(a.value() - b.value(), {a, b}, [a, b](const Matrix& g, Tape& t) {
        if (Matrix* ga = t.grad_sink(a)) *ga += g;
        if (Matrix* gb = t.grad_sink(b)) *gb -= g;
    });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a.value().cwiseProduct(b.value());
    return a.tape().record(std::move(out), {a, b}, [a, b](const Matrix& g, Tape& t) {
        if (Matrix* ga = t.grad_sink(a)) *ga += g.cwiseProduct(b.value());
        if (Matrix* gb = t.grad_sink(b)) *gb += g.cwiseProduct(a.value());
    });
}

Tensor affine(const Tensor& x, double alpha, double beta) {
    Matrix out = (alpha * x.value().array() + beta).matrix();
    return x.tape().record(std::move(out), {x}, [x, alpha](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) *gx += alpha * g;
    });
}

Tensor scale(const Tensor& x, double alpha) { return affine(x, alpha, 0.0); }

Tensor add_row(const Tensor& x, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != x.cols()) {
        throw DimensionError("add_row: cannot broadcast " + shape_str(row) + " over " +
                             shape_str(x));
    }
    Matrix out = x.value().rowwise() + row.value().row(0);
    return x.tape().record(std::move(out), {x, row}, [x, row](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) *gx += g;
        if (Matrix* gr = t.grad_sink(row)) *gr += g.colwise().sum();
    });
}

Tensor sigmoid(const Tensor& x) {
    Matrix out = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
    Tape& tape = x.tape();
    const int self = tape.next_id();
    return tape.record(std::move(out), {x}, [x, self](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            const auto s = t.value(self).array();
            *gx += (g.array() * s * (1.0 - s)).matrix();
        }
    });
}

Tensor tanh(const Tensor& x) {
    Matrix out = x.value().array().tanh().matrix();
    Tape& tape = x.tape();
    const int self = tape.next_id();
    return tape.record(std::move(out), {x}, [x, self](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            const auto s = t.value(self).array();
            *gx += (g.array() * (1.0 - s * s)).matrix();
        }
    });
}

Tensor relu(const Tensor& x) {
    Matrix out = x.value().cwiseMax(0.0);
    return x.tape().record(std::move(out), {x}, [x](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            *gx += (x.value().array() > 0.0).select(g, 0.0).matrix();
        }
    });
}

Tensor softmax_rows(const Tensor& x) {
    Matrix out(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        const double m = x.value().row(r).maxCoeff();
        Eigen::RowVectorXd e = (x.value().row(r).array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    Tape& tape = x.tape();
    const int self = tape.next_id();
    return tape.record(std::move(out), {x}, [x, self](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            const Matrix& s = t.value(self);
            for (Index r = 0; r < s.rows(); ++r) {
                const double dot = g.row(r).dot(s.row(r));
                gx->row(r).array() += s.row(r).array() * (g.row(r).array() - dot);
            }
        }
    });
}

Tensor log_softmax_rows(const Tensor& x) {
    Matrix out(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        out.row(r) = x.value().row(r).array() - stable_lse(x.value().row(r));
    }
    Tape& tape = x.tape();
    const int self = tape.next_id();
    return tape.record(std::move(out), {x}, [x, self](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            const Matrix& ls = t.value(self);
            for (Index r = 0; r < ls.rows(); ++r) {
                const double total = g.row(r).sum();
                gx->row(r).array() += g.row(r).array() - ls.row(r).array().exp() * total;
            }
        }
    });
}

Tensor log_sum_exp(const Tensor& x) {
    if (x.value().size() == 0) {
        throw ContractError("log_sum_exp of an empty tensor");
    }
    const double m = x.value().maxCoeff();
    double value = m;
    if (m != -std::numeric_limits<double>::infinity()) {
        value = m + std::log((x.value().array() - m).exp().sum());
    }
    Matrix out(1, 1);
    out(0, 0) = value;
    return x.tape().record(std::move(out), {x}, [x, value](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            *gx += (g(0, 0) * (x.value().array() - value).exp()).matrix();
        }
    });
}

Tensor sum(const Tensor& x) {
    Matrix out(1, 1);
    out(0, 0) = x.value().sum();
    return x.tape().record(std::move(out), {x}, [x](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) gx->array() += g(0, 0);
    });
}

Tensor mean(const Tensor& x) {
    if (x.value().size() == 0) {
        throw ContractError("mean of an empty tensor");
    }
    return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Tensor cross_entropy_rows(const Tensor& logits, const std::vector<Index>& targets,
                          const Matrix* mask) {
    const Matrix& z = logits.value();
    if (static_cast<Index>(targets.size()) != z.rows()) {
        throw DimensionError("cross_entropy_rows: " + std::to_string(targets.size()) +
                             " targets for " + shape_str(logits) + " logits");
    }
    if (mask != nullptr && (mask->rows() != z.rows() || mask->cols() != z.cols())) {
        throw DimensionError("cross_entropy_rows: mask shape differs from logits " +
                             shape_str(logits));
    }
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    // Masked logits and row probabilities, kept for the backward rule.
    Matrix probs = Matrix::Zero(z.rows(), z.cols());
    double loss = 0.0;
    for (Index r = 0; r < z.rows(); ++r) {
        const Index target = targets[static_cast<std::size_t>(r)];
        if (target < 0) {
            continue;
        }
        if (target >= z.cols() || (mask != nullptr && (*mask)(r, target) == 0.0)) {
            throw ContractError("cross_entropy_rows: target " + std::to_string(target) +
                                " of row " + std::to_string(r) + " is out of range or masked");
        }
        Eigen::RowVectorXd row = z.row(r);
        if (mask != nullptr) {
            for (Index c = 0; c < z.cols(); ++c) {
                if ((*mask)(r, c) == 0.0) row(c) = kNegInf;
            }
        }
        const double lse = stable_lse(row);
        loss += lse - row(target);
        probs.row(r) = (row.array() - lse).exp().matrix();
    }
    Matrix out(1, 1);
    out(0, 0) = loss;
    return logits.tape().record(
        std::move(out), {logits},
        [logits, targets, probs = std::move(probs)](const Matrix& g, Tape& t) {
            if (Matrix* gz = t.grad_sink(logits)) {
                for (Index r = 0; r < probs.rows(); ++r) {
                    const Index target = targets[static_cast<std::size_t>(r)];
                    if (target < 0) continue;
                    gz->row(r) += g(0, 0) * probs.row(r);
                    (*gz)(r, target) -= g(0, 0);
                }
            }
        });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw ContractError("concat_cols of zero tensors");
    }
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols: row counts " + shape_str(parts.front()) + " and " +
                                 shape_str(p) + " differ");
        }
        cols += p.cols();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const Tensor& p : parts) {
        out.middleCols(at, p.cols()) = p.value();
        at += p.cols();
    }
    return parts.front().tape().record(std::move(out), parts, [parts](const Matrix& g, Tape& t) {
        Index at = 0;
        for (const Tensor& p : parts) {
            if (Matrix* gp = t.grad_sink(p)) *gp += g.middleCols(at, p.cols());
            at += p.cols();
        }
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw ContractError("concat_rows of zero tensors");
    }
    const Index cols = parts.front().cols();
    Index rows = 0;
    for (const Tensor& p : parts) {
        if (p.cols() != cols) {
            throw DimensionError("concat_rows: column counts " + shape_str(parts.front()) +
                                 " and " + shape_str(p) + " differ");
        }
        rows += p.rows();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const Tensor& p : parts) {
        out.middleRows(at, p.rows()) = p.value();
        at += p.rows();
    }
    return parts.front().tape().record(std::move(out), parts, [parts](const Matrix& g, Tape& t) {
        Index at = 0;
        for (const Tensor& p : parts) {
            if (Matrix* gp = t.grad_sink(p)) *gp += g.middleRows(at, p.rows());
            at += p.rows();
        }
    });
}

Tensor slice_rows(const Tensor& x, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > x.rows()) {
        throw DimensionError("slice_rows [" + std::to_string(start) + ", +" +
                             std::to_string(count) + ") outside " + shape_str(x));
    }
    return x.tape().record(x.value().middleRows(start, count), {x},
                           [x, start, count](const Matrix& g, Tape& t) {
                               if (Matrix* gx = t.grad_sink(x)) gx->middleRows(start, count) += g;
                           });
}

Tensor slice_cols(const Tensor& x, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > x.cols()) {
        throw DimensionError("slice_cols [" + std::to_string(start) + ", +" +
                             std::to_string(count) + ") outside " + shape_str(x));
    }
    return x.tape().record(x.value().middleCols(start, count), {x},
                           [x, start, count](const Matrix& g, Tape& t) {
                               if (Matrix* gx = t.grad_sink(x)) gx->middleCols(start, count) += g;
                           });
}

Tensor gather(const Tensor& x, const std::vector<std::pair<Index, Index>>& coords, Index rows,
              Index cols) {
    if (static_cast<Index>(coords.size()) != rows * cols) {
        throw DimensionError("gather: " + std::to_string(coords.size()) + " coordinates for a " +
                             std::to_string(rows) + "x" + std::to_string(cols) + " output");
    }
    Matrix out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const auto [i, j] = coords[static_cast<std::size_t>(r * cols + c)];
            if (i < 0 || j < 0 || i >= x.rows() || j >= x.cols()) {
                throw DimensionError("gather: coordinate outside " + shape_str(x));
            }
            out(r, c) = x.value()(i, j);
        }
    }
    return x.tape().record(std::move(out), {x}, [x, coords, cols](const Matrix& g, Tape& t) {
        if (Matrix* gx = t.grad_sink(x)) {
            for (std::size_t k = 0; k < coords.size(); ++k) {
                const Index r = static_cast<Index>(k) / cols;
                const Index c = static_cast<Index>(k) % cols;
                (*gx)(coords[k].first, coords[k].second) += g(r, c);
            }
        }
    });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<Index>& ids) {
    Matrix out(static_cast<Index>(ids.size()), table.cols());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] < 0 || ids[k] >= table.rows()) {
            throw DimensionError("embedding_lookup: id " + std::to_string(ids[k]) +
                                 " outside table " + shape_str(table));
        }
        out.row(static_cast<Index>(k)) = table.value().row(ids[k]);
    }
    return table.tape().record(std::move(out), {table}, [table, ids](const Matrix& g, Tape& t) {
        if (Matrix* gt = t.grad_sink(table)) {
            for (std::size_t k = 0; k < ids.size(); ++k) {
                gt->row(ids[k]) += g.row(static_cast<Index>(k));
            }
        }
    });
}

Tensor stop_gradient(const Tensor& x) { return x.tape().constant(x.value()); }

Tensor bilinear(const Tensor& dep, const Tensor& head, const Tensor& weights, Index labels) {
    const Index a = dep.cols();
    const Index b = head.cols();
    if (labels < 1 || weights.rows() != a || weights.cols() != labels * b) {
        throw DimensionError("bilinear: weights " + shape_str(weights) + " do not fit dep " +
                             shape_str(dep) + ", head " + shape_str(head) + " and " +
                             std::to_string(labels) + " labels");
    }
    const Index md = dep.rows();
    const Index mh = head.rows();
    Matrix out(md, labels * mh);
    for (Index k = 0; k < labels; ++k) {
        out.middleCols(k * mh, mh).noalias() =
            dep.value() * weights.value().middleCols(k * b, b) * head.value().transpose();
    }
    return dep.tape().record(
        std::move(out), {dep, head, weights},
        [dep, head, weights, labels](const Matrix& g, Tape& t) {
            const Index b = head.cols();
            const Index mh = head.rows();
            Matrix* gd = t.grad_sink(dep);
            Matrix* gh = t.grad_sink(head);
            Matrix* gw = t.grad_sink(weights);
            for (Index k = 0; k < labels; ++k) {
                const auto gk = g.middleCols(k * mh, mh);
                const auto wk = weights.value().middleCols(k * b, b);
                if (gd) gd->noalias() += gk * head.value() * wk.transpose();
                if (gh) gh->noalias() += gk.transpose() * dep.value() * wk;
                if (gw) gw->middleCols(k * b, b).noalias() +=
                        dep.value().transpose() * gk * head.value();
            }
        });
}

Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ContractError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
    }
    if (mode == Mode::Eval || rate == 0.0) {
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(x.rows(), x.cols());
    for (Index c = 0; c < mask.cols(); ++c) {
        for (Index r = 0; r < mask.rows(); ++r) {
            mask(r, c) = rng.uniform() < rate ? 0.0 : keep_scale;
        }
    }
    Matrix out = x.value().cwiseProduct(mask);
    return x.tape().record(std::move(out), {x},
                           [x, mask = std::move(mask)](const Matrix& g, Tape& t) {
                               if (Matrix* gx = t.grad_sink(x)) *gx += g.cwiseProduct(mask);
                           });
}

}  // namespace hmtl::ad
