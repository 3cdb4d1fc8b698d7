#include "hmtl/cli/gradient_suite.hpp"

#include "hmtl/autodiff/gradcheck.hpp"
#include "hmtl/autodiff/ops.hpp"
#include "hmtl/depparse/parser.hpp"
#include "hmtl/layers/biaffine.hpp"
#include "hmtl/layers/hlstm.hpp"
#include "hmtl/mtl/bridge.hpp"
#include "hmtl/mtl/model.hpp"
#include "hmtl/nertag/tagger.hpp"

namespace hmtl::cli {
namespace {

using ad::Index;
using ad::Matrix;
using ad::Tape;
using ad::Tensor;

constexpr double kPrimitiveTol = 1e-4;
constexpr double kLossTol = 1e-3;
// Network-level checks mix ReLU kinks with gradients near 1e-8, so no single
// step suits every entry.
const std::vector<double> kNetworkSteps = {1e-5, 1e-4, 1e-3};

Matrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    }
    return m;
}

// Values bounded away from zero so ReLU never sits on its kink.
Matrix off_zero(Index rows, Index cols, Rng& rng) {
    Matrix m = random_matrix(rows, cols, rng, 0.1, 1.0);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            if (rng.uniform() < 0.5) m(r, c) = -m(r, c);
        }
    }
    return m;
}

Tensor readout(Tape& tape, const Tensor& y, const Matrix& r) {
    return ad::sum(ad::hadamard(y, tape.constant(r.topLeftCorner(y.rows(), y.cols()))));
}

ingest::Sentence three_word_sentence() {
    ingest::Sentence s = ingest::make_sentence("gradcheck", {"Ali", "eve", "gitti"}, {"Noun", "Noun", "Verb"});
    s.gold_heads = std::vector<int>{3, 3, 0};
    s.gold_deprels = std::vector<std::string>{"nsubj", "obl", "root"};
    s.gold_ner = std::vector<std::string>{"B-PER", "O", "O"};
    return s;
}

mtl::MtlConfig tiny_config(mtl::Task task) {
    mtl::MtlConfig c;
    c.setting = mtl::Setting::Single;
    c.low_task = task;
    c.shared = {6, 3, 3, 0.0, 0.0};
    c.dep = {3, 2, 3, 0.0};
    c.ner = {3, 2, 0.0, false};
    c.seed = 11;
    return c;
}

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<GradCheckResult> out;
    auto add = [&](const std::string& name, double err, double tol) { out.push_back({name, err, tol}); };

    const Matrix R = random_matrix(8, 40, rng);
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(4, 5, rng);
    const Matrix c = random_matrix(3, 4, rng);
    const Matrix row = random_matrix(1, 4, rng);

    auto unary = [&](const std::string& name, auto op, const Matrix& x) {
        add(name, ad::check_gradients([&](Tape& t, const Tensor& v) { return readout(t, op(v), R); }, x),
            kPrimitiveTol);
    };

    add("matmul/lhs", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, ad::matmul(v, t.constant(b)), R); }, a), kPrimitiveTol);
    add("matmul/rhs", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, ad::matmul(t.constant(a), v), R); }, b), kPrimitiveTol);
    add("add", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, v + t.constant(c), R); }, a), kPrimitiveTol);
    add("subtract", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, t.constant(c) - v, R); }, a), kPrimitiveTol);
    add("hadamard", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, ad::hadamard(v, t.constant(c)), R); }, a), kPrimitiveTol);
    add("add_row/row", ad::check_gradients([&](Tape& t, const Tensor& v) {
            return readout(t, ad::add_row(t.constant(a), v), R); }, row), kPrimitiveTol);
    unary("affine", [](const Tensor& v) { return ad::affine(v, -1.7, 0.3); }, a);
    unary("scale", [](const Tensor& v) { return ad::scale(v, 2.5); }, a);
    unary("sigmoid", [](const Tensor& v) { return ad::sigmoid(v); }, a);
    unary("tanh", [](const Tensor& v) { return ad::tanh(v); }, a);
    unary("relu", [](const Tensor& v) { return ad::relu(v); }, off_zero(3, 4, rng));
    unary("softmax_rows", [](const Tensor& v) { return ad::softmax_rows(v); }, a);
    unary("log_softmax_rows", [](const Tensor& v) { return ad::log_softmax_rows(v); }, a);
    unary("log_sum_exp", [](const Tensor& v) { return ad::log_sum_exp(v); }, a);
    unary("sum", [](const Tensor& v) { return ad::sum(v); }, a);
    unary("mean", [](const Tensor& v) { return ad::mean(v); }, a);
    unary("slice_rows", [](const Tensor& v) { return ad::slice_rows(v, 1, 2); }, a);
    unary("slice_cols", [](const Tensor& v) { return ad::slice_cols(v, 1, 2); }, a);
    unary("concat_cols", [&](const Tensor& v) {
        return ad::concat_cols({v, v.tape().constant(c), v}); }, a);
    unary("concat_rows", [&](const Tensor& v) {
        return ad::concat_rows({v, v.tape().constant(c), v}); }, a);
    unary("gather", [](const Tensor& v) {
        return ad::gather(v, {{0, 1}, {2, 3}, {0, 1}, {1, 0}}, 2, 2); }, a);
    unary("embedding_lookup", [](const Tensor& v) {
        return ad::embedding_lookup(v, {2, 0, 2, 1}); }, a);
    unary("dropout", [](const Tensor& v) {
        Rng fixed(99);
        return ad::dropout(v, 0.3, ad::Mode::Train, fixed); }, a);
    {
        const Matrix mask = (Matrix(3, 4) << 1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 0).finished();
        unary("cross_entropy_rows", [&](const Tensor& v) {
            return ad::cross_entropy_rows(v, {1, 3, 0}, &mask); }, a);
    }
    {
        const Matrix dep = random_matrix(3, 4, rng);
        const Matrix head = random_matrix(2, 3, rng);
        const Matrix w = random_matrix(4, 2 * 3, rng);
        add("bilinear/dep", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, ad::bilinear(v, t.constant(head), t.constant(w), 2), R); }, dep),
            kPrimitiveTol);
        add("bilinear/head", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, ad::bilinear(t.constant(dep), v, t.constant(w), 2), R); }, head),
            kPrimitiveTol);
        add("bilinear/weights", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, ad::bilinear(t.constant(dep), t.constant(head), v, 2), R); }, w),
            kPrimitiveTol);
    }
    {
        Rng init(seed + 1);
        layers::LstmCell cell("lstm", 4, 3, init);
        const Matrix x = random_matrix(5, 4, rng);
        add("lstm/input", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, cell.run(t, v, true), R); }, x), kPrimitiveTol);
        add("lstm/params", ad::check_parameter_gradients([&](Tape& t) {
                return readout(t, cell.run(t, t.constant(x), false), R); }, cell.parameters(), kNetworkSteps),
            kPrimitiveTol);
    }
    {
        Rng init(seed + 2);
        layers::HighwayLstmStack stack("hlstm", 4, 3, 2, 0.0, init);
        const Matrix x = random_matrix(4, 4, rng);
        add("hlstm/params", ad::check_parameter_gradients([&](Tape& t) {
                Rng unused(0);
                return readout(t, stack.forward(t, t.constant(x), ad::Mode::Eval, unused), R); },
                stack.parameters(), kNetworkSteps), kPrimitiveTol);
    }
    {
        Rng init(seed + 3);
        layers::BiaffineScorer scorer("biaffine", 4, 3, 2, init);
        scorer.weights().value = random_matrix(4, 8, rng);
        const Matrix h = off_zero(3, 4, rng);
        add("biaffine/params", ad::check_parameter_gradients([&](Tape& t) {
                Tensor s = t.constant(h);
                return readout(t, scorer.score_all(t, s, s), R); }, scorer.parameters(), kNetworkSteps),
            kPrimitiveTol);
    }
    {
        const Matrix s = random_matrix(4, 3, rng);
        const Matrix tr = random_matrix(5, 5, rng);
        const std::vector<Index> gold = {0, 2, 2, 1};
        add("crf_loss/emissions", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return nertag::crf_loss(v, t.constant(tr), gold); }, s), kPrimitiveTol);
        add("crf_loss/transitions", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return nertag::crf_loss(t.constant(s), v, gold); }, tr), kPrimitiveTol);
    }
    {
        const Matrix scores = random_matrix(3, 4, rng);
        const Matrix table = random_matrix(4, 5, rng);
        add("bridge_soft/scores", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, mtl::bridge_soft(v, t.constant(table)), R); }, scores), kPrimitiveTol);
        add("bridge_soft/table", ad::check_gradients([&](Tape& t, const Tensor& v) {
                return readout(t, mtl::bridge_soft(t.constant(scores), v), R); }, table), kPrimitiveTol);
    }

    const ingest::Sentence sentence = three_word_sentence();
    const Matrix bert = random_matrix(3, 6, rng);
    for (mtl::Task task : {mtl::Task::Dep, mtl::Task::Ner}) {
        std::vector<ingest::Sentence> corpus{sentence};
        auto vocabs = mtl::build_vocabularies(&corpus, &corpus);
        mtl::Model model(tiny_config(task), vocabs);
        if (task == mtl::Task::Dep) {
            // Non-zero biaffine weights so every parameter carries gradient.
            model.dep().edge_scorer().weights().value = random_matrix(4, 4, rng);
            model.dep().label_scorer().weights().value =
                random_matrix(4, model.dep().label_scorer().weights().value.cols(), rng);
        } else {
            auto& tr = model.ner().transitions().value;
            tr = random_matrix(tr.rows(), tr.cols(), rng);
        }
        const double err = ad::check_parameter_gradients([&](Tape& t) {
            Rng unused(0);
            return model.loss(t, sentence, bert, task, ad::Mode::Eval, unused);
        }, model.parameters(), kNetworkSteps);
        add(task == mtl::Task::Dep ? "dep_loss/end_to_end" : "ner_loss/end_to_end", err, kLossTol);
    }
    return out;
}

}  // namespace hmtl::cli
