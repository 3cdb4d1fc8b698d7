#include <gtest/gtest.h>

#include "hmtl/autodiff/gradcheck.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/layers/biaffine.hpp"
#include "hmtl/layers/hlstm.hpp"
#include "hmtl/layers/linear.hpp"
#include "oracles.hpp"

using namespace hmtl;
using namespace hmtl::layers;

namespace {

void force_gates(HighwayLstmStack& stack, double bias) {
    for (int i = 0; i < stack.depth(); ++i) {
        stack.layer(i).gate.weight().value.setZero();
        stack.layer(i).gate.bias().value.setConstant(bias);
    }
}

Matrix run(HighwayLstmStack& stack, const Matrix& x) {
    Tape tape;
    Rng rng(0);
    return stack.forward(tape, tape.constant(x), ad::Mode::Eval, rng).value();
}

}  // namespace

TEST(Linear, GlorotBoundAndShapes) {
    Rng rng(1);
    const Matrix w = glorot(30, 10, rng);
    EXPECT_LE(w.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 40.0));
    Linear fc("fc", 4, 3, rng, Activation::Relu);
    Tape tape;
    const Matrix out = fc.forward(tape, tape.constant(oracle::random_matrix(5, 4, rng))).value();
    EXPECT_EQ(out.rows(), 5);
    EXPECT_EQ(out.cols(), 3);
    EXPECT_GE(out.minCoeff(), 0.0);
}

TEST(HighwayLstm, ClosedGateCarriesInputThroughRelu) {
    Rng init(2), rng(3);
    HighwayLstmStack stack("h", 6, 3, 3, 0.0, init);
    force_gates(stack, -1000.0);
    const Matrix x = oracle::random_matrix(4, 6, rng);
    const Matrix out = run(stack, x);
    EXPECT_EQ(out, x.cwiseMax(0.0));
    // Independent of the recurrent weights.
    for (auto* p : stack.parameters()) {
        if (p->name.find(".gate.") == std::string::npos) p->value.setRandom();
    }
    EXPECT_EQ(run(stack, x), out);
}

TEST(HighwayLstm, ClosedGateUsesLearnedCarryWhenWidthsDiffer) {
    Rng init(2), rng(3);
    HighwayLstmStack stack("h", 5, 3, 1, 0.0, init);
    ASSERT_TRUE(stack.layer(0).carry.has_value());
    force_gates(stack, -1000.0);
    const Matrix x = oracle::random_matrix(4, 5, rng);
    Tape tape;
    const Matrix carried = stack.layer(0).carry->forward(tape, tape.constant(x)).value();
    EXPECT_TRUE(run(stack, x).isApprox(carried.cwiseMax(0.0), 1e-14));
}

TEST(HighwayLstm, OpenGateIsPlainStackedBiLstm) {
    Rng init(4), rng(5);
    HighwayLstmStack stack("h", 5, 3, 2, 0.0, init);
    force_gates(stack, 1000.0);
    const Matrix x = oracle::random_matrix(6, 5, rng);
    Tape tape;
    Tensor h = tape.constant(x);
    for (int i = 0; i < stack.depth(); ++i) {
        auto& layer = stack.layer(i);
        h = ad::concat_cols({layer.forward.run(tape, h, false), layer.backward.run(tape, h, true)});
    }
    EXPECT_TRUE(run(stack, x).isApprox(h.value().cwiseMax(0.0), 1e-14));
}

TEST(HighwayLstm, GateStaysInsideTheUnitInterval) {
    Rng init(6), rng(7);
    HighwayLstmStack stack("h", 4, 2, 1, 0.0, init);
    Tape tape;
    const Matrix gate =
        ad::sigmoid(stack.layer(0).gate.forward(tape, tape.constant(oracle::random_matrix(5, 4, rng))))
            .value();
    EXPECT_GT(gate.minCoeff(), 0.0);
    EXPECT_LT(gate.maxCoeff(), 1.0);
}

TEST(HighwayLstm, OutputWidthAndLength) {
    Rng init(8), rng(9);
    HighwayLstmStack stack("h", 10, 400, 3, 0.3, init);
    for (Eigen::Index n : {1, 2, 5}) {
        const Matrix out = run(stack, oracle::random_matrix(n, 10, rng));
        EXPECT_EQ(out.rows(), n);
        EXPECT_EQ(out.cols(), 800);
    }
}

TEST(HighwayLstm, EmptySequenceIsContractError) {
    Rng init(1);
    HighwayLstmStack stack("h", 3, 2, 1, 0.0, init);
    EXPECT_THROW(run(stack, Matrix(0, 3)), ContractError);
}

TEST(HighwayLstm, ParameterGradients) {
    Rng init(10), rng(11);
    HighwayLstmStack stack("h", 4, 3, 3, 0.0, init);
    const Matrix x = oracle::random_matrix(4, 4, rng);
    const Matrix r = oracle::random_matrix(4, 6, rng);
    const double err = ad::check_parameter_gradients(
        [&](Tape& t) {
            Rng unused(0);
            return ad::sum(ad::hadamard(stack.forward(t, t.constant(x), ad::Mode::Eval, unused),
                                        t.constant(r)));
        },
        stack.parameters(), {1e-5, 1e-4, 1e-3});
    EXPECT_LT(err, 1e-3);
}

TEST(HighwayLstm, TrainingDropoutIsSeeded) {
    Rng init(12), data(13);
    HighwayLstmStack stack("h", 4, 3, 2, 0.5, init);
    const Matrix x = oracle::random_matrix(3, 4, data);
    auto train_run = [&](std::uint64_t seed) {
        Tape t;
        Rng rng(seed);
        return Matrix(stack.forward(t, t.constant(x), ad::Mode::Train, rng).value());
    };
    EXPECT_EQ(train_run(1), train_run(1));
    EXPECT_NE(train_run(1), train_run(2));
}

TEST(Biaffine, ZeroAndConstantWeights) {
    Rng rng(14);
    const Matrix vd = oracle::random_matrix(3, 4, rng);
    const Matrix vh = oracle::random_matrix(5, 4, rng);
    Tape tape;
    Matrix u = Matrix::Zero(5, 2 * 5);
    EXPECT_TRUE(biaffine_score(tape.constant(vd), tape.constant(vh), tape.constant(u), 2)
                    .value()
                    .isZero(0.0));
    u(4, 4) = 1.75;      // bias-bias cell of label 0
    u(4, 5 + 4) = -0.5;  // bias-bias cell of label 1
    const Matrix s = biaffine_score(tape.constant(vd), tape.constant(vh), tape.constant(u), 2).value();
    EXPECT_TRUE(s.leftCols(5).isApproxToConstant(1.75, 0.0));
    EXPECT_TRUE(s.rightCols(5).isApproxToConstant(-0.5, 0.0));
}

TEST(Biaffine, MatchesAugmentedDoubleLoop) {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix vd = oracle::random_matrix(3, 4, rng);
        const Matrix vh = oracle::random_matrix(2, 4, rng);
        const Matrix u = oracle::random_matrix(5, 3 * 5, rng);
        Matrix ad_(3, 5), ah(2, 5);
        ad_ << vd, Matrix::Ones(3, 1);
        ah << vh, Matrix::Ones(2, 1);
        Tape tape;
        const Matrix s = biaffine_score(tape.constant(vd), tape.constant(vh), tape.constant(u), 3).value();
        EXPECT_LT((s - oracle::bilinear(ad_, ah, u, 3)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Biaffine, BilinearOnceBiasCellsAreZero) {
    Rng rng(16);
    Matrix u = oracle::random_matrix(4, 4, rng);
    u.row(3).setZero();
    u.col(3).setZero();
    const Matrix v = oracle::random_matrix(1, 3, rng);
    const Matrix w = oracle::random_matrix(1, 3, rng);
    Tape tape;
    const double base = biaffine_score(tape.constant(v), tape.constant(w), tape.constant(u), 1).item();
    const double scaled =
        biaffine_score(tape.constant(-3.0 * v), tape.constant(w), tape.constant(u), 1).item();
    EXPECT_NEAR(scaled, -3.0 * base, 1e-12);
}

TEST(Biaffine, ScorerShapesAndGradients) {
    Rng init(17), rng(18);
    BiaffineScorer scorer("b", 4, 3, 2, init);
    EXPECT_TRUE(scorer.weights().value.isZero(0.0));
    EXPECT_EQ(scorer.weights().value.rows(), 4);
    EXPECT_EQ(scorer.weights().value.cols(), 8);
    scorer.weights().value = oracle::random_matrix(4, 8, rng);
    const Matrix h = oracle::random_matrix(3, 4, rng);
    const Matrix r = oracle::random_matrix(3, 6, rng);
    const double err = ad::check_parameter_gradients(
        [&](Tape& t) {
            Tensor s = t.constant(h);
            return ad::sum(ad::hadamard(scorer.score_all(t, s, s), t.constant(r)));
        },
        scorer.parameters(), {1e-5, 1e-4, 1e-3});
    EXPECT_LT(err, 1e-4);
}
