#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "hmtl/autodiff/gradcheck.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/mtl/bridge.hpp"
#include "hmtl/mtl/checkpoint.hpp"
#include "hmtl/mtl/optimizer.hpp"
#include "oracles.hpp"

using namespace hmtl;
using namespace hmtl::mtl;
using ad::Tape;

namespace {

const std::vector<Setting> kSettings = {Setting::Single, Setting::Flat, Setting::HierPredHard,
                                        Setting::HierPredSoft, Setting::HierRepr};

bool same_values(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
    }
    return true;
}

std::vector<Matrix> values_of(const std::vector<ad::Parameter*>& params) {
    std::vector<Matrix> out;
    for (auto* p : params) out.push_back(p->value);
    return out;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hmtl_test_" + name)).string();
}

CheckpointMeta meta_for(const Model& model) {
    const auto& s = fixture::synthetic();
    CheckpointMeta meta;
    meta.config = model.config();
    meta.vocabs = model.vocabs();
    meta.subwords = s.vocab.tokens();
    meta.lowercase = true;
    meta.provider = {"hash", 7, 16, ""};
    return meta;
}

}  // namespace

TEST(Bridge, SoftWeightsSumToOne) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Index labels = 1 + Index(rng.below(8));
        Tape tape;
        const Matrix scores = oracle::random_matrix(5, labels, rng, -20.0, 20.0);
        // With an identity table each output row is the weight vector itself.
        const Matrix w = bridge_soft(tape.constant(scores), tape.constant(Matrix::Identity(labels, labels))).value();
        for (Index i = 0; i < w.rows(); ++i) EXPECT_NEAR(w.row(i).sum(), 1.0, 1e-6);
        EXPECT_GE(w.minCoeff(), 0.0);
    }
}

TEST(Bridge, SoftApproachesHardAtLargeMargin) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Index labels = 2 + Index(rng.below(6));
        Matrix scores = oracle::random_matrix(4, labels, rng);
        for (Index i = 0; i < scores.rows(); ++i) scores(i, Index(rng.below(std::size_t(labels)))) += 50.0;
        const Matrix table = oracle::random_matrix(labels, 6, rng);
        Tape tape;
        const Matrix soft = bridge_soft(tape.constant(scores), tape.constant(table)).value();
        const Matrix hard = bridge_hard(scores, tape.constant(table)).value();
        EXPECT_LT((soft - hard).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Bridge, HardPicksTableRowsWithLowestIdOnTies) {
    Rng rng(3);
    const Matrix table = oracle::random_matrix(4, 3, rng);
    Tape tape;
    const Matrix tied = bridge_hard(Matrix::Zero(2, 4), tape.constant(table)).value();
    EXPECT_EQ(tied.row(0), table.row(0));
    EXPECT_EQ(tied.row(1), table.row(0));
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix scores = oracle::random_matrix(3, 4, rng);
        const Matrix out = bridge_hard(scores, tape.constant(table)).value();
        for (Index i = 0; i < out.rows(); ++i) {
            Index best;
            scores.row(i).maxCoeff(&best);
            EXPECT_EQ(out.row(i), table.row(best));
        }
    }
}

TEST(Bridge, HardGradientReachesOnlyTheTable) {
    Rng rng(4);
    ad::Parameter table("table", oracle::random_matrix(3, 2, rng));
    ad::Parameter scores("scores", oracle::random_matrix(2, 3, rng));
    Tape tape;
    Tensor s = tape.param(scores);
    tape.backward(ad::sum(bridge_hard(s.value(), tape.param(table))));
    EXPECT_GT(table.grad.cwiseAbs().sum(), 0.0);
    EXPECT_TRUE(scores.grad.size() == 0 || scores.grad.isZero(0.0));
}

TEST(Bridge, SoftUniformIsMeanAndStaysInHull) {
    Rng rng(5);
    const Matrix table = oracle::random_matrix(5, 3, rng);
    Tape tape;
    const Matrix mean = bridge_soft(tape.constant(Matrix::Constant(2, 5, 0.3)), tape.constant(table)).value();
    for (Index i = 0; i < 2; ++i) EXPECT_LT((mean.row(i) - table.colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix out =
            bridge_soft(tape.constant(oracle::random_matrix(4, 5, rng, -5.0, 5.0)), tape.constant(table)).value();
        for (Index i = 0; i < out.rows(); ++i) {
            for (Index c = 0; c < out.cols(); ++c) {
                EXPECT_GE(out(i, c), table.col(c).minCoeff() - 1e-12);
                EXPECT_LE(out(i, c), table.col(c).maxCoeff() + 1e-12);
            }
        }
    }
}

TEST(Bridge, SoftGradientsFlowIntoBoth) {
    Rng rng(6);
    const Matrix table = oracle::random_matrix(4, 3, rng);
    const Matrix scores = oracle::random_matrix(2, 4, rng);
    const Matrix r = oracle::random_matrix(2, 3, rng);
    EXPECT_LT(ad::check_gradients(
                  [&](Tape& t, const Tensor& v) {
                      return ad::sum(ad::hadamard(bridge_soft(v, t.constant(table)), t.constant(r)));
                  },
                  scores),
              1e-4);
    EXPECT_LT(ad::check_gradients(
                  [&](Tape& t, const Tensor& v) {
                      return ad::sum(ad::hadamard(bridge_soft(t.constant(scores), v), t.constant(r)));
                  },
                  table),
              1e-4);
}

TEST(Bridge, ReprIsIdentityWithWidthCheck) {
    Rng rng(7);
    Tape tape;
    const Matrix h = oracle::random_matrix(3, 8, rng);
    EXPECT_EQ(bridge_repr(tape.constant(h), 8).value(), h);
    EXPECT_THROW(bridge_repr(tape.constant(h), 6), ContractError);
}

TEST(Wiring, InputWidthsPerSetting) {
    const auto vocabs = fixture::synthetic().vocabularies();
    for (Task low : {Task::Dep, Task::Ner}) {
        for (Setting setting : kSettings) {
            const MtlConfig c = fixture::tiny(setting, low);
            Model model(c, vocabs);
            const Index base = c.shared.d_bert + c.shared.d_casing + c.shared.d_pos;
            EXPECT_EQ(model.shared().output_dim(), base);
            EXPECT_TRUE(model.has(low));
            EXPECT_EQ(model.has(other(low)), setting != Setting::Single);
            EXPECT_EQ(model.input_dim(low), base);
            const Index low_hidden = low == Task::Dep ? c.dep.hidden : c.ner.hidden;
            const Index low_embed = low == Task::Dep ? c.dep_embed : c.ner_embed;
            Index high = base;
            if (setting == Setting::HierRepr) high += 2 * low_hidden;
            if (setting == Setting::HierPredHard || setting == Setting::HierPredSoft) high += low_embed;
            EXPECT_EQ(model.input_dim(other(low)), high) << to_string(setting) << " " << to_string(low);
            EXPECT_EQ(model.bridge_table() != nullptr,
                      setting == Setting::HierPredHard || setting == Setting::HierPredSoft);
        }
    }
}

TEST(Wiring, EverySettingRunsBothRoles) {
    const auto& s = fixture::synthetic();
    const auto vocabs = s.vocabularies();
    const auto prepared = prepare_corpus(s.dep, 20, s.vocab, s.provider);
    const auto ner = prepare_corpus(s.ner, 20, s.vocab, s.provider);
    for (Task low : {Task::Dep, Task::Ner}) {
        for (Setting setting : kSettings) {
            Model model(fixture::tiny(setting, low), vocabs);
            Rng rng(1);
            // Zero-initialised biaffine weights pass no gradient downward yet.
            if (model.has(Task::Dep)) {
                for (auto* scorer : {&model.dep().edge_scorer(), &model.dep().label_scorer()}) {
                    auto& u = scorer->weights().value;
                    u = oracle::random_matrix(u.rows(), u.cols(), rng);
                }
            }
            for (Task t : model.config().tasks()) {
                const auto& corpus = t == Task::Dep ? prepared : ner;
                Tape tape;
                const Tensor loss = model.loss(tape, corpus.batches[0].sentences[0], corpus.bert[0][0], t,
                                               ad::Mode::Train, rng);
                EXPECT_TRUE(std::isfinite(loss.item()));
                EXPECT_GE(loss.item(), 0.0);
                tape.backward(loss);
                // The low component always receives gradient from a hierarchical high-task loss.
                if (model.config().hierarchical() && t != low) {
                    auto low_params = model.task_parameters(low);
                    double g = 0.0;
                    for (auto* p : low_params) {
                        if (p->grad.size() == p->value.size()) g += p->grad.cwiseAbs().sum();
                    }
                    if (setting == Setting::HierPredHard) {
                        EXPECT_EQ(g, 0.0);
                    } else {
                        EXPECT_GT(g, 0.0) << to_string(setting) << " low " << to_string(low);
                    }
                }
                for (auto* p : model.parameters()) p->zero_grad();
            }
        }
    }
}

TEST(Config, ValidationAndJsonRoundTrip) {
    MtlConfig c = fixture::tiny(Setting::HierRepr, Task::Ner);
    c.lr = 0.0125;
    c.seed = 99;
    const MtlConfig back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_NO_THROW(check_compatible(c, back));
    MtlConfig bad = c;
    bad.lr = 0.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    bad = c;
    bad.dep.lstm_dropout = 1.0;
    EXPECT_THROW(bad.validate(), ConfigError);
    MtlConfig wider = c;
    wider.ner.hidden += 1;
    EXPECT_THROW(check_compatible(c, wider), IncompatibleError);
    MtlConfig swapped = c;
    swapped.low_task = Task::Dep;
    EXPECT_THROW(check_compatible(c, swapped), IncompatibleError);
    EXPECT_THROW(parse_setting("nested"), ConfigError);
    for (Setting s : kSettings) EXPECT_EQ(parse_setting(to_string(s)), s);
}

TEST(Config, DefaultsFollowHyperparameterTable) {
    const MtlConfig c;
    EXPECT_EQ(c.warmup_epochs, 5);
    EXPECT_EQ(c.steps_per_epoch, 100);
    EXPECT_EQ(c.word_budget, 500u);
    EXPECT_EQ(c.lr, 0.004);
    EXPECT_EQ(c.weight_decay, 0.001);
    EXPECT_EQ(c.lr_decay, 0.1286);
    EXPECT_EQ(c.lr_patience, 3);
    EXPECT_EQ(c.early_stop, 10);
    EXPECT_EQ(c.dep_embed, 128);
    EXPECT_EQ(c.ner_embed, 128);
    EXPECT_EQ(c.dep.hidden, 400);
    EXPECT_EQ(c.dep.layers, 3);
    EXPECT_EQ(c.shared.d_bert, 768);
}

TEST(Optimizer, FirstAdamStepMovesByLearningRate) {
    ad::Parameter p("p", Matrix::Constant(2, 2, 1.0));
    p.grad = Matrix(2, 2);
    p.grad << 3.0, -0.5, 1e-3, -7.0;
    AdamW opt(0.1, 0.0);
    opt.step({&p});
    // Bias-corrected moments make the first update lr * sign(g).
    Matrix expected(2, 2);
    expected << 0.9, 1.1, 0.9, 1.1;
    EXPECT_LT((p.value - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Optimizer, DecoupledWeightDecayAndPerParameterState) {
    ad::Parameter a("a", Matrix::Constant(1, 1, 2.0));
    ad::Parameter b("b", Matrix::Constant(1, 1, 2.0));
    AdamW opt(0.5, 0.1);
    a.grad = Matrix::Zero(1, 1);
    opt.step({&a});
    EXPECT_DOUBLE_EQ(a.value(0, 0), 2.0 - 0.5 * 0.1 * 2.0);
    // A parameter skipped so far starts its own step count at its first update.
    a.grad = Matrix::Constant(1, 1, 1.0);
    b.grad = Matrix::Constant(1, 1, 1.0);
    opt.step({&a, &b});
    EXPECT_NEAR(b.value(0, 0), 2.0 - 0.5 * (1.0 + 0.1 * 2.0), 1e-6);
    const double m = 0.1 / (1.0 - 0.81);
    const double v = 0.001 / (1.0 - 0.999 * 0.999);
    EXPECT_NEAR(a.value(0, 0), 1.9 - 0.5 * (m / std::sqrt(v) + 0.1 * 1.9), 1e-6);
}

TEST(Optimizer, ClipGradNorm) {
    ad::Parameter a("a", Matrix::Zero(1, 2));
    ad::Parameter b("b", Matrix::Zero(1, 1));
    a.grad = Matrix(1, 2);
    a.grad << 3.0, 0.0;
    b.grad = Matrix::Constant(1, 1, 4.0);
    EXPECT_DOUBLE_EQ(clip_grad_norm({&a, &b}, 10.0), 5.0);
    EXPECT_EQ(a.grad(0, 0), 3.0);
    EXPECT_DOUBLE_EQ(clip_grad_norm({&a, &b}, 1.0), 5.0);
    EXPECT_NEAR(std::hypot(a.grad(0, 0), b.grad(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(a.grad(0, 0) / b.grad(0, 0), 0.75, 1e-12);
}

TEST(Trainer, SingleSettingNeverAllocatesTheOtherTask) {
    const auto& s = fixture::synthetic();
    MtlConfig c = fixture::tiny(Setting::Single, Task::Dep);
    c.max_epochs = 1;
    Model model(c, s.vocabularies());
    EXPECT_FALSE(model.has(Task::Ner));
    for (auto* p : model.parameters()) EXPECT_EQ(p->name.rfind("ner.", 0), std::string::npos) << p->name;
    TrainData data = s.data();
    data.ner_train.clear();
    const auto result = train(model, data, s.vocab, s.provider);
    for (const auto& r : result.log) {
        EXPECT_EQ(r.task, Task::Dep);
        EXPECT_FALSE(r.f1.has_value());
    }
    EXPECT_THROW(model.predict_ner(s.ner[0], Matrix::Zero(3, 16)), UsageError);
}

TEST(Trainer, MissingCorpusIsConfigError) {
    const auto& s = fixture::synthetic();
    Model model(fixture::tiny(Setting::Flat, Task::Dep), s.vocabularies());
    TrainData data = s.data();
    data.ner_train.clear();
    EXPECT_THROW(train(model, data, s.vocab, s.provider), ConfigError);
}

TEST(Trainer, WarmupFreezesTheHighTask) {
    const auto& s = fixture::synthetic();
    for (Task low : {Task::Dep, Task::Ner}) {
        MtlConfig c = fixture::tiny(Setting::HierPredSoft, low);
        c.warmup_epochs = 5;
        c.max_epochs = 6;
        c.early_stop = 100;
        Model model(c, s.vocabularies());
        std::vector<std::vector<Matrix>> high, low_values;
        TrainOptions options;
        options.on_epoch_start = [&](int, Model& m) {
            high.push_back(values_of(m.task_parameters(other(low))));
            low_values.push_back(values_of(m.task_parameters(low)));
        };
        const auto result = train(model, s.data(), s.vocab, s.provider, options);
        ASSERT_EQ(high.size(), 6u);
        for (int e = 1; e <= 5; ++e) {
            EXPECT_TRUE(same_values(high[0], high[std::size_t(e)])) << "epoch " << e;
            EXPECT_FALSE(same_values(low_values[std::size_t(e - 1)], low_values[std::size_t(e)]));
        }
        EXPECT_FALSE(same_values(high[5], values_of(model.task_parameters(other(low)))));
        for (const auto& r : result.log) {
            if (r.epoch <= 5) EXPECT_EQ(r.task, low);
        }
    }
}

TEST(Trainer, EarlyStopMatchesReplayedPatience) {
    const auto& s = fixture::synthetic();
    MtlConfig c = fixture::tiny(Setting::Flat, Task::Dep);
    c.early_stop = 1;
    c.max_epochs = 40;
    Model model(c, s.vocabularies());
    const auto result = train(model, s.data(), s.vocab, s.provider);
    ASSERT_TRUE(result.early_stopped);

    // Replay the per-task patience counters from the log.
    std::map<Task, double> best;
    std::map<Task, int> bad;
    int stop_epoch = 0;
    std::optional<Task> stopper;
    for (const auto& r : result.log) {
        const double metric = r.task == Task::Dep ? *r.las : *r.f1;
        if (!best.count(r.task) || metric > best[r.task]) {
            best[r.task] = metric;
            bad[r.task] = 0;
            EXPECT_EQ(result.best_epoch.at(r.task) >= r.epoch, true);
        } else if (++bad[r.task] > c.early_stop && !stopper) {
            stopper = r.task;
            stop_epoch = r.epoch;
        }
    }
    EXPECT_EQ(stop_epoch, result.epochs);
    EXPECT_EQ(stopper, result.stopped_by);
    // Both tasks stop together: each has a record for every epoch up to the stop.
    for (Task t : {Task::Dep, Task::Ner}) {
        int n = 0;
        for (const auto& r : result.log) n += r.task == t;
        EXPECT_EQ(n, result.epochs);
        EXPECT_EQ(result.best_metric.at(t), best[t]);
    }
}

TEST(Trainer, PlateauDecayIsLogged) {
    const auto& s = fixture::synthetic();
    MtlConfig c = fixture::tiny(Setting::Single, Task::Ner);
    c.lr_patience = 0;
    c.early_stop = 3;
    c.max_epochs = 30;
    Model model(c, s.vocabularies());
    const auto result = train(model, s.data(), s.vocab, s.provider);
    double best = -1.0;
    double lr = c.lr;
    for (const auto& r : result.log) {
        EXPECT_DOUBLE_EQ(r.lr, lr);
        if (*r.f1 > best) {
            best = *r.f1;
        } else {
            lr *= c.lr_decay;
        }
    }
}

TEST(Trainer, FixedSeedIsBitReproducible) {
    const auto& s = fixture::synthetic();
    auto run = [&](std::uint64_t seed) {
        MtlConfig c = fixture::tiny(Setting::HierRepr, Task::Dep);
        c.seed = seed;
        c.shared.bert_dropout = 0.3;
        c.dep.lstm_dropout = 0.3;
        Model model(c, s.vocabularies());
        std::ostringstream log;
        TrainOptions options;
        options.metrics_log = &log;
        train(model, s.data(), s.vocab, s.provider, options);
        return std::make_pair(log.str(), snapshot(model));
    };
    const auto a = run(5);
    const auto b = run(5);
    EXPECT_FALSE(a.first.empty());
    EXPECT_EQ(a.first, b.first);
    EXPECT_TRUE(same_values(a.second, b.second));
    EXPECT_FALSE(same_values(a.second, run(6).second));
}

TEST(Checkpoint, RoundTripPredictsIdentically) {
    const auto& s = fixture::synthetic();
    MtlConfig c = fixture::tiny(Setting::HierPredHard, Task::Ner);
    c.max_epochs = 1;
    Model model(c, s.vocabularies());
    train(model, s.data(), s.vocab, s.provider);
    const std::string path = temp_path("roundtrip.ckpt");
    save_checkpoint(path, model, meta_for(model));
    auto loaded = load_checkpoint(path, c);
    EXPECT_EQ(loaded.meta.subwords, s.vocab.tokens());
    EXPECT_TRUE(loaded.meta.lowercase);
    EXPECT_TRUE(same_values(snapshot(model), snapshot(*loaded.model)));
    const auto dep = prepare_corpus(s.dep, 20, s.vocab, s.provider);
    for (std::size_t k = 0; k < dep.batches.size(); ++k) {
        for (std::size_t b = 0; b < dep.batches[k].size(); ++b) {
            const auto& sent = dep.batches[k].sentences[b];
            const auto& bert = dep.bert[k][b];
            const auto x = model.predict_dep(sent, bert);
            const auto y = loaded.model->predict_dep(sent, bert);
            EXPECT_EQ(x.heads, y.heads);
            EXPECT_EQ(x.labels, y.labels);
            EXPECT_EQ(model.predict_ner(sent, bert), loaded.model->predict_ner(sent, bert));
        }
    }
    std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptFilesAreFormatErrors) {
    const auto& s = fixture::synthetic();
    MtlConfig c = fixture::tiny(Setting::Single, Task::Dep);
    Model model(c, s.vocabularies());
    const std::string path = temp_path("corrupt.ckpt");
    save_checkpoint(path, model, meta_for(model));
    const auto size = std::filesystem::file_size(path);
    std::string bytes(size, '\0');
    {
        std::ifstream in(path, std::ios::binary);
        in.read(bytes.data(), std::streamsize(size));
    }
    auto write = [&](const std::string& content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), std::streamsize(content.size()));
    };
    for (std::size_t cut : {std::size_t(0), std::size_t(5), std::size_t(20), std::size_t(size - 1)}) {
        write(bytes.substr(0, cut));
        EXPECT_THROW(load_checkpoint(path), FormatError) << cut;
    }
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    write(bad_magic);
    EXPECT_THROW(load_checkpoint(path), FormatError);
    std::string bad_version = bytes;
    bad_version[8] = 9;
    write(bad_version);
    EXPECT_THROW(load_checkpoint(path), FormatError);
    write(bytes + "extra");
    EXPECT_THROW(load_checkpoint(path), FormatError);
    EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt")), Error);
    std::filesystem::remove(path);
}

TEST(Checkpoint, DepOnlyIntoMultiTaskIsIncompatible) {
    const auto& s = fixture::synthetic();
    const MtlConfig dep_only = fixture::tiny(Setting::Single, Task::Dep);
    Model model(dep_only, s.vocabularies());
    const std::string path = temp_path("deponly.ckpt");
    save_checkpoint(path, model, meta_for(model));
    EXPECT_THROW(load_checkpoint(path, fixture::tiny(Setting::Flat, Task::Dep)), IncompatibleError);
    EXPECT_NO_THROW(load_checkpoint(path, dep_only));
    std::filesystem::remove(path);
}
