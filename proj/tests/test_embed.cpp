#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hmtl/embed/aggregate.hpp"
#include "hmtl/embed/embedding.hpp"
#include "hmtl/embed/provider.hpp"
#include "hmtl/embed/shared_layer.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/ingest/text.hpp"
#include "oracles.hpp"

using namespace hmtl;
using namespace hmtl::embed;
using ad::Matrix;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hmtl_test_" + name)).string();
}

SubtokenLayers random_layers(Eigen::Index n, Eigen::Index d, Rng& rng) {
    SubtokenLayers out;
    for (auto& m : out) m = oracle::random_matrix(n, d, rng);
    return out;
}

}  // namespace

TEST(Vocabulary, SpecialsAndLookup) {
    const auto v = Vocabulary::with_specials({"Noun", "Verb"}, true);
    EXPECT_EQ(v.size(), 4);
    EXPECT_EQ(v.pad_id(), 0);
    EXPECT_EQ(v.unk_id(), 1);
    EXPECT_EQ(v.id("Verb"), 3);
    EXPECT_EQ(v.id("Adj"), 1);
    const auto labels = Vocabulary::labels({"a", "b"});
    EXPECT_FALSE(labels.has_pad());
    EXPECT_THROW(labels.id("c"), VocabularyError);
    EXPECT_THROW(Vocabulary::labels({"a", "a"}), VocabularyError);
}

TEST(EmbeddingTable, InitWithinBoundAndPadRowZero) {
    Rng rng(3);
    for (Eigen::Index dim : {1, 7, 64}) {
        const auto vocab = Vocabulary::with_specials({"a", "b", "c", "d", "e"}, true);
        EmbeddingTable table("t", vocab, dim, rng);
        const double bound = std::sqrt(6.0 / double(vocab.size() + dim));
        EXPECT_DOUBLE_EQ(EmbeddingTable::init_bound(vocab.size(), dim), bound);
        EXPECT_LE(table.weights().value.cwiseAbs().maxCoeff(), bound);
        EXPECT_TRUE(table.weights().value.row(0).isZero(0.0));
    }
}

TEST(EmbeddingTable, PadRowGetsNoUpdate) {
    Rng rng(5);
    EmbeddingTable table("t", Vocabulary::with_specials({"a"}, false), 3, rng);
    table.weights().zero_grad();
    ad::Tape tape;
    tape.backward(ad::sum(table.lookup(tape, {0, 1, 0})));
    EXPECT_TRUE(table.weights().grad.row(0).isZero(0.0));
    EXPECT_EQ(table.weights().grad.row(1), Matrix::Ones(1, 3));
}

TEST(Aggregate, IdentityAndMean) {
    SubtokenLayers same;
    for (auto& m : same) m = Matrix::Constant(1, 2, 0.25);
    const std::vector<ingest::SubtokenSpan> one = {{0, 1}};
    EXPECT_EQ(aggregate_subwords(same, one), Matrix::Constant(1, 2, 0.25));

    SubtokenLayers two;
    for (auto& m : two) {
        m = Matrix(2, 2);
        m << 1, 0, 0, 1;
    }
    const std::vector<ingest::SubtokenSpan> both = {{0, 2}};
    EXPECT_EQ(aggregate_subwords(two, both), Matrix::Constant(1, 2, 0.5));
}

TEST(Aggregate, MatchesDoubleMeanOracle) {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto layers = random_layers(3, 5, rng);
        const std::vector<ingest::SubtokenSpan> spans = {{0, 1}, {1, 3}};
        const Matrix out = aggregate_subwords(layers, spans);
        for (std::size_t w = 0; w < spans.size(); ++w) {
            for (Eigen::Index d = 0; d < 5; ++d) {
                double acc = 0.0;
                for (std::size_t i = spans[w].begin; i < spans[w].end; ++i) {
                    double layer_mean = 0.0;
                    for (const auto& l : layers) layer_mean += l(Eigen::Index(i), d);
                    acc += layer_mean / 4.0;
                }
                EXPECT_NEAR(out(Eigen::Index(w), d), acc / double(spans[w].size()), 1e-12);
            }
        }
    }
}

TEST(Aggregate, LinearInTheInput) {
    Rng rng(9);
    const auto layers = random_layers(4, 3, rng);
    SubtokenLayers scaled = layers;
    for (auto& m : scaled) m *= -2.5;
    const std::vector<ingest::SubtokenSpan> spans = {{0, 2}, {2, 4}};
    EXPECT_TRUE(aggregate_subwords(scaled, spans).isApprox(-2.5 * aggregate_subwords(layers, spans)));
}

TEST(Aggregate, EmptySpanIsContractError) {
    Rng rng(1);
    const auto layers = random_layers(2, 2, rng);
    const std::vector<ingest::SubtokenSpan> spans = {{1, 1}};
    EXPECT_THROW(aggregate_subwords(layers, spans), ContractError);
}

TEST(HashProvider, ContextDependentDeterministicPadZero) {
    HashProvider p(11, 16);
    const std::vector<std::string> a = {"gel", "##di", "mi"};
    const std::vector<std::string> b = {"gel", "##iy", "##or"};
    const auto out_a = p.encode("x", a);
    const auto out_b = p.encode("x", b);
    EXPECT_NE(out_a[3].row(0), out_b[3].row(0));
    const auto again = p.encode("y", a);
    for (std::size_t l = 0; l < kProviderLayers; ++l) EXPECT_EQ(out_a[l], again[l]);

    const std::vector<std::string> padded = {"gel", "[PAD]"};
    const auto out_p = p.encode("x", padded);
    for (const auto& m : out_p) EXPECT_TRUE(m.row(1).isZero(0.0));
    EXPECT_NE(HashProvider(12, 16).base_vector("gel"), p.base_vector("gel"));
}

TEST(FileProvider, RoundTripsBitExactly) {
    Rng rng(4);
    SubtokenLayers rec = random_layers(3, 4, rng);
    for (auto& m : rec) m = m.cast<float>().cast<double>();
    const std::string path = temp_path("provider_rt.bin");
    write_provider_file(path, 4, {{"s1", rec}});
    FileProvider p(path);
    EXPECT_EQ(p.dim(), 4);
    const std::vector<std::string> subs = {"a", "##b", "c", "[PAD]"};
    const auto out = p.encode("s1", subs);
    for (std::size_t l = 0; l < kProviderLayers; ++l) {
        EXPECT_EQ(out[l].topRows(3), rec[l]);
        EXPECT_TRUE(out[l].row(3).isZero(0.0));
    }
    EXPECT_THROW(p.encode("s2", subs), LookupError);
    const std::vector<std::string> short_row = {"a", "[PAD]", "[PAD]"};
    EXPECT_THROW(p.encode("s1", short_row), FormatError);
    std::remove(path.c_str());
}

TEST(FileProvider, RejectsWrongLayerCountAndTruncation) {
    const std::string path = temp_path("provider_bad.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << R"({"version":1,"d_bert":2,"layers":3})" << '\n';
    }
    EXPECT_THROW(FileProvider{path}, FormatError);

    Rng rng(2);
    write_provider_file(path, 2, {{"s", random_layers(2, 2, rng)}});
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    EXPECT_THROW(FileProvider{path}, FormatError);

    write_provider_file(path, 2, {{"s", random_layers(1, 2, rng)}, {"s", random_layers(1, 2, rng)}});
    EXPECT_THROW(FileProvider{path}, FormatError);
    std::remove(path.c_str());
}

TEST(FileProvider, DimensionMismatchWithConfig) {
    Rng rng(2);
    const std::string path = temp_path("provider_dim.bin");
    write_provider_file(path, 3, {{"s", random_layers(1, 3, rng)}});
    EXPECT_THROW(make_provider({"file", 0, 8, path}), ConfigError);
    EXPECT_EQ(make_provider({"file", 0, 3, path})->dim(), 3);
    EXPECT_THROW(make_provider({"bogus", 0, 3, ""}), ConfigError);
    std::remove(path.c_str());
}

namespace {

struct SharedFixture {
    SharedConfig config{6, 3, 4, 0.5, 0.4};
    Rng init{7};
    SharedLayer layer{config, Vocabulary::with_specials({"Noun", "Verb"}, true), init};
    ingest::Sentence sentence = ingest::make_sentence("s", {"Ali", "gitti"}, {"Noun", "Verb"});
    Matrix bert = Matrix::Constant(2, 6, 0.3);
};

}  // namespace

TEST(SharedLayer, ConcatenationOrderAndWidth) {
    SharedFixture f;
    ad::Tape tape;
    Rng rng(1);
    const Matrix o = f.layer.encode(tape, f.sentence, f.bert, ad::Mode::Eval, rng).value();
    ASSERT_EQ(o.cols(), 6 + 3 + 4);
    EXPECT_EQ(o.leftCols(6), f.bert);
    const auto& casing = f.layer.casing_table();
    const auto title = casing.vocab().id(ingest::to_string(ingest::CasingCategory::Title));
    EXPECT_EQ(o.block(0, 6, 1, 3), casing.weights().value.row(title));
    const auto& pos = f.layer.pos_table();
    EXPECT_EQ(o.block(1, 9, 1, 4), pos.weights().value.row(pos.vocab().id("Verb")));
}

TEST(SharedLayer, ZeroInputsGiveZeros) {
    SharedFixture f;
    f.layer.casing_table().weights().value.setZero();
    f.layer.pos_table().weights().value.setZero();
    ad::Tape tape;
    Rng rng(1);
    const Matrix o =
        f.layer.encode(tape, f.sentence, Matrix::Zero(2, 6), ad::Mode::Eval, rng).value();
    EXPECT_TRUE(o.isZero(0.0));
}

TEST(SharedLayer, EvalIsDeterministicAndZeroDropoutTrainMatchesEval) {
    SharedFixture f;
    Rng r1(1), r2(2);
    ad::Tape t1, t2;
    const Matrix a = f.layer.encode(t1, f.sentence, f.bert, ad::Mode::Eval, r1).value();
    const Matrix b = f.layer.encode(t2, f.sentence, f.bert, ad::Mode::Eval, r2).value();
    EXPECT_EQ(a, b);

    SharedConfig no_drop = f.config;
    no_drop.bert_dropout = 0.0;
    no_drop.embedding_dropout = 0.0;
    Rng init(7);
    SharedLayer plain(no_drop, Vocabulary::with_specials({"Noun", "Verb"}, true), init);
    ad::Tape t3, t4;
    Rng r3(3);
    EXPECT_EQ(plain.encode(t3, f.sentence, f.bert, ad::Mode::Train, r3).value(),
              plain.encode(t4, f.sentence, f.bert, ad::Mode::Eval, r3).value());
}

TEST(SharedLayer, ProviderInputIsFrozen) {
    SharedFixture f;
    ad::Tape tape;
    Rng rng(1);
    ad::Tensor o = f.layer.encode(tape, f.sentence, f.bert, ad::Mode::Eval, rng);
    tape.backward(ad::sum(o));
    int matches = 0;
    for (std::size_t id = 0; id < tape.size(); ++id) {
        const Matrix& v = tape.value(int(id));
        if (v.rows() == f.bert.rows() && v.cols() == f.bert.cols() && v == f.bert) {
            ++matches;
            EXPECT_FALSE(tape.requires_grad(int(id)));
        }
    }
    EXPECT_GT(matches, 0);
}

TEST(SharedLayer, UnseenTagWithoutUnkIsVocabularyError) {
    SharedConfig config{2, 2, 2, 0.0, 0.0};
    Rng init(1);
    SharedLayer layer(config, Vocabulary::with_specials({"Noun"}, false), init);
    ad::Tape tape;
    Rng rng(1);
    const auto s = ingest::make_sentence("s", {"x"}, {"Verb"});
    EXPECT_THROW(layer.encode(tape, s, Matrix::Zero(1, 2), ad::Mode::Eval, rng), VocabularyError);
    EXPECT_THROW(layer.encode(tape, s, Matrix::Zero(2, 2), ad::Mode::Eval, rng), Error);
}

TEST(SharedLayer, BatchEncodingMatchesSolo) {
    const ingest::SubwordVocab vocab({"a", "##a", "b", "##b", "[UNK]", "[PAD]"});
    const std::vector<ingest::Sentence> s = {
        ingest::make_sentence("1", {"ab", "b"}, {"Noun", "Verb"}),
        ingest::make_sentence("2", {"aaab"}, {"Noun"})};
    HashProvider provider(3, 6);
    SharedFixture f;
    const auto batched = ingest::make_batches(s, 100, vocab);
    const auto solo = ingest::make_batches({s[1]}, 100, vocab);
    ad::Tape tape;
    Rng rng(1);
    const auto enc = encode_batch(tape, batched[0], provider, f.layer, ad::Mode::Eval, rng);
    const auto enc_solo = encode_batch(tape, solo[0], provider, f.layer, ad::Mode::Eval, rng);
    ASSERT_EQ(enc.size(), 2u);
    EXPECT_TRUE(enc[1].value().isApprox(enc_solo[0].value(), 1e-14));
}
