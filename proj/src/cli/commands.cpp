#include "hmtl/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "hmtl/cli/gradient_suite.hpp"
#include "hmtl/cli/stats.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/ingest/corpus_io.hpp"
#include "hmtl/log.hpp"
#include "hmtl/mtl/checkpoint.hpp"
#include "hmtl/mtl/trainer.hpp"

namespace hmtl::cli {
namespace fs = std::filesystem;
using ad::Index;
namespace {

std::string percent(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

struct TrainedRun {
    std::unique_ptr<mtl::Model> model;
    mtl::TrainResult result;
    mtl::Vocabularies vocabs;
};

TrainedRun train_from_config(const RunConfig& rc, std::ostream* metrics) {
    mtl::TrainData data;
    if (rc.mtl.uses(mtl::Task::Dep)) {
        data.dep_train = read_corpus(rc.dep_train);
        if (!rc.dep_dev.empty()) data.dep_dev = read_corpus(rc.dep_dev);
    }
    if (rc.mtl.uses(mtl::Task::Ner)) {
        data.ner_train = read_corpus(rc.ner_train);
        if (!rc.ner_dev.empty()) data.ner_dev = read_corpus(rc.ner_dev);
    }
    const auto vocab = ingest::SubwordVocab::load(rc.vocab, rc.lowercase);
    auto spec = rc.provider;
    spec.dim = rc.mtl.shared.d_bert;
    const auto provider = embed::make_provider(spec);
    TrainedRun run;
    run.vocabs = mtl::build_vocabularies(rc.mtl.uses(mtl::Task::Dep) ? &data.dep_train : nullptr,
                                         rc.mtl.uses(mtl::Task::Ner) ? &data.ner_train : nullptr);
    run.model = std::make_unique<mtl::Model>(rc.mtl, run.vocabs);
    mtl::TrainOptions options;
    options.metrics_log = metrics;
    run.result = mtl::train(*run.model, data, vocab, *provider, options);
    return run;
}

struct LoadedForInference {
    mtl::LoadedModel loaded;
    ingest::SubwordVocab vocab;
    std::unique_ptr<embed::ContextualProvider> provider;
};

LoadedForInference load_for_inference(const std::string& checkpoint,
                                      const std::optional<std::string>& provider_path) {
    LoadedForInference out;
    out.loaded = mtl::load_checkpoint(checkpoint);
    out.vocab = ingest::SubwordVocab(out.loaded.meta.subwords, out.loaded.meta.lowercase);
    auto spec = out.loaded.meta.provider;
    if (provider_path) spec.path = *provider_path;
    out.provider = embed::make_provider(spec);
    return out;
}

// Predictions come back in input order.
std::vector<depparse::DepPrediction> predict_dep(mtl::Model& model, const std::vector<ingest::Sentence>& corpus,
                                                 const ingest::SubwordVocab& vocab,
                                                 const embed::ContextualProvider& provider) {
    const auto prepared = mtl::prepare_corpus(corpus, model.config().word_budget, vocab, provider);
    std::vector<depparse::DepPrediction> out(corpus.size());
    for (std::size_t k = 0; k < prepared.batches.size(); ++k) {
        const auto& batch = prepared.batches[k];
        for (std::size_t b = 0; b < batch.size(); ++b) {
            out[batch.source_index[b]] = model.predict_dep(batch.sentences[b], prepared.bert[k][b]);
        }
    }
    return out;
}

std::vector<std::vector<std::string>> predict_ner(mtl::Model& model, const std::vector<ingest::Sentence>& corpus,
                                                  const ingest::SubwordVocab& vocab,
                                                  const embed::ContextualProvider& provider) {
    const auto prepared = mtl::prepare_corpus(corpus, model.config().word_budget, vocab, provider);
    std::vector<std::vector<std::string>> out(corpus.size());
    for (std::size_t k = 0; k < prepared.batches.size(); ++k) {
        const auto& batch = prepared.batches[k];
        for (std::size_t b = 0; b < batch.size(); ++b) {
            for (Index id : model.predict_ner(batch.sentences[b], prepared.bert[k][b])) {
                out[batch.source_index[b]].push_back(model.vocabs().ner_tags.symbol(id));
            }
        }
    }
    return out;
}

std::vector<ingest::Sentence> with_tree(std::vector<ingest::Sentence> corpus,
                                        const std::vector<depparse::DepPrediction>& pred,
                                        const embed::Vocabulary& deprels) {
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        corpus[s].gold_heads = pred[s].heads;
        std::vector<std::string> labels;
        for (Index l : pred[s].labels) labels.push_back(deprels.symbol(l));
        corpus[s].gold_deprels = std::move(labels);
    }
    return corpus;
}

void require_component(const mtl::Model& model, mtl::Task task, const std::string& what) {
    if (!model.has(task)) {
        throw UsageError("checkpoint has no " + std::string(mtl::to_string(task)) + " component, cannot use " + what);
    }
}

}  // namespace

std::vector<ingest::Sentence> read_corpus(const std::string& path) {
    if (fs::path(path).extension() == ".conllu") return ingest::read_conllu(path);
    return ingest::read_ner(path);
}

int cmd_train(const TrainArgs& args, std::ostream& out) {
    RunConfig rc = load_run_config(args.config);
    if (args.seed) rc.mtl.seed = *args.seed;
    if (args.out) rc.out_dir = *args.out;
    const fs::path dir(rc.out_dir);
    fs::create_directories(dir);
    {
        auto resolved = open_out(dir / "config.resolved");
        resolved << rc.to_text();
    }
    auto metrics = open_out(dir / "metrics.jsonl");
    TrainedRun run = train_from_config(rc, &metrics);

    mtl::CheckpointMeta meta;
    meta.config = rc.mtl;
    meta.vocabs = run.vocabs;
    meta.subwords = ingest::SubwordVocab::load(rc.vocab, rc.lowercase).tokens();
    meta.lowercase = rc.lowercase;
    meta.provider = rc.provider;
    meta.provider.dim = rc.mtl.shared.d_bert;
    mtl::save_checkpoint((dir / "final.ckpt").string(), *run.model, meta);
    const auto final_values = mtl::snapshot(*run.model);
    for (const auto& [task, values] : run.result.best_snapshot) {
        mtl::restore(*run.model, values);
        mtl::save_checkpoint((dir / ("best_" + std::string(mtl::to_string(task)) + ".ckpt")).string(),
                             *run.model, meta);
    }
    mtl::restore(*run.model, final_values);

    out << "epochs: " << run.result.epochs << (run.result.early_stopped ? " (early stop)" : "") << '\n';
    for (const auto& [task, metric] : run.result.best_metric) {
        out << "best " << mtl::to_string(task) << (task == mtl::Task::Dep ? " LAS: " : " F1: ")
            << percent(metric) << " (epoch " << run.result.best_epoch.at(task) << ")\n";
    }
    return 0;
}

int cmd_eval(const EvalArgs& args, std::ostream& out) {
    if (args.dep_test.empty() && args.ner_test.empty()) throw UsageError("eval needs --dep-test and/or --ner-test");
    auto ctx = load_for_inference(args.checkpoint, args.provider_path);
    mtl::Model& model = *ctx.loaded.model;
    if (!args.dep_test.empty()) require_component(model, mtl::Task::Dep, "--dep-test");
    if (!args.ner_test.empty()) require_component(model, mtl::Task::Ner, "--ner-test");

    if (!args.dep_test.empty()) {
        const auto corpus = read_corpus(args.dep_test);
        const auto pred = predict_dep(model, corpus, ctx.vocab, *ctx.provider);
        std::vector<depparse::DepPrediction> gold;
        std::vector<depparse::DepPrediction> scored;
        for (std::size_t s = 0; s < corpus.size(); ++s) {
            if (!corpus[s].gold_heads) continue;
            gold.push_back({*corpus[s].gold_heads, mtl::gold_deprel_ids(model, corpus[s])});
            scored.push_back(pred[s]);
        }
        const auto scores = depparse::eval_las_uas(scored, gold);
        out << "LAS: " << percent(100.0 * scores.las()) << '\n';
        out << "UAS: " << percent(100.0 * scores.uas()) << '\n';
        if (args.out) {
            auto file = open_out(fs::path(*args.out) / "dep_pred.conllu");
            ingest::write_conllu(file, with_tree(corpus, pred, model.vocabs().deprels));
        }
    }
    if (!args.ner_test.empty()) {
        const auto corpus = read_corpus(args.ner_test);
        const auto pred = predict_ner(model, corpus, ctx.vocab, *ctx.provider);
        std::vector<std::vector<std::string>> gold;
        std::vector<std::vector<std::string>> scored;
        for (std::size_t s = 0; s < corpus.size(); ++s) {
            if (!corpus[s].gold_ner) continue;
            gold.push_back(*corpus[s].gold_ner);
            scored.push_back(pred[s]);
        }
        const auto scores = nertag::eval_micro_f1(scored, gold);
        out << "P: " << percent(100.0 * scores.precision()) << '\n';
        out << "R: " << percent(100.0 * scores.recall()) << '\n';
        out << "F1: " << percent(100.0 * scores.f1()) << '\n';
        if (args.out) {
            auto file = open_out(fs::path(*args.out) / "ner_pred.tsv");
            ingest::write_ner(file, corpus, &pred);
        }
    }
    return 0;
}

int cmd_predict(const PredictArgs& args, std::ostream& out) {
    const mtl::Task task = mtl::parse_task(args.task);
    auto ctx = load_for_inference(args.checkpoint, args.provider_path);
    mtl::Model& model = *ctx.loaded.model;
    require_component(model, task, "--task " + args.task);
    const auto corpus = read_corpus(args.input);
    auto file = open_out(args.out);
    if (task == mtl::Task::Dep) {
        const auto pred = predict_dep(model, corpus, ctx.vocab, *ctx.provider);
        ingest::write_conllu(file, with_tree(corpus, pred, model.vocabs().deprels));
    } else {
        const auto pred = predict_ner(model, corpus, ctx.vocab, *ctx.provider);
        ingest::write_ner(file, corpus, &pred);
    }
    out << "wrote " << corpus.size() << " sentences to " << args.out << '\n';
    return 0;
}

int cmd_stats(const StatsArgs& args, std::ostream& out) {
    if (args.corpora.empty()) throw UsageError("stats needs at least one corpus");
    WordCorpus words;
    for (const auto& path : args.corpora) {
        for (const auto& s : read_corpus(path)) words.push_back(s.words);
    }
    std::ostringstream csv;
    if (args.mode == "rare") {
        write_csv(csv, rare_word_histogram(words, args.target_words, args.repeats, args.seed));
    } else if (args.mode == "unknown") {
        write_csv(csv, unknown_word_curve(words, args.test_words, args.sizes, args.repeats, args.seed));
    } else {
        throw UsageError("stats mode must be rare or unknown, got '" + args.mode + "'");
    }
    if (args.out) {
        auto file = open_out(*args.out);
        file << csv.str();
    } else {
        out << csv.str();
    }
    return 0;
}

std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(const std::string& text) {
    std::vector<std::pair<std::string, std::vector<std::string>>> grid;
    std::istringstream in(text);
    std::string line;
    const auto& keys = run_config_keys();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("grid line '" + line + "' is not key=v1,v2,...");
        const std::string key = line.substr(0, eq);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw UsageError("grid names unknown key '" + key + "'");
        }
        std::vector<std::string> values;
        std::istringstream parts(line.substr(eq + 1));
        std::string v;
        while (std::getline(parts, v, ',')) {
            if (!v.empty()) values.push_back(v);
        }
        if (values.empty()) throw UsageError("grid key '" + key + "' has no values");
        grid.emplace_back(key, std::move(values));
    }
    if (grid.empty()) throw UsageError("empty hyperparameter grid");
    return grid;
}

std::vector<SweepTrial> run_sweep(const RunConfig& base,
                                  const std::vector<std::pair<std::string, std::vector<std::string>>>& grid,
                                  int trials, std::uint64_t seed, int epoch_cap,
                                  const std::optional<std::string>& out_dir) {
    if (grid.empty()) throw UsageError("empty hyperparameter grid");
    if (trials < 1) throw UsageError("trials must be positive");
    std::size_t points = 1;
    for (const auto& [key, values] : grid) points *= values.size();
    std::vector<std::size_t> order(points);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(std::min(points, static_cast<std::size_t>(trials)));

    std::vector<SweepTrial> results;
    for (std::size_t t = 0; t < order.size(); ++t) {
        SweepTrial trial;
        trial.trial = t;
        RunConfig rc = base;
        std::size_t code = order[t];
        for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
            const auto& [key, values] = *it;
            trial.values.emplace(trial.values.begin(), key, values[code % values.size()]);
            code /= values.size();
        }
        for (const auto& [key, value] : trial.values) rc.set(key, value);
        rc.mtl.max_epochs = std::min(rc.mtl.max_epochs, epoch_cap);
        rc.validate();
        std::unique_ptr<std::ofstream> metrics;
        if (out_dir) {
            metrics = std::make_unique<std::ofstream>(
                open_out(fs::path(*out_dir) / ("trial_" + std::to_string(t) + ".jsonl")));
        }
        const TrainedRun run = train_from_config(rc, metrics.get());
        double sum = 0.0;
        for (const auto& [task, metric] : run.result.best_metric) sum += metric;
        trial.metric = run.result.best_metric.empty() ? 0.0 : sum / run.result.best_metric.size();
        log::info("trial " + std::to_string(t) + ": " + std::to_string(trial.metric));
        results.push_back(std::move(trial));
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const SweepTrial& a, const SweepTrial& b) { return a.metric > b.metric; });
    return results;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
    const RunConfig base = load_run_config(args.config);
    std::ifstream in(args.grid);
    if (!in) throw UsageError("cannot read grid " + args.grid);
    std::stringstream text;
    text << in.rdbuf();
    const auto grid = parse_grid(text.str());
    const auto results = run_sweep(base, grid, args.trials, args.seed, args.epoch_cap, args.out);

    std::ostringstream csv;
    csv << "rank,trial,metric";
    for (const auto& [key, values] : grid) csv << ',' << key;
    csv << '\n';
    for (std::size_t r = 0; r < results.size(); ++r) {
        csv << r + 1 << ',' << results[r].trial << ',' << percent(results[r].metric);
        for (const auto& [key, value] : results[r].values) csv << ',' << value;
        csv << '\n';
    }
    if (args.out) {
        auto file = open_out(fs::path(*args.out) / "sweep.csv");
        file << csv.str();
    }
    out << csv.str();
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
    bool ok = true;
    out << "check,max_rel_error,tolerance,result\n";
    for (const auto& r : run_gradient_suite(seed)) {
        out << r.name << ',' << std::scientific << std::setprecision(3) << r.max_rel_error << ','
            << r.tolerance << std::defaultfloat << ',' << (r.passed() ? "pass" : "FAIL") << '\n';
        ok = ok && r.passed();
    }
    return ok ? 0 : 1;
}

}  // namespace hmtl::cli
