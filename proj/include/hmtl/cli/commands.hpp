#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hmtl/cli/run_config.hpp"
#include "hmtl/ingest/sentence.hpp"
#include "hmtl/mtl/model.hpp"

namespace hmtl::cli {

// Reads CoNLL-U for *.conllu paths and the three-column NER format otherwise.
std::vector<ingest::Sentence> read_corpus(const std::string& path);

struct TrainArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};
// Writes metrics.jsonl, config.resolved, final.ckpt and best_<task>.ckpt to the output directory.
int cmd_train(const TrainArgs& args, std::ostream& out);

struct EvalArgs {
    std::string checkpoint;
    std::string dep_test;
    std::string ner_test;
    std::optional<std::string> out;
    std::optional<std::string> provider_path;
};
// Prints LAS/UAS and/or F1 as percentages with two decimals; with --out,
// also writes dep_pred.conllu / ner_pred.tsv.
int cmd_eval(const EvalArgs& args, std::ostream& out);

struct PredictArgs {
    std::string checkpoint;
    std::string input;
    std::string task;  // "dep" or "ner"
    std::string out;
    std::optional<std::string> provider_path;
};
int cmd_predict(const PredictArgs& args, std::ostream& out);

struct StatsArgs {
    std::vector<std::string> corpora;
    std::string mode;  // "rare" or "unknown"
    std::uint64_t seed = 1;
    std::optional<std::string> out;  // CSV path; stdout when absent
    std::size_t target_words = 30000;
    std::size_t test_words = 1000;
    std::vector<std::size_t> sizes = {5000, 10000, 15000, 20000, 25000, 30000};
    int repeats = 10;
};
int cmd_stats(const StatsArgs& args, std::ostream& out);

struct SweepArgs {
    std::string config;
    std::string grid;  // one "key=v1,v2,..." line per hyperparameter
    int trials = 50;
    std::uint64_t seed = 1;
    std::optional<std::string> out;
    int epoch_cap = 40;
};

struct SweepTrial {
    std::size_t trial = 0;
    std::vector<std::pair<std::string, std::string>> values;
    double metric = 0.0;  // LAS, F1, or their mean when both tasks train
};

// Parses a grid file; throws UsageError when it names no values.
std::vector<std::pair<std::string, std::vector<std::string>>> parse_grid(const std::string& text);

// Seeded random search without replacement; results sorted by metric,
// best first.
std::vector<SweepTrial> run_sweep(const RunConfig& base,
                                  const std::vector<std::pair<std::string, std::vector<std::string>>>& grid,
                                  int trials, std::uint64_t seed, int epoch_cap,
                                  const std::optional<std::string>& out_dir);
int cmd_sweep(const SweepArgs& args, std::ostream& out);

int cmd_gradcheck(std::uint64_t seed, std::ostream& out);

}  // namespace hmtl::cli
