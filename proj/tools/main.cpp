#include <iostream>

#include <CLI11.hpp>

#include "hmtl/cli/commands.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/log.hpp"

int main(int argc, char** argv) {
    using namespace hmtl;
    CLI::App app{"Hierarchical multi-task dependency parsing and NER"};
    app.require_subcommand(1);

    cli::TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
    train_cmd->add_option("--config", train.config, "key=value run config")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--seed", train.seed, "Override the model seed");
    train_cmd->add_option("--out", train.out, "Output directory (overrides out_dir)");

    cli::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on test data");
    eval_cmd->add_option("--checkpoint", eval.checkpoint)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--dep-test", eval.dep_test, "CoNLL-U test file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--ner-test", eval.ner_test, "NER test file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval.out, "Directory for prediction files");
    eval_cmd->add_option("--provider-path", eval.provider_path, "Override the provider file");

    cli::PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Tag or parse a file");
    predict_cmd->add_option("--checkpoint", predict.checkpoint)->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--input", predict.input)->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--task", predict.task, "dep or ner")->required();
    predict_cmd->add_option("--out", predict.out, "Output file")->required();
    predict_cmd->add_option("--provider-path", predict.provider_path, "Override the provider file");

    cli::StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Rare and unknown word statistics as CSV");
    stats_cmd->add_option("corpora", stats.corpora, "Corpus files")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--mode", stats.mode, "rare or unknown")->required();
    stats_cmd->add_option("--seed", stats.seed);
    stats_cmd->add_option("--out", stats.out, "CSV output file");
    stats_cmd->add_option("--target-words", stats.target_words, "Sample size in rare mode");
    stats_cmd->add_option("--test-words", stats.test_words, "Test sample size in unknown mode");
    stats_cmd->add_option("--sizes", stats.sizes, "Training sample sizes in unknown mode")->delimiter(',');
    stats_cmd->add_option("--repeats", stats.repeats);

    cli::SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Random search over a hyperparameter grid");
    sweep_cmd->add_option("--config", sweep.config)->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--grid", sweep.grid, "key=v1,v2 lines")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--trials", sweep.trials);
    sweep_cmd->add_option("--seed", sweep.seed);
    sweep_cmd->add_option("--out", sweep.out, "Directory for trial logs and sweep.csv");
    sweep_cmd->add_option("--epoch-cap", sweep.epoch_cap);

    std::uint64_t gradcheck_seed = 1;
    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    gradcheck_cmd->add_option("--seed", gradcheck_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return cli::cmd_train(train, std::cout);
        if (*eval_cmd) return cli::cmd_eval(eval, std::cout);
        if (*predict_cmd) return cli::cmd_predict(predict, std::cout);
        if (*stats_cmd) return cli::cmd_stats(stats, std::cout);
        if (*sweep_cmd) return cli::cmd_sweep(sweep, std::cout);
        if (*gradcheck_cmd) return cli::cmd_gradcheck(gradcheck_seed, std::cout);
    } catch (const UsageError& e) {
        log::error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log::error(e.what());
        return 1;
    }
    return 0;
}
