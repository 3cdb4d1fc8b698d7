#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "hmtl/embed/provider.hpp"
#include "hmtl/ingest/batch.hpp"
#include "hmtl/mtl/model.hpp"

namespace hmtl::mtl {

// Batches with their frozen provider word vectors computed once.
struct PreparedCorpus {
    std::vector<ingest::Batch> batches;
    std::vector<std::vector<Matrix>> bert;  // [batch][sentence] -> n x d_bert

    std::size_t sentences() const;
};

PreparedCorpus prepare_corpus(const std::vector<ingest::Sentence>& sentences,
                              std::size_t word_budget, const ingest::SubwordVocab& vocab,
                              const embed::ContextualProvider& provider);

struct TrainData {
    std::vector<ingest::Sentence> dep_train;
    std::vector<ingest::Sentence> dep_dev;  // falls back to dep_train when empty
    std::vector<ingest::Sentence> ner_train;
    std::vector<ingest::Sentence> ner_dev;  // falls back to ner_train when empty
};

struct EpochRecord {
    int epoch = 0;
    Task task = Task::Dep;
    std::optional<double> loss;  // mean per-word loss over the epoch's steps of this task
    std::optional<double> las;
    std::optional<double> uas;
    std::optional<double> f1;
    double lr = 0.0;
};

// One JSON object per line: {epoch, task, loss, las, uas, f1, lr}.
std::string to_json_line(const EpochRecord& r);

struct DevMetrics {
    std::optional<double> las;
    std::optional<double> uas;
    std::optional<double> f1;
    // LAS for DEP, F1 for NER.
    double primary(Task t) const { return t == Task::Dep ? las.value_or(0.0) : f1.value_or(0.0); }
};

DevMetrics evaluate(Model& model, Task task, const PreparedCorpus& corpus);

struct TrainOptions {
    std::ostream* metrics_log = nullptr;
    // Called after each epoch's records; returning true ends training.
    std::function<bool(int epoch, const std::vector<EpochRecord>& records)> stop_after_epoch;
    // Called at the start of every epoch, before any step.
    std::function<void(int epoch, Model& model)> on_epoch_start;
};

struct TrainResult {
    std::vector<EpochRecord> log;
    int epochs = 0;
    bool early_stopped = false;
    std::optional<Task> stopped_by;
    std::map<Task, double> best_metric;
    std::map<Task, int> best_epoch;
    std::map<Task, std::vector<Matrix>> best_snapshot;  // parameter values in Model::parameters() order
};

// Random-task-sampling trainer. Hierarchical settings train only the low
// task for the first warmup epochs.
TrainResult train(Model& model, const TrainData& data, const ingest::SubwordVocab& vocab,
                  const embed::ContextualProvider& provider, const TrainOptions& options = {});

std::vector<Matrix> snapshot(Model& model);
void restore(Model& model, const std::vector<Matrix>& values);

}  // namespace hmtl::mtl
