#include "hmtl/mtl/trainer.hpp"

#include <nlohmann/json.hpp>

#include "hmtl/embed/shared_layer.hpp"
#include "hmtl/errors.hpp"
#include "hmtl/log.hpp"
#include "hmtl/mtl/optimizer.hpp"

namespace hmtl::mtl {
namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

struct TaskState {
    PreparedCorpus train;
    PreparedCorpus dev;
    double best = -1.0;
    int bad_epochs = 0;
    int since_decay = 0;
};

}  // namespace

std::size_t PreparedCorpus::sentences() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.size();
    return n;
}

PreparedCorpus prepare_corpus(const std::vector<ingest::Sentence>& sentences,
                              std::size_t word_budget, const ingest::SubwordVocab& vocab,
                              const embed::ContextualProvider& provider) {
    PreparedCorpus out;
    out.batches = ingest::make_batches(sentences, word_budget, vocab);
    for (const auto& batch : out.batches) {
        std::vector<Matrix> vectors;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            vectors.push_back(embed::bert_word_vectors(batch, b, provider));
        }
        out.bert.push_back(std::move(vectors));
    }
    return out;
}

std::string to_json_line(const EpochRecord& r) {
    nlohmann::json j = {{"epoch", r.epoch},          {"task", to_string(r.task)},
                        {"loss", optional_json(r.loss)}, {"las", optional_json(r.las)},
                        {"uas", optional_json(r.uas)},   {"f1", optional_json(r.f1)},
                        {"lr", r.lr}};
    return j.dump();
}

DevMetrics evaluate(Model& model, Task task, const PreparedCorpus& corpus) {
    DevMetrics out;
    if (task == Task::Dep) {
        std::vector<depparse::DepPrediction> pred;
        std::vector<depparse::DepPrediction> gold;
        for (std::size_t k = 0; k < corpus.batches.size(); ++k) {
            const auto& batch = corpus.batches[k];
            for (std::size_t b = 0; b < batch.size(); ++b) {
                const auto& s = batch.sentences[b];
                if (!s.gold_heads) continue;
                pred.push_back(model.predict_dep(s, corpus.bert[k][b]));
                gold.push_back({*s.gold_heads, gold_deprel_ids(model, s)});
            }
        }
        const auto scores = depparse::eval_las_uas(pred, gold);
        out.las = 100.0 * scores.las();
        out.uas = 100.0 * scores.uas();
    } else {
        std::vector<std::vector<std::string>> pred;
        std::vector<std::vector<std::string>> gold;
        const auto& tags = model.vocabs().ner_tags;
        for (std::size_t k = 0; k < corpus.batches.size(); ++k) {
            const auto& batch = corpus.batches[k];
            for (std::size_t b = 0; b < batch.size(); ++b) {
                const auto& s = batch.sentences[b];
                if (!s.gold_ner) continue;
                std::vector<std::string> symbols;
                for (Index id : model.predict_ner(s, corpus.bert[k][b])) symbols.push_back(tags.symbol(id));
                pred.push_back(std::move(symbols));
                gold.push_back(*s.gold_ner);
            }
        }
        out.f1 = 100.0 * nertag::eval_micro_f1(pred, gold).f1();
    }
    return out;
}

std::vector<Matrix> snapshot(Model& model) {
    std::vector<Matrix> out;
    for (auto* p : model.parameters()) out.push_back(p->value);
    return out;
}

void restore(Model& model, const std::vector<Matrix>& values) {
    auto params = model.parameters();
    if (params.size() != values.size()) throw ContractError("restore: snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

TrainResult train(Model& model, const TrainData& data, const ingest::SubwordVocab& vocab,
                  const embed::ContextualProvider& provider, const TrainOptions& options) {
    const MtlConfig& config = model.config();
    std::map<Task, TaskState> tasks;
    for (Task t : config.tasks()) {
        const auto& train_set = t == Task::Dep ? data.dep_train : data.ner_train;
        const auto& dev_set = t == Task::Dep ? data.dep_dev : data.ner_dev;
        if (train_set.empty()) {
            throw ConfigError("setting " + std::string(to_string(config.setting)) + " needs a " +
                              std::string(to_string(t)) + " training corpus");
        }
        TaskState state;
        state.train = prepare_corpus(train_set, config.word_budget, vocab, provider);
        state.dev = dev_set.empty() ? state.train
                                    : prepare_corpus(dev_set, config.word_budget, vocab, provider);
        tasks.emplace(t, std::move(state));
    }

    Rng rng(config.seed ^ 0x5eedULL);
    AdamW optimizer(config.lr, config.weight_decay);
    auto params = model.parameters();
    TrainResult result;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        if (options.on_epoch_start) options.on_epoch_start(epoch, model);
        std::vector<Task> active = config.tasks();
        if (config.hierarchical() && epoch <= config.warmup_epochs) active = {config.low_task};

        std::map<Task, double> loss_sum;
        std::map<Task, int> loss_steps;
        for (int step = 0; step < config.steps_per_epoch; ++step) {
            const Task task = active.size() == 1 ? active[0] : active[rng.below(active.size())];
            TaskState& state = tasks.at(task);
            const std::size_t k = rng.below(state.train.batches.size());
            const ingest::Batch& batch = state.train.batches[k];

            ad::Tape tape;
            std::vector<Tensor> losses;
            for (std::size_t b = 0; b < batch.size(); ++b) {
                losses.push_back(model.loss(tape, batch.sentences[b], state.train.bert[k][b], task,
                                            ad::Mode::Train, rng));
            }
            Tensor total = losses.front();
            for (std::size_t b = 1; b < losses.size(); ++b) total = total + losses[b];
            total = ad::scale(total, 1.0 / static_cast<double>(batch.word_count()));
            tape.backward(total);

            const auto reached = tape.reached_parameters();
            clip_grad_norm(reached, config.grad_clip);
            optimizer.step(reached);
            for (auto* p : params) p->zero_grad();

            loss_sum[task] += total.item();
            loss_steps[task] += 1;
        }

        std::vector<EpochRecord> records;
        bool stop = false;
        for (Task t : active) {
            TaskState& state = tasks.at(t);
            const DevMetrics metrics = evaluate(model, t, state.dev);
            EpochRecord rec;
            rec.epoch = epoch;
            rec.task = t;
            if (loss_steps[t] > 0) rec.loss = loss_sum[t] / loss_steps[t];
            rec.las = metrics.las;
            rec.uas = metrics.uas;
            rec.f1 = metrics.f1;
            rec.lr = optimizer.lr();
            records.push_back(rec);

            const double metric = metrics.primary(t);
            if (metric > state.best) {
                state.best = metric;
                state.bad_epochs = 0;
                state.since_decay = 0;
                result.best_metric[t] = metric;
                result.best_epoch[t] = epoch;
                result.best_snapshot[t] = snapshot(model);
            } else {
                ++state.bad_epochs;
                ++state.since_decay;
                if (state.since_decay > config.lr_patience) {
                    optimizer.set_lr(optimizer.lr() * config.lr_decay);
                    state.since_decay = 0;
                    log::info("epoch " + std::to_string(epoch) + ": " + std::string(to_string(t)) +
                              " plateau, lr -> " + std::to_string(optimizer.lr()));
                }
                if (state.bad_epochs > config.early_stop && !stop) {
                    stop = true;
                    result.stopped_by = t;
                }
            }
        }
        for (const auto& rec : records) {
            log::info(to_json_line(rec));
            if (options.metrics_log) *options.metrics_log << to_json_line(rec) << '\n';
            result.log.push_back(rec);
        }
        if (options.metrics_log) options.metrics_log->flush();
        result.epochs = epoch;
        if (stop) {
            result.early_stopped = true;
            log::info("early stop after epoch " + std::to_string(epoch) + " (" +
                      std::string(to_string(*result.stopped_by)) + ")");
            break;
        }
        if (options.stop_after_epoch && options.stop_after_epoch(epoch, records)) break;
    }
    return result;
}

}  // namespace hmtl::mtl
