#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "hmtl/mtl/bridge.hpp"
#include "hmtl/mtl/config.hpp"

namespace hmtl::mtl {

struct Vocabularies {
    embed::Vocabulary xpos;     // with <PAD> and <UNK>
    embed::Vocabulary deprels;  // plain labels
    embed::Vocabulary ner_tags;  // plain labels
};

// Vocabularies from training corpora; either may be null.
Vocabularies build_vocabularies(const std::vector<ingest::Sentence>* dep,
                                const std::vector<ingest::Sentence>* ner);

// Shared layer plus the task components a setting needs, wired as flat or
// hierarchical. Components for unused tasks are never allocated.
class Model {
public:
    Model(const MtlConfig& config, Vocabularies vocabs);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    struct Run {
        std::optional<depparse::DepScores> dep;
        std::optional<nertag::NerTagger::Output> ner;
        Tensor high_input;  // input to the high-level component, when it ran
    };

    // Forward pass needed to score `task` on one sentence; in hierarchical
    // settings the high task also runs the low component and the bridge.
    Run run(ad::Tape& tape, const ingest::Sentence& sentence, const Matrix& bert_words, Task task,
            ad::Mode mode, Rng& rng);

    // Summed task loss of one sentence; requires gold annotation for `task`.
    Tensor loss(ad::Tape& tape, const ingest::Sentence& sentence, const Matrix& bert_words,
                Task task, ad::Mode mode, Rng& rng);

    depparse::DepPrediction predict_dep(const ingest::Sentence& sentence, const Matrix& bert_words);
    std::vector<Index> predict_ner(const ingest::Sentence& sentence, const Matrix& bert_words);

    // Input width of a task component.
    Index input_dim(Task t) const;

    const MtlConfig& config() const { return config_; }
    const Vocabularies& vocabs() const { return vocabs_; }
    bool has(Task t) const { return t == Task::Dep ? dep_ != nullptr : ner_ != nullptr; }
    embed::SharedLayer& shared() { return shared_; }
    depparse::DepParser& dep() { return *dep_; }
    nertag::NerTagger& ner() { return *ner_; }
    embed::EmbeddingTable* bridge_table() { return bridge_.get(); }

    // Every parameter in a fixed order with unique names.
    std::vector<ad::Parameter*> parameters();
    // Parameters owned by one task: its component, plus the bridge table
    // when the task is the high-level one.
    std::vector<ad::Parameter*> task_parameters(Task t);

private:
    MtlConfig config_;
    Vocabularies vocabs_;
    embed::SharedLayer shared_;
    std::unique_ptr<depparse::DepParser> dep_;
    std::unique_ptr<nertag::NerTagger> ner_;
    std::unique_ptr<embed::EmbeddingTable> bridge_;
};

// Gold label ids of a sentence; unknown symbols map to -1.
std::vector<Index> gold_deprel_ids(const Model& model, const ingest::Sentence& s);
std::vector<Index> gold_ner_ids(const Model& model, const ingest::Sentence& s);

}  // namespace hmtl::mtl
