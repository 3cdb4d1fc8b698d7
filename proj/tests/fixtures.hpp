#pragma once

// Small models over the bundled synthetic corpus.

#include <string>

#include "hmtl/embed/provider.hpp"
#include "hmtl/ingest/corpus_io.hpp"
#include "hmtl/ingest/wordpiece.hpp"
#include "hmtl/mtl/trainer.hpp"

namespace fixture {

inline std::string data_path(const std::string& name) {
    return std::string(HMTL_DATA_DIR) + "/" + name;
}

struct Synthetic {
    std::vector<hmtl::ingest::Sentence> dep = hmtl::ingest::read_conllu(data_path("dep.conllu"));
    std::vector<hmtl::ingest::Sentence> ner = hmtl::ingest::read_ner(data_path("ner.tsv"));
    hmtl::ingest::SubwordVocab vocab = hmtl::ingest::SubwordVocab::load(data_path("vocab.txt"), true);
    hmtl::embed::HashProvider provider{7, 16};

    hmtl::mtl::Vocabularies vocabularies() const { return hmtl::mtl::build_vocabularies(&dep, &ner); }
    hmtl::mtl::TrainData data() const { return {dep, {}, ner, {}}; }
};

inline const Synthetic& synthetic() {
    static const Synthetic s;
    return s;
}

inline hmtl::mtl::MtlConfig tiny(hmtl::mtl::Setting setting, hmtl::mtl::Task low) {
    hmtl::mtl::MtlConfig c;
    c.setting = setting;
    c.low_task = low;
    c.shared.d_bert = 16;
    c.shared.d_casing = 4;
    c.shared.d_pos = 4;
    c.dep.hidden = 6;
    c.dep.inner = 6;
    c.dep.layers = 1;
    c.ner.hidden = 5;
    c.ner.layers = 1;
    c.dep_embed = 7;
    c.ner_embed = 3;
    c.warmup_epochs = 0;
    c.steps_per_epoch = 4;
    c.word_budget = 20;
    c.max_epochs = 3;
    return c;
}

}  // namespace fixture
