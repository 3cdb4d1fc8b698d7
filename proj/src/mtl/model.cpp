#include "hmtl/mtl/model.hpp"

#include <set>
#include <unordered_set>

#include "hmtl/errors.hpp"

namespace hmtl::mtl {
namespace {

std::vector<std::string> sorted_symbols(const std::vector<ingest::Sentence>& corpus,
                                        const std::vector<std::string>& (*column)(const ingest::Sentence&)) {
    std::set<std::string> seen;
    for (const auto& s : corpus) {
        for (const auto& sym : column(s)) seen.insert(sym);
    }
    return {seen.begin(), seen.end()};
}

const std::vector<std::string>& xpos_column(const ingest::Sentence& s) { return s.xpos; }

const std::vector<std::string>& deprel_column(const ingest::Sentence& s) {
    static const std::vector<std::string> empty;
    return s.gold_deprels ? *s.gold_deprels : empty;
}

const std::vector<std::string>& ner_column(const ingest::Sentence& s) {
    static const std::vector<std::string> empty;
    return s.gold_ner ? *s.gold_ner : empty;
}

std::vector<Index> ids_or_missing(const embed::Vocabulary& vocab, const std::vector<std::string>& symbols) {
    std::vector<Index> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(vocab.find(s).value_or(-1));
    return out;
}

}  // namespace

Vocabularies build_vocabularies(const std::vector<ingest::Sentence>* dep,
                                const std::vector<ingest::Sentence>* ner) {
    std::vector<ingest::Sentence> all;
    if (dep) all.insert(all.end(), dep->begin(), dep->end());
    if (ner) all.insert(all.end(), ner->begin(), ner->end());
    Vocabularies v;
    v.xpos = embed::Vocabulary::with_specials(sorted_symbols(all, xpos_column), true);
    v.deprels = embed::Vocabulary::labels(dep ? sorted_symbols(*dep, deprel_column)
                                              : std::vector<std::string>{});
    v.ner_tags = embed::Vocabulary::labels(ner ? sorted_symbols(*ner, ner_column)
                                               : std::vector<std::string>{});
    return v;
}

Model::Model(const MtlConfig& config, Vocabularies vocabs)
    : config_(config), vocabs_(std::move(vocabs)) {
    config_.validate();
    Rng init(config_.seed);
    shared_ = embed::SharedLayer(config_.shared, vocabs_.xpos, init);
    if (config_.uses(Task::Dep)) {
        if (vocabs_.deprels.size() == 0) throw ConfigError("dependency labels are empty");
        dep_ = std::make_unique<depparse::DepParser>(config_.dep, input_dim(Task::Dep),
                                                     vocabs_.deprels, init);
    }
    if (config_.uses(Task::Ner)) {
        if (vocabs_.ner_tags.size() == 0) throw ConfigError("NER tag set is empty");
        ner_ = std::make_unique<nertag::NerTagger>(config_.ner, input_dim(Task::Ner),
                                                   vocabs_.ner_tags, init);
    }
    if (config_.setting == Setting::HierPredHard || config_.setting == Setting::HierPredSoft) {
        if (config_.low_task == Task::Dep) {
            bridge_ = std::make_unique<embed::EmbeddingTable>("bridge.dep", vocabs_.deprels,
                                                              config_.dep_embed, init);
        } else {
            bridge_ = std::make_unique<embed::EmbeddingTable>("bridge.ner", vocabs_.ner_tags,
                                                              config_.ner_embed, init);
        }
    }
    std::unordered_set<std::string> names;
    for (auto* p : parameters()) {
        if (!names.insert(p->name).second) throw ContractError("duplicate parameter name " + p->name);
    }
}

Index Model::input_dim(Task t) const {
    const Index base = shared_.output_dim();
    if (!config_.hierarchical() || t == config_.low_task) return base;
    switch (config_.setting) {
        case Setting::HierRepr:
            return base + 2 * (config_.low_task == Task::Dep ? config_.dep.hidden : config_.ner.hidden);
        default:
            return base + (config_.low_task == Task::Dep ? config_.dep_embed : config_.ner_embed);
    }
}

Model::Run Model::run(ad::Tape& tape, const ingest::Sentence& sentence, const Matrix& bert_words,
                      Task task, ad::Mode mode, Rng& rng) {
    if (!has(task)) {
        throw UsageError("the model has no " + std::string(to_string(task)) + " component");
    }
    Run r;
    auto component = [&](Task t, const Tensor& x) {
        if (t == Task::Dep) {
            r.dep = dep_->score(tape, x, mode, rng);
        } else {
            r.ner = ner_->emissions(tape, x, mode, rng);
        }
    };
    Tensor o = shared_.encode(tape, sentence, bert_words, mode, rng);
    if (!config_.hierarchical() || task == config_.low_task) {
        component(task, o);
        return r;
    }
    const Task low = config_.low_task;
    component(low, o);
    Tensor extra;
    if (config_.setting == Setting::HierRepr) {
        const Tensor& hidden = low == Task::Dep ? r.dep->hidden : r.ner->hidden;
        const Index width = 2 * (low == Task::Dep ? config_.dep.hidden : config_.ner.hidden);
        extra = bridge_repr(hidden, width);
    } else {
        Tensor table = tape.param(bridge_->weights());
        if (config_.setting == Setting::HierPredHard) {
            const Matrix scores = low == Task::Dep ? dep_bridge_scores(*r.dep).value()
                                                   : r.ner->emissions.value();
            extra = bridge_hard(scores, table);
        } else {
            Tensor scores = low == Task::Dep ? dep_bridge_scores(*r.dep) : r.ner->emissions;
            extra = bridge_soft(scores, table);
        }
    }
    r.high_input = ad::concat_cols({o, extra});
    component(config_.high_task(), r.high_input);
    return r;
}

Tensor Model::loss(ad::Tape& tape, const ingest::Sentence& sentence, const Matrix& bert_words,
                   Task task, ad::Mode mode, Rng& rng) {
    Run r = run(tape, sentence, bert_words, task, mode, rng);
    if (task == Task::Dep) {
        if (!sentence.gold_heads || !sentence.gold_deprels) {
            throw ContractError("sentence " + sentence.id + " has no gold tree");
        }
        const auto labels = gold_deprel_ids(*this, sentence);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0) {
                throw VocabularyError("sentence " + sentence.id + ": unknown dependency label '" +
                                      (*sentence.gold_deprels)[i] + "'");
            }
        }
        return depparse::dep_loss(*r.dep, *sentence.gold_heads, labels);
    }
    if (!sentence.gold_ner) throw ContractError("sentence " + sentence.id + " has no gold NER tags");
    const auto tags = gold_ner_ids(*this, sentence);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i] < 0) {
            throw VocabularyError("sentence " + sentence.id + ": unknown NER tag '" +
                                  (*sentence.gold_ner)[i] + "'");
        }
    }
    return ner_->loss(tape, r.ner->emissions, tags);
}

depparse::DepPrediction Model::predict_dep(const ingest::Sentence& sentence, const Matrix& bert_words) {
    ad::Tape tape;
    Rng unused(0);
    Run r = run(tape, sentence, bert_words, Task::Dep, ad::Mode::Eval, unused);
    return depparse::decode(*r.dep);
}

std::vector<Index> Model::predict_ner(const ingest::Sentence& sentence, const Matrix& bert_words) {
    ad::Tape tape;
    Rng unused(0);
    Run r = run(tape, sentence, bert_words, Task::Ner, ad::Mode::Eval, unused);
    return ner_->decode(r.ner->emissions.value());
}

std::vector<ad::Parameter*> Model::parameters() {
    auto out = shared_.parameters();
    if (dep_) {
        for (auto* p : dep_->parameters()) out.push_back(p);
    }
    if (ner_) {
        for (auto* p : ner_->parameters()) out.push_back(p);
    }
    if (bridge_) out.push_back(&bridge_->weights());
    return out;
}

std::vector<ad::Parameter*> Model::task_parameters(Task t) {
    std::vector<ad::Parameter*> out;
    if (t == Task::Dep && dep_) out = dep_->parameters();
    if (t == Task::Ner && ner_) out = ner_->parameters();
    if (bridge_ && t == config_.high_task()) out.push_back(&bridge_->weights());
    return out;
}

std::vector<Index> gold_deprel_ids(const Model& model, const ingest::Sentence& s) {
    if (!s.gold_deprels) return {};
    return ids_or_missing(model.vocabs().deprels, *s.gold_deprels);
}

std::vector<Index> gold_ner_ids(const Model& model, const ingest::Sentence& s) {
    if (!s.gold_ner) return {};
    return ids_or_missing(model.vocabs().ner_tags, *s.gold_ner);
}

}  // namespace hmtl::mtl
