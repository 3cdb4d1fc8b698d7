#include "hmtl/mtl/config.hpp"

#include <sstream>

#include "hmtl/errors.hpp"

namespace hmtl::mtl {

std::string_view to_string(Task t) { return t == Task::Dep ? "dep" : "ner"; }

std::string_view to_string(Setting s) {
    switch (s) {
        case Setting::Single: return "single";
        case Setting::Flat: return "flat";
        case Setting::HierPredHard: return "hier_pred_hard";
        case Setting::HierPredSoft: return "hier_pred_soft";
        case Setting::HierRepr: return "hier_repr";
    }
    return "?";
}

Task parse_task(std::string_view text) {
    if (text == "dep" || text == "DEP") return Task::Dep;
    if (text == "ner" || text == "NER") return Task::Ner;
    throw ConfigError("unknown task '" + std::string(text) + "'");
}

Setting parse_setting(std::string_view text) {
    for (Setting s : {Setting::Single, Setting::Flat, Setting::HierPredHard, Setting::HierPredSoft,
                      Setting::HierRepr}) {
        if (to_string(s) == text) return s;
    }
    throw ConfigError("unknown setting '" + std::string(text) + "'");
}

bool MtlConfig::hierarchical() const {
    return setting == Setting::HierPredHard || setting == Setting::HierPredSoft ||
           setting == Setting::HierRepr;
}

bool MtlConfig::uses(Task t) const { return setting != Setting::Single || t == low_task; }

std::vector<Task> MtlConfig::tasks() const {
    if (setting == Setting::Single) return {low_task};
    return {low_task, high_task()};
}

void MtlConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(warmup_epochs >= 0, "warmup_epochs must be >= 0");
    require(steps_per_epoch > 0, "steps_per_epoch must be positive");
    require(word_budget > 0, "word_budget must be positive");
    require(max_epochs > 0, "max_epochs must be positive");
    require(lr > 0.0, "lr must be positive");
    require(weight_decay >= 0.0, "weight_decay must be >= 0");
    require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must lie in (0, 1]");
    require(lr_patience >= 0 && early_stop >= 0, "patience values must be >= 0");
    require(grad_clip > 0.0, "grad_clip must be positive");
    require(dep_embed > 0 && ner_embed > 0, "bridge embedding sizes must be positive");
    require(shared.d_bert > 0 && shared.d_casing > 0 && shared.d_pos > 0,
            "shared embedding sizes must be positive");
    require(dep.hidden > 0 && dep.layers > 0 && dep.inner > 0, "dep sizes must be positive");
    require(ner.hidden > 0 && ner.layers > 0, "ner sizes must be positive");
    for (double rate : {shared.bert_dropout, shared.embedding_dropout, dep.lstm_dropout,
                        ner.lstm_dropout}) {
        require(rate >= 0.0 && rate < 1.0, "dropout rates must lie in [0, 1)");
    }
}

nlohmann::json to_json(const MtlConfig& c) {
    return {
        {"setting", to_string(c.setting)},
        {"low_task", to_string(c.low_task)},
        {"warmup_epochs", c.warmup_epochs},
        {"steps_per_epoch", c.steps_per_epoch},
        {"word_budget", c.word_budget},
        {"max_epochs", c.max_epochs},
        {"lr", c.lr},
        {"weight_decay", c.weight_decay},
        {"lr_decay", c.lr_decay},
        {"lr_patience", c.lr_patience},
        {"early_stop", c.early_stop},
        {"grad_clip", c.grad_clip},
        {"dep_embed", c.dep_embed},
        {"ner_embed", c.ner_embed},
        {"seed", c.seed},
        {"d_bert", c.shared.d_bert},
        {"d_casing", c.shared.d_casing},
        {"d_pos", c.shared.d_pos},
        {"bert_dropout", c.shared.bert_dropout},
        {"embedding_dropout", c.shared.embedding_dropout},
        {"dep_hidden", c.dep.hidden},
        {"dep_layers", c.dep.layers},
        {"dep_inner", c.dep.inner},
        {"dep_dropout", c.dep.lstm_dropout},
        {"ner_hidden", c.ner.hidden},
        {"ner_layers", c.ner.layers},
        {"ner_dropout", c.ner.lstm_dropout},
        {"iob_constraints", c.ner.iob_constraints},
    };
}

MtlConfig config_from_json(const nlohmann::json& j) {
    MtlConfig c;
    try {
        c.setting = parse_setting(j.at("setting").get<std::string>());
        c.low_task = parse_task(j.at("low_task").get<std::string>());
        j.at("warmup_epochs").get_to(c.warmup_epochs);
        j.at("steps_per_epoch").get_to(c.steps_per_epoch);
        j.at("word_budget").get_to(c.word_budget);
        j.at("max_epochs").get_to(c.max_epochs);
        j.at("lr").get_to(c.lr);
        j.at("weight_decay").get_to(c.weight_decay);
        j.at("lr_decay").get_to(c.lr_decay);
        j.at("lr_patience").get_to(c.lr_patience);
        j.at("early_stop").get_to(c.early_stop);
        j.at("grad_clip").get_to(c.grad_clip);
        j.at("dep_embed").get_to(c.dep_embed);
        j.at("ner_embed").get_to(c.ner_embed);
        j.at("seed").get_to(c.seed);
        j.at("d_bert").get_to(c.shared.d_bert);
        j.at("d_casing").get_to(c.shared.d_casing);
        j.at("d_pos").get_to(c.shared.d_pos);
        j.at("bert_dropout").get_to(c.shared.bert_dropout);
        j.at("embedding_dropout").get_to(c.shared.embedding_dropout);
        j.at("dep_hidden").get_to(c.dep.hidden);
        j.at("dep_layers").get_to(c.dep.layers);
        j.at("dep_inner").get_to(c.dep.inner);
        j.at("dep_dropout").get_to(c.dep.lstm_dropout);
        j.at("ner_hidden").get_to(c.ner.hidden);
        j.at("ner_layers").get_to(c.ner.layers);
        j.at("ner_dropout").get_to(c.ner.lstm_dropout);
        j.at("iob_constraints").get_to(c.ner.iob_constraints);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed configuration record: ") + e.what());
    }
    return c;
}

void check_compatible(const MtlConfig& stored, const MtlConfig& requested) {
    auto differ = [](const std::string& what, const auto& a, const auto& b) {
        std::ostringstream msg;
        msg << "checkpoint " << what << " is " << a << " but the configuration asks for " << b;
        throw IncompatibleError(msg.str());
    };
    if (stored.setting != requested.setting) {
        differ("setting", to_string(stored.setting), to_string(requested.setting));
    }
    if (stored.low_task != requested.low_task) {
        differ("low_task", to_string(stored.low_task), to_string(requested.low_task));
    }
    const auto a = to_json(stored);
    const auto b = to_json(requested);
    for (const char* key : {"d_bert", "d_casing", "d_pos", "dep_hidden", "dep_layers", "dep_inner",
                            "ner_hidden", "ner_layers", "dep_embed", "ner_embed", "iob_constraints"}) {
        if (a.at(key) != b.at(key)) differ(key, a.at(key).dump(), b.at(key).dump());
    }
}

}  // namespace hmtl::mtl
