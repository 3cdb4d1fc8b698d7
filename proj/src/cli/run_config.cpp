#include "hmtl/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "hmtl/errors.hpp"

namespace hmtl::cli {
namespace {

using mtl::Index;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* last = value.data() + value.size();
    const auto res = std::from_chars(value.data(), last, out);
    if (value.empty() || res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError("invalid value '" + value + "' for " + key);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("invalid boolean '" + value + "' for " + key);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter number(T mtl::MtlConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) {
        c.mtl.*field = parse_number<T>(k, v);
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["setting"] = [](RunConfig& c, const std::string&, const std::string& v) {
            c.mtl.setting = mtl::parse_setting(v);
        };
        t["low_task"] = [](RunConfig& c, const std::string&, const std::string& v) {
            c.mtl.low_task = mtl::parse_task(v);
        };
        t["warmup_epochs"] = number(&mtl::MtlConfig::warmup_epochs);
        t["steps_per_epoch"] = number(&mtl::MtlConfig::steps_per_epoch);
        t["word_budget"] = number(&mtl::MtlConfig::word_budget);
        t["max_epochs"] = number(&mtl::MtlConfig::max_epochs);
        t["lr"] = number(&mtl::MtlConfig::lr);
        t["weight_decay"] = number(&mtl::MtlConfig::weight_decay);
        t["lr_decay"] = number(&mtl::MtlConfig::lr_decay);
        t["lr_patience"] = number(&mtl::MtlConfig::lr_patience);
        t["early_stop"] = number(&mtl::MtlConfig::early_stop);
        t["grad_clip"] = number(&mtl::MtlConfig::grad_clip);
        t["dep_embed"] = number(&mtl::MtlConfig::dep_embed);
        t["ner_embed"] = number(&mtl::MtlConfig::ner_embed);
        t["seed"] = number(&mtl::MtlConfig::seed);
        t["d_bert"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.shared.d_bert = parse_number<Index>(k, v);
            c.provider.dim = c.mtl.shared.d_bert;
        };
        t["d_casing"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.shared.d_casing = parse_number<Index>(k, v);
        };
        t["d_pos"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.shared.d_pos = parse_number<Index>(k, v);
        };
        t["bert_dropout"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.shared.bert_dropout = parse_number<double>(k, v);
        };
        t["embedding_dropout"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.shared.embedding_dropout = parse_number<double>(k, v);
        };
        t["dep_hidden"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.dep.hidden = parse_number<Index>(k, v);
        };
        t["dep_layers"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.dep.layers = parse_number<int>(k, v);
        };
        t["dep_inner"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.dep.inner = parse_number<Index>(k, v);
        };
        t["dep_dropout"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.dep.lstm_dropout = parse_number<double>(k, v);
        };
        t["ner_hidden"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.ner.hidden = parse_number<Index>(k, v);
        };
        t["ner_layers"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.ner.layers = parse_number<int>(k, v);
        };
        t["ner_dropout"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.ner.lstm_dropout = parse_number<double>(k, v);
        };
        t["iob_constraints"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.mtl.ner.iob_constraints = parse_bool(k, v);
        };
        auto path = [](std::string RunConfig::*field) {
            return [field](RunConfig& c, const std::string&, const std::string& v) { c.*field = v; };
        };
        t["dep_train"] = path(&RunConfig::dep_train);
        t["dep_dev"] = path(&RunConfig::dep_dev);
        t["dep_test"] = path(&RunConfig::dep_test);
        t["ner_train"] = path(&RunConfig::ner_train);
        t["ner_dev"] = path(&RunConfig::ner_dev);
        t["ner_test"] = path(&RunConfig::ner_test);
        t["vocab"] = path(&RunConfig::vocab);
        t["out_dir"] = path(&RunConfig::out_dir);
        t["lowercase"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.lowercase = parse_bool(k, v);
        };
        t["provider"] = [](RunConfig& c, const std::string&, const std::string& v) {
            if (v != "hash" && v != "file") throw ConfigError("provider must be hash or file, got '" + v + "'");
            c.provider.kind = v;
        };
        t["provider_path"] = [](RunConfig& c, const std::string&, const std::string& v) {
            c.provider.path = v;
        };
        t["provider_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.provider.seed = parse_number<std::uint64_t>(k, v);
        };
        return t;
    }();
    return table;
}

const std::vector<std::string> kPathKeys = {"dep_train", "dep_dev", "dep_test", "ner_train",
                                            "ner_dev",   "ner_test", "vocab",   "provider_path"};

std::string* path_field(RunConfig& c, const std::string& key) {
    if (key == "dep_train") return &c.dep_train;
    if (key == "dep_dev") return &c.dep_dev;
    if (key == "dep_test") return &c.dep_test;
    if (key == "ner_train") return &c.ner_train;
    if (key == "ner_dev") return &c.ner_dev;
    if (key == "ner_test") return &c.ner_test;
    if (key == "vocab") return &c.vocab;
    if (key == "provider_path") return &c.provider.path;
    if (key == "out_dir") return &c.out_dir;
    return nullptr;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second(*this, key, value);
}

const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

std::string RunConfig::to_text() const {
    std::map<std::string, std::string> entries;
    const nlohmann::json j = mtl::to_json(mtl);
    for (const auto& [key, value] : j.items()) {
        entries[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    entries["dep_train"] = dep_train;
    entries["dep_dev"] = dep_dev;
    entries["dep_test"] = dep_test;
    entries["ner_train"] = ner_train;
    entries["ner_dev"] = ner_dev;
    entries["ner_test"] = ner_test;
    entries["vocab"] = vocab;
    entries["lowercase"] = lowercase ? "true" : "false";
    entries["provider"] = provider.kind;
    entries["provider_path"] = provider.path;
    entries["provider_seed"] = std::to_string(provider.seed);
    entries["out_dir"] = out_dir;
    std::ostringstream out;
    for (const auto& [key, value] : entries) {
        if (!value.empty()) out << key << '=' << value << '\n';
    }
    return out.str();
}

void RunConfig::validate() const {
    mtl.validate();
    if (vocab.empty()) throw ConfigError("vocab (subword vocabulary path) is required");
    for (mtl::Task t : mtl.tasks()) {
        const std::string& train = t == mtl::Task::Dep ? dep_train : ner_train;
        if (train.empty()) {
            throw ConfigError("setting " + std::string(mtl::to_string(mtl.setting)) + " needs " +
                              std::string(mtl::to_string(t)) + "_train");
        }
    }
    if (provider.kind == "file" && provider.path.empty()) {
        throw ConfigError("provider=file needs provider_path");
    }
    RunConfig copy = *this;
    for (const auto& key : kPathKeys) {
        const std::string& p = *path_field(copy, key);
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw ConfigError(key + " refers to a missing file: " + p);
        }
    }
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(number) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            c.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(number) + ": " + e.what());
        }
    }
    for (const auto& key : kPathKeys) {
        std::string* p = path_field(c, key);
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base_dir / *p).string();
    }
    if (std::filesystem::path(c.out_dir).is_relative()) c.out_dir = (base_dir / c.out_dir).string();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    RunConfig c = parse_run_config(buffer.str(), std::filesystem::path(path).parent_path());
    c.validate();
    return c;
}

}  // namespace hmtl::cli
