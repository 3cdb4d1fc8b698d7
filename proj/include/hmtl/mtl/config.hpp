#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmtl/depparse/parser.hpp"
#include "hmtl/embed/shared_layer.hpp"
#include "hmtl/nertag/tagger.hpp"

namespace hmtl::mtl {

using ad::Index;

enum class Task { Dep, Ner };
enum class Setting { Single, Flat, HierPredHard, HierPredSoft, HierRepr };

std::string_view to_string(Task t);
std::string_view to_string(Setting s);
Task parse_task(std::string_view text);
Setting parse_setting(std::string_view text);
inline Task other(Task t) { return t == Task::Dep ? Task::Ner : Task::Dep; }

struct MtlConfig {
    Setting setting = Setting::Single;
    // For `single` this is the only task; for the others the low-level one.
    Task low_task = Task::Dep;
    int warmup_epochs = 5;
    int steps_per_epoch = 100;
    std::size_t word_budget = 500;
    int max_epochs = 100;
    double lr = 0.004;
    double weight_decay = 0.001;
    double lr_decay = 0.1286;
    int lr_patience = 3;
    int early_stop = 10;
    double grad_clip = 5.0;
    Index dep_embed = 128;
    Index ner_embed = 128;
    std::uint64_t seed = 1;
    embed::SharedConfig shared;
    depparse::DepConfig dep;
    nertag::NerConfig ner;

    Task high_task() const { return other(low_task); }
    bool hierarchical() const;
    bool uses(Task t) const;
    std::vector<Task> tasks() const;
    void validate() const;
};

nlohmann::json to_json(const MtlConfig& c);
MtlConfig config_from_json(const nlohmann::json& j);

// Throws IncompatibleError naming the first architectural difference
// (setting, task roles or any layer size).
void check_compatible(const MtlConfig& stored, const MtlConfig& requested);

}  // namespace hmtl::mtl
