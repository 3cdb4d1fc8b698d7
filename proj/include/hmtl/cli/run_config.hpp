#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmtl/embed/provider.hpp"
#include "hmtl/mtl/config.hpp"

namespace hmtl::cli {

// Flat key=value run description: every MtlConfig field plus data paths and
// the provider. Blank lines and lines starting with '#' are ignored.
struct RunConfig {
    mtl::MtlConfig mtl;
    std::string dep_train, dep_dev, dep_test;
    std::string ner_train, ner_dev, ner_test;
    std::string vocab;
    bool lowercase = false;
    embed::ProviderSpec provider;  // provider.dim mirrors mtl.shared.d_bert
    std::string out_dir = "run";

    // Sets one key; throws ConfigError on an unknown key or a bad value.
    void set(const std::string& key, const std::string& value);
    // Resolved config in the same key=value form, keys sorted.
    std::string to_text() const;
    // Checks setting/task requirements and that every referenced file exists.
    void validate() const;
};

// Every key RunConfig::set accepts.
const std::vector<std::string>& run_config_keys();

// Relative paths are resolved against the directory of the config file.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir);

}  // namespace hmtl::cli
