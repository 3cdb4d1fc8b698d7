#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hmtl/embed/provider.hpp"
#include "hmtl/mtl/model.hpp"

namespace hmtl::mtl {

inline constexpr char kCheckpointMagic[8] = {'H', 'M', 'T', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything besides the weights needed to rebuild and feed a model.
struct CheckpointMeta {
    MtlConfig config;
    Vocabularies vocabs;
    std::vector<std::string> subwords;
    bool lowercase = false;
    embed::ProviderSpec provider;
};

// Layout: 8-byte magic "HMTLCKPT", uint32 version, uint64 manifest length,
// a UTF-8 JSON manifest (config, vocabularies, subword vocabulary, provider,
// and the ordered parameter list with names and shapes), then each
// parameter's values as row-major float64. Integers and floats are
// little-endian.
void save_checkpoint(const std::string& path, Model& model, const CheckpointMeta& meta);

struct LoadedModel {
    CheckpointMeta meta;
    std::unique_ptr<Model> model;
};

// Throws FormatError on a bad magic, version or truncated file.
LoadedModel load_checkpoint(const std::string& path);

// As above, then IncompatibleError when the stored architecture differs
// from `expected`.
LoadedModel load_checkpoint(const std::string& path, const MtlConfig& expected);

}  // namespace hmtl::mtl
