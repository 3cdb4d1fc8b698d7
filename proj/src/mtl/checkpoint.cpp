#include "hmtl/mtl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmtl/errors.hpp"

namespace hmtl::mtl {
namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
        throw FormatError("checkpoint is truncated");
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
}

nlohmann::json vocab_json(const embed::Vocabulary& v) {
    return {{"entries", v.entries()}, {"pad", v.has_pad()}, {"unk", v.has_unk()}};
}

embed::Vocabulary vocab_from(const nlohmann::json& j) {
    return embed::Vocabulary(j.at("entries").get<std::vector<std::string>>(), j.at("pad").get<bool>(),
                             j.at("unk").get<bool>());
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model, const CheckpointMeta& meta) {
    nlohmann::json params = nlohmann::json::array();
    auto list = model.parameters();
    for (auto* p : list) {
        params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
    }
    const nlohmann::json manifest = {
        {"config", to_json(model.config())},
        {"vocabs",
         {{"xpos", vocab_json(model.vocabs().xpos)},
          {"deprels", vocab_json(model.vocabs().deprels)},
          {"ner_tags", vocab_json(model.vocabs().ner_tags)}}},
        {"subwords", meta.subwords},
        {"lowercase", meta.lowercase},
        {"provider",
         {{"kind", meta.provider.kind},
          {"seed", meta.provider.seed},
          {"dim", meta.provider.dim},
          {"path", meta.provider.path}}},
        {"parameters", params},
    };
    const std::string text = manifest.dump();

    // Write to a sibling file first so a failed save never leaves a partial checkpoint.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write checkpoint " + path);
        out.write(kCheckpointMagic, sizeof kCheckpointMagic);
        put_le<std::uint32_t>(out, kCheckpointVersion);
        put_le<std::uint64_t>(out, text.size());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (auto* p : list) {
            for (Index r = 0; r < p->value.rows(); ++r) {
                for (Index c = 0; c < p->value.cols(); ++c) {
                    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p->value(r, c)));
                }
            }
        }
        if (!out) throw Error("failed writing checkpoint " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move checkpoint into " + path);
}

LoadedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path);
    char magic[sizeof kCheckpointMagic];
    in.read(magic, sizeof magic);
    if (in.gcount() != sizeof magic || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw FormatError(path + " is not a checkpoint");
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    const auto length = get_le<std::uint64_t>(in);
    if (length > (1ULL << 32)) throw FormatError("checkpoint manifest length is implausible");
    std::string text(length, '\0');
    in.read(text.data(), static_cast<std::streamsize>(length));
    if (in.gcount() != static_cast<std::streamsize>(length)) throw FormatError("checkpoint is truncated");

    LoadedModel out;
    nlohmann::json manifest;
    std::vector<std::tuple<std::string, Index, Index>> shapes;
    try {
        manifest = nlohmann::json::parse(text);
        out.meta.config = config_from_json(manifest.at("config"));
        const auto& v = manifest.at("vocabs");
        out.meta.vocabs = {vocab_from(v.at("xpos")), vocab_from(v.at("deprels")),
                           vocab_from(v.at("ner_tags"))};
        out.meta.subwords = manifest.at("subwords").get<std::vector<std::string>>();
        out.meta.lowercase = manifest.at("lowercase").get<bool>();
        const auto& p = manifest.at("provider");
        out.meta.provider = {p.at("kind").get<std::string>(), p.at("seed").get<std::uint64_t>(),
                             p.at("dim").get<Index>(), p.at("path").get<std::string>()};
        for (const auto& entry : manifest.at("parameters")) {
            shapes.emplace_back(entry.at("name").get<std::string>(), entry.at("rows").get<Index>(),
                                entry.at("cols").get<Index>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint manifest is malformed: ") + e.what());
    }
    out.model = std::make_unique<Model>(out.meta.config, out.meta.vocabs);
    auto params = out.model->parameters();
    if (params.size() != shapes.size()) throw FormatError("checkpoint parameter list does not match its config");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, rows, cols] = shapes[i];
        if (params[i]->name != name || params[i]->value.rows() != rows || params[i]->value.cols() != cols) {
            throw FormatError("checkpoint parameter " + name + " does not match its config");
        }
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) {
                params[i]->value(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(in));
            }
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint has trailing bytes");
    return out;
}

LoadedModel load_checkpoint(const std::string& path, const MtlConfig& expected) {
    LoadedModel out = load_checkpoint(path);
    check_compatible(out.meta.config, expected);
    return out;
}

}  // namespace hmtl::mtl
