#include "hmtl/embed/provider.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hmtl/errors.hpp"
#include "hmtl/ingest/wordpiece.hpp"

namespace hmtl::embed {
namespace {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Window weight for layer l at distance |k| from the centre subtoken.
double mix_weight(std::size_t layer, int distance) {
    if (distance == 0) return 1.0;
    const double depth = static_cast<double>(layer + 1) / static_cast<double>(kProviderLayers);
    return (distance == 1 ? 0.5 : 0.25) * depth;
}

bool is_pad(const std::string& subtoken) { return subtoken == ingest::kPadSubtoken; }

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_f32(std::ostream& out, float f) { write_u32(out, std::bit_cast<std::uint32_t>(f)); }

// Returns false on a clean end of file before any byte was read.
bool read_u32(std::istream& in, std::uint32_t& v, bool eof_ok) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() == 0 && eof_ok) return false;
    if (in.gcount() != 4) throw FormatError("provider file is truncated");
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return true;
}

}  // namespace

HashProvider::HashProvider(std::uint64_t seed, Eigen::Index dim) : seed_(seed), dim_(dim) {
    if (dim <= 0) throw ContractError("hash provider dimension must be positive");
}

Eigen::VectorXd HashProvider::base_vector(const std::string& subtoken) const {
    if (is_pad(subtoken)) return Eigen::VectorXd::Zero(dim_);
    std::uint64_t state = fnv1a(subtoken) ^ (seed_ * 0xd1b54a32d192ed03ULL);
    Eigen::VectorXd v(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
        v(i) = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
}

SubtokenLayers HashProvider::encode(const std::string& /*sentence_id*/,
                                    std::span<const std::string> subtokens) const {
    const auto n = static_cast<Eigen::Index>(subtokens.size());
    Eigen::MatrixXd base(n, dim_);
    for (Eigen::Index i = 0; i < n; ++i) {
        base.row(i) = base_vector(subtokens[static_cast<std::size_t>(i)]).transpose();
    }
    SubtokenLayers out;
    for (std::size_t l = 0; l < kProviderLayers; ++l) {
        out[l] = Eigen::MatrixXd::Zero(n, dim_);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (is_pad(subtokens[static_cast<std::size_t>(i)])) continue;
            for (int k = -2; k <= 2; ++k) {
                const Eigen::Index j = i + k;
                if (j < 0 || j >= n) continue;
                out[l].row(i) += mix_weight(l, std::abs(k)) * base.row(j);
            }
        }
    }
    return out;
}

FileProvider::FileProvider(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open provider file " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw FormatError("provider file has no header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("provider header is not JSON: ") + e.what());
    }
    if (header.value("version", 0u) != kProviderFileVersion) {
        throw FormatError("unsupported provider file version");
    }
    if (header.value("layers", 0u) != kProviderLayers) {
        throw FormatError("provider file must hold exactly 4 layers, header says " +
                          header.value("layers", nlohmann::json(0)).dump());
    }
    dim_ = header.value("d_bert", 0);
    if (dim_ <= 0) throw FormatError("provider header has no positive d_bert");

    std::uint32_t id_len = 0;
    while (read_u32(in, id_len, true)) {
        std::string id(id_len, '\0');
        in.read(id.data(), id_len);
        if (in.gcount() != static_cast<std::streamsize>(id_len)) {
            throw FormatError("provider file is truncated");
        }
        std::uint32_t n = 0;
        read_u32(in, n, false);
        SubtokenLayers layers;
        for (auto& m : layers) m.resize(n, dim_);
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < kProviderLayers; ++l) {
                for (Eigen::Index d = 0; d < dim_; ++d) {
                    std::uint32_t bits = 0;
                    read_u32(in, bits, false);
                    layers[l](i, d) = static_cast<double>(std::bit_cast<float>(bits));
                }
            }
        }
        if (!records_.emplace(std::move(id), std::move(layers)).second) {
            throw FormatError("provider file repeats a sentence id");
        }
    }
}

SubtokenLayers FileProvider::encode(const std::string& sentence_id,
                                    std::span<const std::string> subtokens) const {
    auto it = records_.find(sentence_id);
    if (it == records_.end()) {
        throw LookupError("provider file has no vectors for sentence " + sentence_id);
    }
    const SubtokenLayers& stored = it->second;
    const Eigen::Index real = stored[0].rows();
    const auto n = static_cast<Eigen::Index>(subtokens.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool pad = is_pad(subtokens[static_cast<std::size_t>(i)]);
        if (pad == (i < real)) {
            throw FormatError("sentence " + sentence_id + ": stored " + std::to_string(real) +
                              " subtoken vectors do not match the tokenized input");
        }
    }
    if (n < real) {
        throw FormatError("sentence " + sentence_id + ": more stored vectors than subtokens");
    }
    SubtokenLayers out;
    for (std::size_t l = 0; l < kProviderLayers; ++l) {
        out[l] = Eigen::MatrixXd::Zero(n, dim_);
        out[l].topRows(real) = stored[l];
    }
    return out;
}

void write_provider_file(const std::string& path, Eigen::Index dim,
                         const std::vector<std::pair<std::string, SubtokenLayers>>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write provider file " + path);
    nlohmann::json header = {{"version", kProviderFileVersion}, {"d_bert", dim}, {"layers", kProviderLayers}};
    out << header.dump() << '\n';
    for (const auto& [id, layers] : records) {
        for (const auto& m : layers) {
            if (m.cols() != dim || m.rows() != layers[0].rows()) {
                throw DimensionError("provider record " + id + " has inconsistent shapes");
            }
        }
        write_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        write_u32(out, static_cast<std::uint32_t>(layers[0].rows()));
        for (Eigen::Index i = 0; i < layers[0].rows(); ++i) {
            for (std::size_t l = 0; l < kProviderLayers; ++l) {
                for (Eigen::Index d = 0; d < dim; ++d) {
                    write_f32(out, static_cast<float>(layers[l](i, d)));
                }
            }
        }
    }
    if (!out) throw Error("failed writing provider file " + path);
}

std::unique_ptr<ContextualProvider> make_provider(const ProviderSpec& spec) {
    if (spec.kind == "hash") return std::make_unique<HashProvider>(spec.seed, spec.dim);
    if (spec.kind == "file") {
        auto provider = std::make_unique<FileProvider>(spec.path);
        if (provider->dim() != spec.dim) {
            throw ConfigError("provider file " + spec.path + " has d_bert " +
                              std::to_string(provider->dim()) + ", config expects " +
                              std::to_string(spec.dim));
        }
        return provider;
    }
    throw ConfigError("unknown provider kind '" + spec.kind + "'");
}

}  // namespace hmtl::embed
