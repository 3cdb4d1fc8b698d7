#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hmtl::embed {

inline constexpr std::size_t kProviderLayers = 4;

// Per-subtoken outputs of the last four layers of a contextual model; each
// matrix is (subtokens x d_bert).
using SubtokenLayers = std::array<Eigen::MatrixXd, kProviderLayers>;

// Frozen source of contextual subtoken vectors. Implementations are
// deterministic and yield zero vectors at [PAD] subtokens.
class ContextualProvider {
public:
    virtual ~ContextualProvider() = default;
    virtual Eigen::Index dim() const = 0;
    virtual SubtokenLayers encode(const std::string& sentence_id,
                                  std::span<const std::string> subtokens) const = 0;
};

// Stand-in language model: a seeded hash gives every subtoken a base
// vector, and layer l mixes each base vector with its neighbours in a +-2
// window using fixed layer-specific weights.
class HashProvider final : public ContextualProvider {
public:
    explicit HashProvider(std::uint64_t seed, Eigen::Index dim = 768);

    Eigen::Index dim() const override { return dim_; }
    SubtokenLayers encode(const std::string& sentence_id,
                          std::span<const std::string> subtokens) const override;

    Eigen::VectorXd base_vector(const std::string& subtoken) const;

private:
    std::uint64_t seed_;
    Eigen::Index dim_;
};

// Vectors exported from an external model, keyed by sentence id.
//
// File layout: one UTF-8 JSON header line {"version":1,"d_bert":D,"layers":4}
// followed by records until end of file. A record is a uint32 id length,
// the id bytes, a uint32 subtoken count n, then n*4*D float32 values ordered
// subtoken-major, then layer, then dimension. All integers and floats are
// little-endian. Records hold real subtokens only; [PAD] positions are
// zero-filled at lookup.
class FileProvider final : public ContextualProvider {
public:
    explicit FileProvider(const std::string& path);

    Eigen::Index dim() const override { return dim_; }
    SubtokenLayers encode(const std::string& sentence_id,
                          std::span<const std::string> subtokens) const override;
    std::size_t size() const { return records_.size(); }

private:
    Eigen::Index dim_ = 0;
    std::map<std::string, SubtokenLayers> records_;
};

inline constexpr std::uint32_t kProviderFileVersion = 1;

void write_provider_file(const std::string& path, Eigen::Index dim,
                         const std::vector<std::pair<std::string, SubtokenLayers>>& records);

// How to rebuild a provider: kind "hash" uses seed and dim, kind "file" the path.
struct ProviderSpec {
    std::string kind = "hash";
    std::uint64_t seed = 0;
    Eigen::Index dim = 768;
    std::string path;
    bool operator==(const ProviderSpec&) const = default;
};

std::unique_ptr<ContextualProvider> make_provider(const ProviderSpec& spec);

}  // namespace hmtl::embed
