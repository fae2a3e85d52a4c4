#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace radarcast {

struct TensorRecord {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<float> data;
};

/// Versioned single-file model container: a kind tag, a JSON metadata
/// document (config, counters, normalization) and named float32 tensors.
struct CheckpointContainer {
    std::string kind;
    nlohmann::json meta;
    std::vector<TensorRecord> tensors;

    const TensorRecord& tensor(const std::string& name) const;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

/// Exact bytes write_checkpoint stores.
std::string serialize_checkpoint(const CheckpointContainer& ckpt);

void write_checkpoint(const CheckpointContainer& ckpt, const std::filesystem::path& path);

/// Throws BadMagic / TruncatedFile / VersionMismatch, and InvalidArgument
/// when `expected_kind` is non-empty and differs.
CheckpointContainer read_checkpoint(const std::filesystem::path& path, const std::string& expected_kind = "");

}  // namespace radarcast
