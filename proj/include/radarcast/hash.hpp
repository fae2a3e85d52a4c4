#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace radarcast {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text);

/// Hash of a file's bytes rendered as 16 lowercase hex digits.
std::string file_hash(const std::filesystem::path& path);

std::string to_hex(std::uint64_t value);

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stable derivation of a child seed from a parent seed and an index.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace radarcast
