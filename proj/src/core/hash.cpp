#include "radarcast/hash.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "radarcast/error.hpp"

namespace radarcast {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state)
{
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::uint64_t fnv1a64(std::string_view text)
{
    return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string to_hex(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string file_hash(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::uint64_t state = 0xcbf29ce484222325ULL;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        const auto got = static_cast<std::size_t>(in.gcount());
        state = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), got), state);
    }
    return to_hex(state);
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
{
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace radarcast
