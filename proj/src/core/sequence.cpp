#include "radarcast/sequence.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "radarcast/rng.hpp"

namespace radarcast {

void RadarSequence::validate() const
{
    for (std::size_t t = 1; t < frames.size(); ++t)
        if (!frames[t].same_shape(frames[0]))
            throw ShapeMismatch("frame " + std::to_string(t) + " differs in shape from frame 0");
    if (timestep_minutes <= 0 || timestep_minutes > 0xFFFF)
        throw InvalidArgument("timestep_minutes out of range");
}

AugmentParams draw_augment(int height, int width, int crop_h, int crop_w, std::uint64_t seed)
{
    if (crop_h <= 0 || crop_w <= 0 || crop_h > height || crop_w > width)
        throw InvalidArgument("crop " + std::to_string(crop_h) + "x" + std::to_string(crop_w) +
                              " does not fit in frame " + std::to_string(height) + "x" +
                              std::to_string(width));
    Rng rng(seed);
    AugmentParams p;
    p.row_offset = rng.uniform_int(0, height - crop_h);
    p.col_offset = rng.uniform_int(0, width - crop_w);
    p.rotation = rng.uniform_int(0, 3);
    p.flip = rng.below(2) == 1;
    return p;
}

namespace {

ReflectivityField rotate_quarter(const ReflectivityField& in)
{
    // Counter-clockwise: out(r, c) = in(c, W - 1 - r), output is W x H.
    const int h = in.height();
    const int w = in.width();
    ReflectivityField out(w, h);
    out.resolution_km = in.resolution_km;
    for (int r = 0; r < w; ++r)
        for (int c = 0; c < h; ++c)
            out(r, c) = in(c, w - 1 - r);
    return out;
}

}  // namespace

ReflectivityField apply_augment(const ReflectivityField& frame, const AugmentParams& params, int crop_h, int crop_w)
{
    if (params.row_offset < 0 || params.col_offset < 0 ||
        params.row_offset + crop_h > frame.height() || params.col_offset + crop_w > frame.width())
        throw InvalidArgument("crop window outside frame");
    ReflectivityField out(crop_h, crop_w);
    out.resolution_km = frame.resolution_km;
    for (int r = 0; r < crop_h; ++r)
        for (int c = 0; c < crop_w; ++c)
            out(r, c) = frame(params.row_offset + r, params.col_offset + c);
    for (int k = 0; k < (params.rotation & 3); ++k)
        out = rotate_quarter(out);
    if (params.flip) {
        for (int r = 0; r < out.height(); ++r)
            for (int c = 0; c < out.width() / 2; ++c)
                std::swap(out(r, c), out(r, out.width() - 1 - c));
    }
    return out;
}

RadarSequence apply_augment(const RadarSequence& seq, const AugmentParams& params, int crop_h, int crop_w)
{
    RadarSequence out;
    out.timestep_minutes = seq.timestep_minutes;
    out.start_time = seq.start_time;
    out.frames.reserve(seq.frames.size());
    for (const auto& f : seq.frames)
        out.frames.push_back(apply_augment(f, params, crop_h, crop_w));
    return out;
}

RadarSequence augment(const RadarSequence& seq, std::pair<int, int> crop_hw, std::uint64_t seed, int patch)
{
    seq.validate();
    const auto [crop_h, crop_w] = crop_hw;
    if (patch <= 0 || crop_h % patch != 0 || crop_w % patch != 0)
        throw InvalidArgument("crop dims must be multiples of the patch size " + std::to_string(patch));
    const AugmentParams params = draw_augment(seq.height(), seq.width(), crop_h, crop_w, seed);
    return apply_augment(seq, params, crop_h, crop_w);
}

namespace {

template <typename T>
void put_le(std::string& buf, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return static_cast<T>(v);
}

}  // namespace

void write_sequence(const RadarSequence& seq, const std::filesystem::path& path)
{
    seq.validate();
    const auto t = static_cast<std::uint32_t>(seq.frames.size());
    const auto h = static_cast<std::uint32_t>(seq.height());
    const auto w = static_cast<std::uint32_t>(seq.width());

    std::string buf;
    buf.reserve(kRprcHeaderBytes + static_cast<std::size_t>(t) * h * w * 4);
    buf.append("RPRC", 4);
    put_le<std::uint16_t>(buf, kRprcVersion);
    put_le<std::uint32_t>(buf, t);
    put_le<std::uint32_t>(buf, h);
    put_le<std::uint32_t>(buf, w);
    put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(seq.timestep_minutes));
    put_le<std::uint32_t>(buf, seq.start_time.value_or(0));
    for (const auto& f : seq.frames)
        for (float v : f.values())
            put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

RadarSequence read_sequence(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::array<unsigned char, kRprcHeaderBytes> hdr{};
    in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
    if (static_cast<std::size_t>(in.gcount()) < 4 || std::memcmp(hdr.data(), "RPRC", 4) != 0)
        throw BadMagic(path.string() + ": not an RPRC file");
    if (static_cast<std::size_t>(in.gcount()) < hdr.size())
        throw TruncatedFile(path.string() + ": header truncated");
    const auto version = get_le<std::uint16_t>(hdr.data() + 4);
    if (version != kRprcVersion)
        throw VersionMismatch(path.string() + ": RPRC version " + std::to_string(version) +
                              ", expected " + std::to_string(kRprcVersion));
    const auto t = get_le<std::uint32_t>(hdr.data() + 6);
    const auto h = get_le<std::uint32_t>(hdr.data() + 10);
    const auto w = get_le<std::uint32_t>(hdr.data() + 14);
    const auto step = get_le<std::uint16_t>(hdr.data() + 18);
    const auto start = get_le<std::uint32_t>(hdr.data() + 20);

    const std::size_t count = static_cast<std::size_t>(t) * h * w;
    std::vector<unsigned char> payload(count * 4);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
        throw TruncatedFile(path.string() + ": payload has " + std::to_string(in.gcount()) +
                            " of " + std::to_string(payload.size()) + " bytes");

    RadarSequence seq;
    seq.timestep_minutes = step;
    if (start != 0)
        seq.start_time = start;
    seq.frames.reserve(t);
    const unsigned char* p = payload.data();
    for (std::uint32_t f = 0; f < t; ++f) {
        ReflectivityField frame(static_cast<int>(h), static_cast<int>(w));
        for (float& v : frame.values()) {
            v = std::bit_cast<float>(get_le<std::uint32_t>(p));
            p += 4;
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

}  // namespace radarcast
