#include "radarcast/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "radarcast/error.hpp"

namespace radarcast {

namespace {

template <typename T>
void put(std::string& buf, T value)
{
    const auto u = static_cast<std::uint64_t>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
public:
    Reader(const std::string& data, std::string origin) : data_(data), origin_(std::move(origin)) {}

    template <typename T>
    T get()
    {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::string bytes(std::size_t n)
    {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n)
    {
        if (pos_ + n > data_.size())
            throw TruncatedFile(origin_ + ": checkpoint truncated at byte " + std::to_string(pos_));
    }

    const std::string& data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace

const TensorRecord& CheckpointContainer::tensor(const std::string& name) const
{
    for (const auto& t : tensors)
        if (t.name == name)
            return t;
    throw FormatError("checkpoint has no tensor '" + name + "'");
}

std::string serialize_checkpoint(const CheckpointContainer& ckpt)
{
    std::string buf("RCKP", 4);
    put<std::uint16_t>(buf, kCheckpointVersion);
    put<std::uint32_t>(buf, ckpt.kind.size());
    buf += ckpt.kind;
    const std::string meta = ckpt.meta.dump();
    put<std::uint64_t>(buf, meta.size());
    buf += meta;
    put<std::uint32_t>(buf, ckpt.tensors.size());
    for (const auto& t : ckpt.tensors) {
        put<std::uint32_t>(buf, t.name.size());
        buf += t.name;
        put<std::uint32_t>(buf, t.shape.size());
        std::int64_t count = 1;
        for (auto d : t.shape) {
            put<std::int64_t>(buf, d);
            count *= d;
        }
        if (count != static_cast<std::int64_t>(t.data.size()))
            throw InvalidArgument("tensor '" + t.name + "' shape does not match its data");
        for (float v : t.data)
            put<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
    }
    return buf;
}

void write_checkpoint(const CheckpointContainer& ckpt, const std::filesystem::path& path)
{
    const std::string buf = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

CheckpointContainer read_checkpoint(const std::filesystem::path& path, const std::string& expected_kind)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 4 || data.compare(0, 4, "RCKP") != 0)
        throw BadMagic(path.string() + ": not a checkpoint file");
    Reader r(data, path.string());
    r.bytes(4);
    const auto version = r.get<std::uint16_t>();
    if (version != kCheckpointVersion)
        throw VersionMismatch(path.string() + ": checkpoint version " + std::to_string(version));

    CheckpointContainer ckpt;
    ckpt.kind = r.bytes(r.get<std::uint32_t>());
    if (!expected_kind.empty() && ckpt.kind != expected_kind)
        throw InvalidArgument(path.string() + ": expected a " + expected_kind + " checkpoint, found " + ckpt.kind);
    try {
        ckpt.meta = nlohmann::json::parse(r.bytes(r.get<std::uint64_t>()));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad metadata: " + e.what());
    }
    const auto n = r.get<std::uint32_t>();
    ckpt.tensors.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        TensorRecord t;
        t.name = r.bytes(r.get<std::uint32_t>());
        const auto ndim = r.get<std::uint32_t>();
        std::int64_t count = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            t.shape.push_back(r.get<std::int64_t>());
            count *= t.shape.back();
        }
        if (count < 0)
            throw FormatError(path.string() + ": negative tensor size");
        t.data.resize(static_cast<std::size_t>(count));
        for (auto& v : t.data)
            v = std::bit_cast<float>(r.get<std::uint32_t>());
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

}  // namespace radarcast
