#include "radarcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace radarcast {

void PreprocessSpec::validate() const
{
    if (!(clip_min_dbz < clip_max_dbz))
        throw ConfigError("clip_min_dbz must be below clip_max_dbz");
    if (!(quantum_dbz > 0.0))
        throw ConfigError("quantum_dbz must be positive");
    if (!(zr_a > 0.0) || !(zr_b > 0.0))
        throw ConfigError("zr_a and zr_b must be positive");
}

int PreprocessSpec::dynamic_range_levels() const
{
    return static_cast<int>(std::llround((clip_max_dbz - clip_min_dbz) / quantum_dbz)) + 1;
}

void to_json(nlohmann::json& j, const PreprocessSpec& s)
{
    j = {{"clip_min_dbz", s.clip_min_dbz},
         {"clip_max_dbz", s.clip_max_dbz},
         {"quantum_dbz", s.quantum_dbz},
         {"zr_a", s.zr_a},
         {"zr_b", s.zr_b}};
}

void from_json(const nlohmann::json& j, PreprocessSpec& s)
{
    const PreprocessSpec d;
    s.clip_min_dbz = j.value("clip_min_dbz", d.clip_min_dbz);
    s.clip_max_dbz = j.value("clip_max_dbz", d.clip_max_dbz);
    s.quantum_dbz = j.value("quantum_dbz", d.quantum_dbz);
    s.zr_a = j.value("zr_a", d.zr_a);
    s.zr_b = j.value("zr_b", d.zr_b);
}

PreprocessSpec load_preprocess_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    const nlohmann::json& node = doc.contains("preprocess") ? doc["preprocess"] : doc;
    PreprocessSpec spec;
    try {
        spec = node.get<PreprocessSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    spec.validate();
    return spec;
}

double clip_and_quantize(double dbz, const PreprocessSpec& spec)
{
    const double clipped = std::clamp(dbz, spec.clip_min_dbz, spec.clip_max_dbz);
    // std::round rounds halfway cases away from zero.
    const double level = std::round(clipped / spec.quantum_dbz);
    return std::clamp(level * spec.quantum_dbz, spec.clip_min_dbz, spec.clip_max_dbz);
}

ReflectivityField clip_and_quantize(const ReflectivityField& field, const PreprocessSpec& spec)
{
    std::size_t bad = 0;
    for (float v : field.values())
        if (!std::isfinite(v))
            ++bad;
    if (bad > 0)
        throw NonFiniteInput(std::to_string(bad) + " non-finite pixel(s) in reflectivity field", bad);

    ReflectivityField out(field.height(), field.width());
    out.resolution_km = field.resolution_km;
    auto src = field.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<float>(clip_and_quantize(static_cast<double>(src[i]), spec));
    return out;
}

double dbz_to_rainrate(double dbz, const PreprocessSpec& spec)
{
    const double z = std::pow(10.0, dbz / 10.0);
    return std::pow(z / spec.zr_a, 1.0 / spec.zr_b);
}

double rainrate_to_dbz(double rain_mmh, const PreprocessSpec& spec)
{
    if (rain_mmh < 0.0 || std::isnan(rain_mmh))
        throw InvalidArgument("negative rain rate " + std::to_string(rain_mmh));
    if (rain_mmh == 0.0)
        return spec.clip_min_dbz;
    return 10.0 * std::log10(spec.zr_a * std::pow(rain_mmh, spec.zr_b));
}

RainRateField dbz_to_rainrate(const ReflectivityField& field, const PreprocessSpec& spec)
{
    RainRateField out(field.height(), field.width());
    out.resolution_km = field.resolution_km;
    auto src = field.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<float>(dbz_to_rainrate(static_cast<double>(src[i]), spec));
    return out;
}

ReflectivityField rainrate_to_dbz(const RainRateField& field, const PreprocessSpec& spec)
{
    ReflectivityField out(field.height(), field.width());
    out.resolution_km = field.resolution_km;
    auto src = field.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = static_cast<float>(rainrate_to_dbz(static_cast<double>(src[i]), spec));
    return out;
}

}  // namespace radarcast
