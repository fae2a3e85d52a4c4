#pragma once

#include <filesystem>

#include "json.hpp"
#include "radarcast/field.hpp"

namespace radarcast {

struct PreprocessSpec {
    double clip_min_dbz = 0.0;
    double clip_max_dbz = 60.0;
    double quantum_dbz = 0.1;
    double zr_a = 200.0;
    double zr_b = 1.6;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Number of representable levels after clipping and quantization (601 by default).
    int dynamic_range_levels() const;

    friend bool operator==(const PreprocessSpec&, const PreprocessSpec&) = default;
};

void to_json(nlohmann::json& j, const PreprocessSpec& s);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, PreprocessSpec& s);

/// Reads the preprocess keys from a JSON config file. Keys may sit at the
/// top level or under a "preprocess" object; missing keys keep defaults.
PreprocessSpec load_preprocess_spec(const std::filesystem::path& path);

/// Clip to [clip_min, clip_max] and round to the quantum, half away from zero.
double clip_and_quantize(double dbz, const PreprocessSpec& spec = {});

/// Throws NonFiniteInput carrying the count of offending pixels.
ReflectivityField clip_and_quantize(const ReflectivityField& field, const PreprocessSpec& spec = {});

/// Marshall-Palmer Z = a R^b inverted for R, with Z = 10^(dBZ/10).
double dbz_to_rainrate(double dbz, const PreprocessSpec& spec = {});

/// dBZ = 10 log10(a R^b). R = 0 maps to the clip floor.
double rainrate_to_dbz(double rain_mmh, const PreprocessSpec& spec = {});

RainRateField dbz_to_rainrate(const ReflectivityField& field, const PreprocessSpec& spec = {});

/// Throws InvalidArgument on negative rain rates. Not quantized.
ReflectivityField rainrate_to_dbz(const RainRateField& field, const PreprocessSpec& spec = {});

}  // namespace radarcast
