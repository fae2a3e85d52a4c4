#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "radarcast/preprocess.hpp"
#include "radarcast/sequence.hpp"

namespace radarcast {

template <typename T>
struct Range {
    T lo{};
    T hi{};
    bool valid() const { return lo <= hi; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Parameters of the advected-cell precipitation generator.
struct SynthSpec {
    int height = 64;
    int width = 64;
    int n_frames = 12;
    Range<int> n_cells{2, 5};
    Range<double> cell_sigma_px{3.0, 7.0};   ///< major-axis Gaussian width
    Range<double> cell_aspect{0.5, 1.0};     ///< minor / major axis ratio
    Range<double> peak_dbz{20.0, 56.0};
    double peak_skew = 2.0;                   ///< peak = lo + (hi - lo) * u^skew
    std::array<Range<double>, 2> advection_px_per_step{{{-2.0, 2.0}, {-2.0, 2.0}}};  ///< (row, col)
    Range<double> growth_rate_per_step{0.95, 1.05};
    double background_noise_dbz = 0.0;
    std::uint64_t seed = 0;
    int patch_size = 8;                       ///< frame dims must be multiples of this

    /// Throws ConfigError.
    void validate() const;
    friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);

/// Reads a spec from JSON ("synth" section or top level). The name
/// "default" yields the built-in spec.
SynthSpec load_synth_spec(const std::string& path_or_default);

/// Each frame is the pixelwise max over anisotropic Gaussian cells that move
/// by their advection vector and scale their peak by their growth rate each
/// step, plus background noise, then clipped and quantized.
RadarSequence generate_sequence(const SynthSpec& spec, const PreprocessSpec& preprocess = {});

enum class Split { train, val, test };

std::string to_string(Split split);
Split split_from_string(const std::string& text);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
};

/// Split from a multiplicative hash of the seed modulo 1000: every block of
/// 1000 consecutive seeds splits in exactly the requested proportions, and a
/// sequence's split never depends on how many others exist.
Split split_for_seed(std::uint64_t seed, const SplitFractions& fractions = {});

struct DatasetEntry {
    std::string filename;
    std::uint64_t seed = 0;
    Split split = Split::train;
};

struct DatasetManifest {
    std::filesystem::path directory;
    std::vector<DatasetEntry> entries;

    static DatasetManifest load(const std::filesystem::path& manifest_path);
    void save(const std::filesystem::path& manifest_path) const;

    std::vector<DatasetEntry> entries_in(Split split) const;
    std::vector<RadarSequence> load_split(Split split) const;
};

inline constexpr const char* kManifestName = "manifest.txt";

/// Writes n_sequences RPRC files (seeds spec.seed + i), a manifest.txt and
/// the resolved spec as synth_spec.json. Returns the manifest.
DatasetManifest generate_dataset(const SynthSpec& spec, int n_sequences, const std::filesystem::path& out_dir,
                                 const SplitFractions& fractions = {}, const PreprocessSpec& preprocess = {});

}  // namespace radarcast
