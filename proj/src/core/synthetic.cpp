#include "radarcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "radarcast/hash.hpp"
#include "radarcast/rng.hpp"

namespace radarcast {

void SynthSpec::validate() const
{
    if (height <= 0 || width <= 0 || n_frames <= 0)
        throw ConfigError("synth grid and frame count must be positive");
    if (patch_size <= 0 || height % patch_size != 0 || width % patch_size != 0)
        throw ConfigError("synth grid " + std::to_string(height) + "x" + std::to_string(width) +
                          " is not a multiple of the patch size " + std::to_string(patch_size));
    if (!n_cells.valid() || n_cells.lo < 0)
        throw ConfigError("n_cells range is empty or negative");
    if (!cell_sigma_px.valid() || !(cell_sigma_px.lo > 0.0))
        throw ConfigError("cell_sigma_px range is empty or non-positive");
    if (!cell_aspect.valid() || !(cell_aspect.lo > 0.0) || cell_aspect.hi > 1.0)
        throw ConfigError("cell_aspect must lie in (0, 1]");
    if (!peak_dbz.valid() || peak_dbz.lo < 0.0 || peak_dbz.hi > 60.0)
        throw ConfigError("peak_dbz must be a non-empty range inside [0, 60]");
    if (!(peak_skew > 0.0))
        throw ConfigError("peak_skew must be positive");
    for (const auto& r : advection_px_per_step)
        if (!r.valid())
            throw ConfigError("advection range is empty");
    if (!growth_rate_per_step.valid() || !(growth_rate_per_step.lo > 0.0))
        throw ConfigError("growth_rate_per_step must be a non-empty positive range");
    if (!(background_noise_dbz >= 0.0))
        throw ConfigError("background_noise_dbz must be non-negative");
}

namespace {

template <typename T>
nlohmann::json range_json(const Range<T>& r)
{
    return nlohmann::json::array({r.lo, r.hi});
}

template <typename T>
Range<T> range_from(const nlohmann::json& j, const char* key, Range<T> fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2)
        throw ConfigError(std::string(key) + " must be a [lo, hi] array");
    return {a[0].get<T>(), a[1].get<T>()};
}

}  // namespace

void to_json(nlohmann::json& j, const SynthSpec& s)
{
    j = nlohmann::json{
        {"grid_hw", {s.height, s.width}},
        {"n_frames", s.n_frames},
        {"n_cells", range_json(s.n_cells)},
        {"cell_sigma_px", range_json(s.cell_sigma_px)},
        {"cell_aspect", range_json(s.cell_aspect)},
        {"peak_dbz", range_json(s.peak_dbz)},
        {"peak_skew", s.peak_skew},
        {"advection_px_per_step",
         {{"row", range_json(s.advection_px_per_step[0])}, {"col", range_json(s.advection_px_per_step[1])}}},
        {"growth_rate_per_step", range_json(s.growth_rate_per_step)},
        {"background_noise_dbz", s.background_noise_dbz},
        {"seed", s.seed},
        {"patch_size", s.patch_size},
    };
}

void from_json(const nlohmann::json& j, SynthSpec& s)
{
    SynthSpec d;
    try {
        if (j.contains("grid_hw")) {
            s.height = j.at("grid_hw").at(0).get<int>();
            s.width = j.at("grid_hw").at(1).get<int>();
        } else {
            s.height = d.height;
            s.width = d.width;
        }
        s.n_frames = j.value("n_frames", d.n_frames);
        s.n_cells = range_from(j, "n_cells", d.n_cells);
        s.cell_sigma_px = range_from(j, "cell_sigma_px", d.cell_sigma_px);
        s.cell_aspect = range_from(j, "cell_aspect", d.cell_aspect);
        s.peak_dbz = range_from(j, "peak_dbz", d.peak_dbz);
        s.peak_skew = j.value("peak_skew", d.peak_skew);
        s.advection_px_per_step = d.advection_px_per_step;
        if (j.contains("advection_px_per_step")) {
            const auto& a = j.at("advection_px_per_step");
            s.advection_px_per_step[0] = range_from(a, "row", d.advection_px_per_step[0]);
            s.advection_px_per_step[1] = range_from(a, "col", d.advection_px_per_step[1]);
        }
        s.growth_rate_per_step = range_from(j, "growth_rate_per_step", d.growth_rate_per_step);
        s.background_noise_dbz = j.value("background_noise_dbz", d.background_noise_dbz);
        s.seed = j.value("seed", d.seed);
        s.patch_size = j.value("patch_size", d.patch_size);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth spec: ") + e.what());
    }
}

SynthSpec load_synth_spec(const std::string& path_or_default)
{
    if (path_or_default == "default")
        return {};
    std::ifstream in(path_or_default);
    if (!in)
        throw IoError("cannot open synth spec " + path_or_default);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path_or_default + ": " + e.what());
    }
    SynthSpec spec = doc.contains("synth") ? doc["synth"].get<SynthSpec>() : doc.get<SynthSpec>();
    spec.validate();
    return spec;
}

namespace {

struct Cell {
    double row, col;
    double sigma_major, sigma_minor;
    double cos_t, sin_t;
    double peak;
    double v_row, v_col;
    double growth;
};

}  // namespace

RadarSequence generate_sequence(const SynthSpec& spec, const PreprocessSpec& preprocess)
{
    spec.validate();
    Rng rng(mix64(spec.seed));

    const int n = spec.n_cells.lo == spec.n_cells.hi ? spec.n_cells.lo
                                                     : rng.uniform_int(spec.n_cells.lo, spec.n_cells.hi);
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Cell c{};
        c.row = rng.uniform(0.0, spec.height);
        c.col = rng.uniform(0.0, spec.width);
        c.sigma_major = rng.uniform(spec.cell_sigma_px.lo, spec.cell_sigma_px.hi);
        c.sigma_minor = c.sigma_major * rng.uniform(spec.cell_aspect.lo, spec.cell_aspect.hi);
        const double theta = rng.uniform(0.0, std::numbers::pi);
        c.cos_t = std::cos(theta);
        c.sin_t = std::sin(theta);
        c.peak = spec.peak_dbz.lo + (spec.peak_dbz.hi - spec.peak_dbz.lo) * std::pow(rng.uniform(), spec.peak_skew);
        c.v_row = rng.uniform(spec.advection_px_per_step[0].lo, spec.advection_px_per_step[0].hi);
        c.v_col = rng.uniform(spec.advection_px_per_step[1].lo, spec.advection_px_per_step[1].hi);
        c.growth = rng.uniform(spec.growth_rate_per_step.lo, spec.growth_rate_per_step.hi);
        cells.push_back(c);
    }

    RadarSequence seq;
    seq.timestep_minutes = 5;
    seq.frames.reserve(static_cast<std::size_t>(spec.n_frames));
    for (int t = 0; t < spec.n_frames; ++t) {
        ReflectivityField frame(spec.height, spec.width);
        for (const auto& c : cells) {
            const double cr = c.row + t * c.v_row;
            const double cc = c.col + t * c.v_col;
            const double peak = c.peak * std::pow(c.growth, t);
            const double reach = 4.0 * c.sigma_major;
            const int r0 = std::max(0, static_cast<int>(std::floor(cr - reach)));
            const int r1 = std::min(spec.height - 1, static_cast<int>(std::ceil(cr + reach)));
            const int c0 = std::max(0, static_cast<int>(std::floor(cc - reach)));
            const int c1 = std::min(spec.width - 1, static_cast<int>(std::ceil(cc + reach)));
            for (int r = r0; r <= r1; ++r) {
                for (int col = c0; col <= c1; ++col) {
                    const double dr = r - cr;
                    const double dc = col - cc;
                    const double u = (dr * c.cos_t + dc * c.sin_t) / c.sigma_major;
                    const double v = (-dr * c.sin_t + dc * c.cos_t) / c.sigma_minor;
                    const double value = peak * std::exp(-0.5 * (u * u + v * v));
                    frame(r, col) = std::max(frame(r, col), static_cast<float>(value));
                }
            }
        }
        if (spec.background_noise_dbz > 0.0)
            for (float& v : frame.values())
                v += static_cast<float>(spec.background_noise_dbz * rng.normal());
        seq.frames.push_back(clip_and_quantize(frame, preprocess));
    }
    return seq;
}

std::string to_string(Split split)
{
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& text)
{
    if (text == "train")
        return Split::train;
    if (text == "val")
        return Split::val;
    if (text == "test")
        return Split::test;
    throw FormatError("unknown split '" + text + "'");
}

Split split_for_seed(std::uint64_t seed, const SplitFractions& fractions)
{
    // 377 is coprime with 1000, so seed -> bucket is a bijection on residues.
    const auto bucket = static_cast<double>((seed % 1000) * 377 % 1000);
    if (bucket < std::round(fractions.train * 1000.0))
        return Split::train;
    if (bucket < std::round((fractions.train + fractions.val) * 1000.0))
        return Split::val;
    return Split::test;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in)
        throw IoError("cannot open manifest " + manifest_path.string());
    DatasetManifest m;
    m.directory = manifest_path.parent_path();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream fields(line);
        DatasetEntry e;
        std::string split;
        if (!(fields >> e.filename >> e.seed >> split))
            throw FormatError(manifest_path.string() + ":" + std::to_string(line_no) + ": malformed record");
        e.split = split_from_string(split);
        m.entries.push_back(std::move(e));
    }
    return m;
}

void DatasetManifest::save(const std::filesystem::path& manifest_path) const
{
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write manifest " + manifest_path.string());
    out << "# filename seed split\n";
    for (const auto& e : entries)
        out << e.filename << ' ' << e.seed << ' ' << to_string(e.split) << '\n';
    if (!out)
        throw IoError("write failed: " + manifest_path.string());
}

std::vector<DatasetEntry> DatasetManifest::entries_in(Split split) const
{
    std::vector<DatasetEntry> out;
    for (const auto& e : entries)
        if (e.split == split)
            out.push_back(e);
    return out;
}

std::vector<RadarSequence> DatasetManifest::load_split(Split split) const
{
    std::vector<RadarSequence> out;
    for (const auto& e : entries)
        if (e.split == split)
            out.push_back(read_sequence(directory / e.filename));
    return out;
}

DatasetManifest generate_dataset(const SynthSpec& spec, int n_sequences, const std::filesystem::path& out_dir,
                                 const SplitFractions& fractions, const PreprocessSpec& preprocess)
{
    spec.validate();
    if (n_sequences < 0)
        throw InvalidArgument("n_sequences must be non-negative");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    DatasetManifest manifest;
    manifest.directory = out_dir;
    for (int i = 0; i < n_sequences; ++i) {
        SynthSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(i);
        char name[32];
        std::snprintf(name, sizeof(name), "seq_%05d.rprc", i);
        write_sequence(generate_sequence(s, preprocess), out_dir / name);
        manifest.entries.push_back({name, s.seed, split_for_seed(s.seed, fractions)});
    }
    manifest.save(out_dir / kManifestName);

    std::ofstream spec_out(out_dir / "synth_spec.json", std::ios::trunc);
    if (!spec_out)
        throw IoError("cannot write " + (out_dir / "synth_spec.json").string());
    spec_out << nlohmann::json(spec).dump(2) << '\n';
    return manifest;
}

}  // namespace radarcast
