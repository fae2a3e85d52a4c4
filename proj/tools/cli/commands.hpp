#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace radarcast::cli {

struct SynthOptions {
    std::optional<std::string> config;
    std::string spec = "default";
    int n = 10;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct TrainTokenizerOptions {
    std::optional<std::string> config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> batch;
    std::optional<double> lr;
    std::optional<int> crop;
    std::optional<std::string> loss;
    std::optional<int> alpha;
    std::optional<int> codebook;
    bool adversarial = false;
    bool revival = false;
};

struct TrainForecasterOptions {
    std::optional<std::string> config;
    std::string data;
    std::string tokenizer;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<int> batch;
    std::optional<double> lr;
    std::optional<int> context_frames;
    bool no_dihedral = false;
};

struct NowcastOptions {
    std::optional<std::string> config;
    std::string tokenizer;
    std::string forecaster;
    std::string context;
    int start = 0;
    std::optional<int> steps;
    std::optional<int> members;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool allow_mismatch = false;
};

struct VerifyOptions {
    std::optional<std::string> config;
    std::string obs;
    int obs_offset = 0;
    std::string forecast_dir;
    std::vector<std::string> members;
    std::vector<double> thresholds;  ///< empty: config or defaults
    std::optional<std::uint64_t> seed;
    std::string out;
    bool plots = false;
    bool wet_only = false;  ///< rank histogram over pixels >= 0.1 mm/h only
};

struct PlotOptions {
    std::string report;
    std::vector<std::string> fields;
    std::string out;
};

int run_synth(const SynthOptions& o);
int run_train_tokenizer(const TrainTokenizerOptions& o);
int run_train_forecaster(const TrainForecasterOptions& o);
int run_nowcast(const NowcastOptions& o);
int run_verify(const VerifyOptions& o);
int run_plot(const PlotOptions& o);

/// Writes the metric charts for a verify report into `out_dir`; returns the files.
std::vector<std::string> plot_report(const std::string& report_path, const std::string& out_dir);

}  // namespace radarcast::cli
