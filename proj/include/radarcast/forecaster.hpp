#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "radarcast/sequence.hpp"
#include "radarcast/tokens.hpp"

namespace radarcast {

class Tokenizer;

struct ForecasterConfig {
    int vocab_size = 64;
    int context_frames = 4;      ///< T: frames per training window
    int tokens_h = 4;
    int tokens_w = 4;
    int n_layers = 4;
    int n_heads = 4;
    int embed_dim = 128;
    int max_positions = 2048;    ///< size of the learned position table, >= context_length

    int context_length() const { return context_frames * tokens_h * tokens_w; }
    TokenLayout layout() const { return {context_frames, tokens_h, tokens_w}; }
    void validate() const;
    friend bool operator==(const ForecasterConfig&, const ForecasterConfig&) = default;
};

void to_json(nlohmann::json& j, const ForecasterConfig& c);
void from_json(const nlohmann::json& j, ForecasterConfig& c);

struct ForecasterSchedule {
    int steps = 2000;
    int batch_size = 16;
    double learning_rate = 1e-3;
    int warmup_steps = 100;
    double grad_clip = 1.0;
    std::uint64_t seed = 0;
    int log_every = 1;
    int heldout_windows = 256;
    bool dihedral_augment = true;  ///< tokenize all 8 rotations/flips of each training sequence
};

void to_json(nlohmann::json& j, const ForecasterSchedule& s);
void from_json(const nlohmann::json& j, ForecasterSchedule& s);

struct ForecasterLogRecord {
    std::int64_t step = 0;
    double loss = 0.0;
    double learning_rate = 0.0;

    nlohmann::json to_json() const;
};

/// Token grids of whole sequences, produced by one tokenizer checkpoint.
struct TokenDataset {
    int vocab_size = 0;
    std::string tokenizer_hash;
    std::vector<std::vector<TokenGrid>> sequences;
};

/// Encodes every frame. With `dihedral`, each sequence is also encoded in
/// its 7 other rotations/flips.
TokenDataset build_token_dataset(const Tokenizer& tokenizer, std::span<const RadarSequence> sequences,
                                 bool dihedral = false);

/// One training window: sequence index, first frame and token-grid offset.
struct TokenWindow {
    int sequence = 0;
    int frame = 0;
    int row = 0;
    int col = 0;
};

/// Flattened context_length tokens of a window.
std::vector<std::int32_t> window_tokens(const TokenDataset& data, const TokenWindow& w, const ForecasterConfig& config);

/// Every contiguous T-frame window (stride 1), with a spatial offset drawn
/// from `seed` when the token grid is larger than the model window.
std::vector<TokenWindow> enumerate_windows(const TokenDataset& data, const ForecasterConfig& config, std::uint64_t seed);

/// Causal decoder-only transformer over flattened spatiotemporal tokens.
class Forecaster {
public:
    explicit Forecaster(const ForecasterConfig& config, std::uint64_t seed = 0, std::string tokenizer_hash = "");
    ~Forecaster();
    Forecaster(Forecaster&&) noexcept;
    Forecaster& operator=(Forecaster&&) noexcept;
    Forecaster(const Forecaster&) = delete;
    Forecaster& operator=(const Forecaster&) = delete;

    static Forecaster load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const ForecasterConfig& config() const;
    const std::string& tokenizer_hash() const;
    std::int64_t step() const;
    std::int64_t parameter_count() const;
    std::string fingerprint() const;

    /// Logits for every position, L x K row-major. 1 <= L <= context_length.
    std::vector<float> logits(std::span<const std::int32_t> tokens) const;

    /// Softmax of the logits at the last position of `context`.
    std::vector<double> next_token_distribution(std::span<const std::int32_t> context) const;

    /// Mean next-token cross-entropy (nats) over all positions of the windows.
    double cross_entropy(const TokenDataset& data, std::span<const TokenWindow> windows) const;

    struct Impl;

private:
    explicit Forecaster(std::unique_ptr<Impl> impl);
    friend struct ForecasterTrainer;
    std::unique_ptr<Impl> impl_;
};

/// Throws CheckpointMismatch unless the forecaster was trained against
/// `tokenizer_hash` or `allow_mismatch` is set.
void check_compatible(const Forecaster& forecaster, const std::string& tokenizer_hash, bool allow_mismatch = false);

struct ForecasterTrainResult {
    Forecaster model;
    std::vector<ForecasterLogRecord> log;
    double initial_heldout_loss = 0.0;
    double final_heldout_loss = 0.0;
    bool diverged = false;
};

ForecasterTrainResult train_forecaster(const TokenDataset& train, const TokenDataset& heldout,
                                       const ForecasterConfig& config, const ForecasterSchedule& schedule,
                                       const std::function<void(const ForecasterLogRecord&)>& on_record = {});

/// Tokenizes the manifest's train/val splits with the checkpoint at
/// `tokenizer_path` (frozen) and trains. Throws if the tokenizer file hash
/// changes during the run.
ForecasterTrainResult train_forecaster(const std::filesystem::path& manifest, const std::filesystem::path& tokenizer_path,
                                       const ForecasterConfig& config, const ForecasterSchedule& schedule,
                                       const std::function<void(const ForecasterLogRecord&)>& on_record = {});

}  // namespace radarcast
