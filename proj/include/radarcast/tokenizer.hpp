#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "radarcast/field.hpp"
#include "radarcast/preprocess.hpp"
#include "radarcast/sequence.hpp"
#include "radarcast/tokens.hpp"

namespace radarcast {

enum class ReconstructionLoss { mwae, mae };

struct TokenizerConfig {
    int alpha = 3;               ///< down/upsampling steps; patch size 2^alpha
    int bottleneck_channels = 8;
    int codebook_size = 64;
    int base_channels = 16;
    int max_channels = 64;       ///< channel width doubles per level up to this cap
    bool use_adversarial = false;
    double commitment_beta = 0.25;
    int dynamic_range_levels = 601;
    ReconstructionLoss reconstruction_loss = ReconstructionLoss::mwae;
    bool dead_code_revival = false;
    int revival_after_steps = 200;

    int patch_size() const { return 1 << alpha; }
    void validate() const;
    friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

void to_json(nlohmann::json& j, const TokenizerConfig& c);
void from_json(const nlohmann::json& j, TokenizerConfig& c);

/// K learned latent vectors of dimension d, row-major.
struct Codebook {
    int size = 0;
    int dim = 0;
    std::vector<float> vectors;
    std::vector<std::int64_t> usage_counts;

    std::span<const float> vector(int k) const
    {
        return std::span<const float>(vectors).subspan(static_cast<std::size_t>(k) * dim, dim);
    }
};

/// Sum over elements of |s(x_i) - s(y_i)| * s(x_i), s the logistic sigmoid.
/// `target` is the autoencoder input, `reconstruction` its output.
double mwae_loss(std::span<const float> target, std::span<const float> reconstruction);

/// Index of the Euclidean-nearest codebook vector for each d-vector in
/// `latents`; exact ties go to the lowest index.
std::vector<std::int32_t> nearest_codes(std::span<const float> latents, const Codebook& codebook);

struct QuantizeResult {
    TokenGrid tokens;
    std::vector<float> quantized;  ///< h x w x d selected vectors
    double codebook_loss = 0.0;    ///< mean ||sg[z] - e||^2 per element
    double commitment_loss = 0.0;  ///< mean ||z - sg[e]||^2 per element
};

/// `latents` laid out h x w x d.
QuantizeResult quantize(std::span<const float> latents, int height, int width, const Codebook& codebook);

/// (H * W * levels) / ((H / 2^alpha) * (W / 2^alpha) * K).
double compression_ratio(const TokenizerConfig& config, int height, int width, int dynamic_range_levels);

/// Affine map from dBZ to the network's input space: x = dbz * scale + offset.
struct Normalization {
    double scale = 0.1;
    double offset = -3.0;
};

struct TokenizerSchedule {
    int steps = 5000;
    int batch_size = 16;
    double learning_rate = 1e-3;
    int crop_size = 32;
    std::uint64_t seed = 0;
    int log_every = 1;
    int heldout_frames = 64;
    int disc_start_step = 0;
    double disc_weight = 0.1;
    double disc_learning_rate = 2e-4;
};

void to_json(nlohmann::json& j, const TokenizerSchedule& s);
void from_json(const nlohmann::json& j, TokenizerSchedule& s);

struct TokenizerLogRecord {
    std::int64_t step = 0;
    double reconstruction = 0.0;
    double codebook = 0.0;
    double commitment = 0.0;
    double adversarial = 0.0;
    double discriminator = 0.0;
    double utilization = 0.0;  ///< fraction of codes selected within the recent window

    nlohmann::json to_json() const;
};

/// The quantized autoencoder together with its normalization constants;
/// this is what a tokenizer checkpoint file holds.
class Tokenizer {
public:
    explicit Tokenizer(const TokenizerConfig& config, std::uint64_t seed = 0, const PreprocessSpec& preprocess = {});
    ~Tokenizer();
    Tokenizer(Tokenizer&&) noexcept;
    Tokenizer& operator=(Tokenizer&&) noexcept;
    Tokenizer(const Tokenizer&) = delete;
    Tokenizer& operator=(const Tokenizer&) = delete;

    static Tokenizer load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    const TokenizerConfig& config() const;
    const PreprocessSpec& preprocess() const;
    Normalization normalization() const;
    std::int64_t step() const;
    std::int64_t parameter_count() const;
    Codebook codebook() const;

    /// Hash of the serialized checkpoint; equals file_hash() of a saved copy.
    std::string fingerprint() const;

    /// Throws InvalidArgument (with a padding hint) when the frame is not a
    /// multiple of the patch size.
    TokenGrid encode(const ReflectivityField& field) const;
    std::vector<TokenGrid> encode(std::span<const ReflectivityField> fields) const;

    /// Continuous bottleneck latents before quantization, h x w x d.
    std::vector<float> encode_latents(const ReflectivityField& field) const;

    /// Output is clipped and quantized to the preprocessing grid.
    ReflectivityField decode(const TokenGrid& tokens) const;

    /// Mean per-pixel reconstruction loss of the configured kind.
    double reconstruction_loss(std::span<const ReflectivityField> fields) const;

    struct Impl;

private:
    explicit Tokenizer(std::unique_ptr<Impl> impl);
    friend struct TokenizerTrainer;
    std::unique_ptr<Impl> impl_;
};

struct TokenizerTrainResult {
    Tokenizer model;
    std::vector<TokenizerLogRecord> log;
    double initial_heldout_loss = 0.0;
    double final_heldout_loss = 0.0;
    bool diverged = false;
};

/// Trains on random augmented crops of the training frames. If the
/// reconstruction loss turns non-finite, training stops and the result holds
/// the last parameters that produced a finite loss with `diverged` set.
TokenizerTrainResult train_tokenizer(std::span<const RadarSequence> train, std::span<const RadarSequence> heldout,
                                     const TokenizerConfig& config, const TokenizerSchedule& schedule,
                                     const std::function<void(const TokenizerLogRecord&)>& on_record = {},
                                     const PreprocessSpec& preprocess = {});

/// Same, reading the train/val splits of a dataset manifest.
TokenizerTrainResult train_tokenizer(const std::filesystem::path& manifest, const TokenizerConfig& config,
                                     const TokenizerSchedule& schedule,
                                     const std::function<void(const TokenizerLogRecord&)>& on_record = {});

/// Fraction of codebook entries selected at least once over `fields`.
double codebook_utilization(const Tokenizer& tokenizer, std::span<const ReflectivityField> fields);

}  // namespace radarcast
