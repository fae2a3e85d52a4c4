#include <cmath>
#include <limits>
#include <string>

#include "radarcast/tokenizer.hpp"

namespace radarcast {

void TokenizerConfig::validate() const
{
    if (alpha < 1)
        throw ConfigError("alpha must be >= 1");
    if (alpha > 8)
        throw ConfigError("alpha must be <= 8");
    if (codebook_size < 2)
        throw ConfigError("codebook_size must be >= 2");
    if (bottleneck_channels < 1)
        throw ConfigError("bottleneck_channels must be >= 1");
    if (base_channels < 1 || max_channels < base_channels)
        throw ConfigError("need 1 <= base_channels <= max_channels");
    if (!(commitment_beta >= 0.0))
        throw ConfigError("commitment_beta must be non-negative");
    if (dynamic_range_levels < 2)
        throw ConfigError("dynamic_range_levels must be >= 2");
    if (revival_after_steps < 1)
        throw ConfigError("revival_after_steps must be >= 1");
}

void to_json(nlohmann::json& j, const TokenizerConfig& c)
{
    j = nlohmann::json{
        {"alpha", c.alpha},
        {"bottleneck_channels", c.bottleneck_channels},
        {"codebook_size", c.codebook_size},
        {"base_channels", c.base_channels},
        {"max_channels", c.max_channels},
        {"use_adversarial", c.use_adversarial},
        {"commitment_beta", c.commitment_beta},
        {"dynamic_range_levels", c.dynamic_range_levels},
        {"reconstruction_loss", c.reconstruction_loss == ReconstructionLoss::mwae ? "mwae" : "mae"},
        {"dead_code_revival", c.dead_code_revival},
        {"revival_after_steps", c.revival_after_steps},
    };
}

void from_json(const nlohmann::json& j, TokenizerConfig& c)
{
    TokenizerConfig d;
    c.alpha = j.value("alpha", d.alpha);
    c.bottleneck_channels = j.value("bottleneck_channels", d.bottleneck_channels);
    c.codebook_size = j.value("codebook_size", d.codebook_size);
    c.base_channels = j.value("base_channels", d.base_channels);
    c.max_channels = j.value("max_channels", d.max_channels);
    c.use_adversarial = j.value("use_adversarial", d.use_adversarial);
    c.commitment_beta = j.value("commitment_beta", d.commitment_beta);
    c.dynamic_range_levels = j.value("dynamic_range_levels", d.dynamic_range_levels);
    const std::string loss = j.value("reconstruction_loss", std::string("mwae"));
    if (loss == "mwae")
        c.reconstruction_loss = ReconstructionLoss::mwae;
    else if (loss == "mae")
        c.reconstruction_loss = ReconstructionLoss::mae;
    else
        throw ConfigError("reconstruction_loss must be 'mwae' or 'mae', got '" + loss + "'");
    c.dead_code_revival = j.value("dead_code_revival", d.dead_code_revival);
    c.revival_after_steps = j.value("revival_after_steps", d.revival_after_steps);
}

void to_json(nlohmann::json& j, const TokenizerSchedule& s)
{
    j = nlohmann::json{
        {"steps", s.steps},
        {"batch_size", s.batch_size},
        {"learning_rate", s.learning_rate},
        {"crop_size", s.crop_size},
        {"seed", s.seed},
        {"log_every", s.log_every},
        {"heldout_frames", s.heldout_frames},
        {"disc_start_step", s.disc_start_step},
        {"disc_weight", s.disc_weight},
        {"disc_learning_rate", s.disc_learning_rate},
    };
}

void from_json(const nlohmann::json& j, TokenizerSchedule& s)
{
    TokenizerSchedule d;
    s.steps = j.value("steps", d.steps);
    s.batch_size = j.value("batch_size", d.batch_size);
    s.learning_rate = j.value("learning_rate", d.learning_rate);
    s.crop_size = j.value("crop_size", d.crop_size);
    s.seed = j.value("seed", d.seed);
    s.log_every = j.value("log_every", d.log_every);
    s.heldout_frames = j.value("heldout_frames", d.heldout_frames);
    s.disc_start_step = j.value("disc_start_step", d.disc_start_step);
    s.disc_weight = j.value("disc_weight", d.disc_weight);
    s.disc_learning_rate = j.value("disc_learning_rate", d.disc_learning_rate);
}

nlohmann::json TokenizerLogRecord::to_json() const
{
    return {{"step", step},
            {"reconstruction", reconstruction},
            {"codebook", codebook},
            {"commitment", commitment},
            {"adversarial", adversarial},
            {"discriminator", discriminator},
            {"utilization", utilization}};
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double mwae_loss(std::span<const float> target, std::span<const float> reconstruction)
{
    if (target.size() != reconstruction.size())
        throw ShapeMismatch("mwae_loss: " + std::to_string(target.size()) + " vs " +
                            std::to_string(reconstruction.size()) + " elements");
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double sx = sigmoid(target[i]);
        sum += std::abs(sx - sigmoid(reconstruction[i])) * sx;
    }
    return sum;
}

std::vector<std::int32_t> nearest_codes(std::span<const float> latents, const Codebook& codebook)
{
    const auto d = static_cast<std::size_t>(codebook.dim);
    if (d == 0 || latents.size() % d != 0)
        throw ShapeMismatch("latent size is not a multiple of the codebook dimension");
    const std::size_t n = latents.size() / d;
    std::vector<std::int32_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* z = latents.data() + i * d;
        double best = std::numeric_limits<double>::infinity();
        std::int32_t best_k = 0;
        for (int k = 0; k < codebook.size; ++k) {
            const float* e = codebook.vectors.data() + static_cast<std::size_t>(k) * d;
            double dist = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = static_cast<double>(z[j]) - static_cast<double>(e[j]);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                best_k = k;
            }
        }
        out[i] = best_k;
    }
    return out;
}

QuantizeResult quantize(std::span<const float> latents, int height, int width, const Codebook& codebook)
{
    const auto d = static_cast<std::size_t>(codebook.dim);
    if (latents.size() != static_cast<std::size_t>(height) * width * d)
        throw ShapeMismatch("latents do not match " + std::to_string(height) + "x" + std::to_string(width) +
                            "x" + std::to_string(d));
    QuantizeResult r;
    r.tokens = TokenGrid(height, width, nearest_codes(latents, codebook));
    r.quantized.resize(latents.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
        const auto e = codebook.vector(r.tokens.indices()[i]);
        for (std::size_t j = 0; j < d; ++j) {
            r.quantized[i * d + j] = e[j];
            const double diff = static_cast<double>(latents[i * d + j]) - e[j];
            sq += diff * diff;
        }
    }
    const double mean = latents.empty() ? 0.0 : sq / static_cast<double>(latents.size());
    // Equal in value; they differ only in which side receives the gradient.
    r.codebook_loss = mean;
    r.commitment_loss = mean;
    return r;
}

double compression_ratio(const TokenizerConfig& config, int height, int width, int dynamic_range_levels)
{
    const int p = config.patch_size();
    if (height % p != 0 || width % p != 0)
        throw InvalidArgument("input dims must be divisible by " + std::to_string(p));
    const double raw = static_cast<double>(height) * width * dynamic_range_levels;
    const double coded = static_cast<double>(height / p) * (width / p) * config.codebook_size;
    return raw / coded;
}

}  // namespace radarcast
