#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radarcast/field.hpp"
#include "radarcast/forecaster.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/sampling.hpp"
#include "radarcast/sequence.hpp"
#include "radarcast/tokenizer.hpp"
#include "radarcast/tokens.hpp"

namespace radarcast {

struct NowcastRequest {
    RadarSequence context;  ///< exactly T - 1 frames, oldest first
    int lead_steps = 1;
    int n_members = 1;
    Sampling sampling;
    std::uint64_t seed = 0;
    bool allow_checkpoint_mismatch = false;
};

/// Where the model window sat when one target token was generated.
struct WindowPlacement {
    int target_row = 0;
    int target_col = 0;
    int window_row = 0;
    int window_col = 0;
};

struct StepMetadata {
    TokenGrid tokens;
    std::vector<WindowPlacement> placements;
    std::vector<TokenGrid> context;  ///< the T - 1 grids the step was conditioned on
    double seconds = 0.0;
};

struct MemberForecast {
    std::uint64_t seed = 0;
    std::vector<ReflectivityField> frames;
    std::vector<StepMetadata> steps;
};

struct EnsembleNowcast {
    std::vector<TokenGrid> context_tokens;
    std::vector<MemberForecast> members;
    int lead_steps = 0;
};

/// Window origin for a target: the model window is placed so the target sits
/// at its bottom-right-most slot, clamped to the domain.
WindowPlacement place_window(int target_row, int target_col, int domain_h, int domain_w, int window_h, int window_w);

/// Generates the next token grid over the whole domain, target by target in
/// row-major order, sliding the model window across the domain.
TokenGrid generate_next_frame(std::span<const TokenGrid> history, const Forecaster& forecaster,
                              const Sampling& sampling, Rng& rng, std::vector<WindowPlacement>* placements = nullptr);

/// Seed of member `index` for a request seed.
std::uint64_t member_seed(std::uint64_t request_seed, int index);

/// Autoregressive rollout of one member in token space.
std::vector<TokenGrid> rollout_tokens(std::span<const TokenGrid> context_tokens, int lead_steps,
                                      const Forecaster& forecaster, const Sampling& sampling, std::uint64_t seed,
                                      std::vector<StepMetadata>* steps = nullptr);

/// Rollout plus decoding of one member.
MemberForecast generate_member(std::span<const TokenGrid> context_tokens, int lead_steps, const Tokenizer& tokenizer,
                               const Forecaster& forecaster, const Sampling& sampling, std::uint64_t seed);

/// Encode context -> generate -> decode, for each member.
EnsembleNowcast nowcast(const NowcastRequest& request, const Tokenizer& tokenizer, const Forecaster& forecaster);

}  // namespace radarcast
