#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "radarcast/rng.hpp"

namespace radarcast {

enum class SamplingMode { multinomial, greedy, top_k, temperature };

struct Sampling {
    SamplingMode mode = SamplingMode::multinomial;
    int top_k = 0;
    double temperature = 1.0;

    /// "multinomial", "greedy", "top_k:<k>" or "temperature:<tau>".
    static Sampling parse(const std::string& text);
    std::string to_string() const;
};

/// Draws a codebook index from `probs`. Greedy ties resolve to the lowest
/// index. Throws InvalidArgument when nothing is left to normalize.
std::int32_t sample_token(std::span<const double> probs, const Sampling& sampling, Rng& rng);

}  // namespace radarcast
