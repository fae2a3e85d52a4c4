#include "radarcast/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "radarcast/error.hpp"

namespace radarcast {

Sampling Sampling::parse(const std::string& text)
{
    Sampling s;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (name == "multinomial" && arg.empty()) {
            s.mode = SamplingMode::multinomial;
        } else if (name == "greedy" && arg.empty()) {
            s.mode = SamplingMode::greedy;
        } else if (name == "top_k" && !arg.empty()) {
            s.mode = SamplingMode::top_k;
            s.top_k = std::stoi(arg);
            if (s.top_k < 1)
                throw InvalidArgument("top_k needs k >= 1");
        } else if (name == "temperature" && !arg.empty()) {
            s.mode = SamplingMode::temperature;
            s.temperature = std::stod(arg);
            if (!(s.temperature > 0.0))
                throw InvalidArgument("temperature must be positive");
        } else {
            throw InvalidArgument("unknown sampling mode '" + text + "'");
        }
    } catch (const std::logic_error&) {
        throw InvalidArgument("bad sampling argument in '" + text + "'");
    }
    return s;
}

std::string Sampling::to_string() const
{
    switch (mode) {
    case SamplingMode::multinomial: return "multinomial";
    case SamplingMode::greedy: return "greedy";
    case SamplingMode::top_k: return "top_k:" + std::to_string(top_k);
    case SamplingMode::temperature: return "temperature:" + std::to_string(temperature);
    }
    return "multinomial";
}

namespace {

std::int32_t argmax_lowest(std::span<const double> p)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best])
            best = i;
    return static_cast<std::int32_t>(best);
}

std::int32_t draw(std::span<const double> weights, Rng& rng)
{
    double total = 0.0;
    for (double w : weights)
        total += w;
    if (!(total > 0.0) || !std::isfinite(total))
        throw InvalidArgument("probability vector cannot be normalized");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0)
            continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc)
            return static_cast<std::int32_t>(i);
    }
    return static_cast<std::int32_t>(last_positive);
}

}  // namespace

std::int32_t sample_token(std::span<const double> probs, const Sampling& sampling, Rng& rng)
{
    if (probs.empty())
        throw InvalidArgument("empty probability vector");
    for (double p : probs)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw InvalidArgument("probabilities must be finite and non-negative");

    switch (sampling.mode) {
    case SamplingMode::greedy:
        if (std::all_of(probs.begin(), probs.end(), [](double p) { return p == 0.0; }))
            throw InvalidArgument("probability vector cannot be normalized");
        return argmax_lowest(probs);
    case SamplingMode::multinomial:
        return draw(probs, rng);
    case SamplingMode::temperature: {
        // p^(1/tau) equals softmax(logits / tau) after normalization.
        std::vector<double> w(probs.size());
        double peak = *std::max_element(probs.begin(), probs.end());
        if (!(peak > 0.0))
            throw InvalidArgument("probability vector cannot be normalized");
        for (std::size_t i = 0; i < probs.size(); ++i)
            w[i] = probs[i] > 0.0 ? std::exp(std::log(probs[i] / peak) / sampling.temperature) : 0.0;
        return draw(w, rng);
    }
    case SamplingMode::top_k: {
        std::vector<std::size_t> order(probs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
        std::vector<double> w(probs.size(), 0.0);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(sampling.top_k, 0)), probs.size());
        for (std::size_t i = 0; i < k; ++i)
            w[order[i]] = probs[order[i]];
        return draw(w, rng);
    }
    }
    throw InvalidArgument("unknown sampling mode");
}

}  // namespace radarcast
