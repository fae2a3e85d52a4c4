#include "radarcast/inference.hpp"

#include <algorithm>
#include <chrono>

#include "radarcast/error.hpp"
#include "radarcast/hash.hpp"

namespace radarcast {

WindowPlacement place_window(int target_row, int target_col, int domain_h, int domain_w, int window_h, int window_w)
{
    if (domain_h < window_h || domain_w < window_w)
        throw InvalidArgument("token domain " + std::to_string(domain_h) + "x" + std::to_string(domain_w) +
                              " is smaller than the model window " + std::to_string(window_h) + "x" +
                              std::to_string(window_w));
    if (target_row < 0 || target_row >= domain_h || target_col < 0 || target_col >= domain_w)
        throw InvalidArgument("target outside the token domain");
    WindowPlacement p;
    p.target_row = target_row;
    p.target_col = target_col;
    p.window_row = std::clamp(target_row - (window_h - 1), 0, domain_h - window_h);
    p.window_col = std::clamp(target_col - (window_w - 1), 0, domain_w - window_w);
    return p;
}

TokenGrid generate_next_frame(std::span<const TokenGrid> history, const Forecaster& forecaster,
                              const Sampling& sampling, Rng& rng, std::vector<WindowPlacement>* placements)
{
    const auto& cfg = forecaster.config();
    if (static_cast<int>(history.size()) != cfg.context_frames - 1)
        throw InvalidArgument("history must hold exactly " + std::to_string(cfg.context_frames - 1) + " token grids, got " +
                              std::to_string(history.size()));
    if (history.empty())
        throw InvalidArgument("a forecaster with one context frame has nothing to condition on");
    const int dh = history.front().height();
    const int dw = history.front().width();
    for (const auto& g : history) {
        if (g.height() != dh || g.width() != dw)
            throw ShapeMismatch("history grids differ in shape");
        g.check_range(cfg.vocab_size);
    }
    const int th = cfg.tokens_h;
    const int tw = cfg.tokens_w;

    TokenGrid next(dh, dw);
    std::vector<std::int32_t> context;
    context.reserve(static_cast<std::size_t>(cfg.context_length()));
    for (int r = 0; r < dh; ++r) {
        for (int c = 0; c < dw; ++c) {
            const auto p = place_window(r, c, dh, dw, th, tw);
            context.clear();
            for (const auto& g : history)
                for (int i = 0; i < th; ++i)
                    for (int j = 0; j < tw; ++j)
                        context.push_back(g(p.window_row + i, p.window_col + j));
            const int target = (r - p.window_row) * tw + (c - p.window_col);
            for (int k = 0; k < target; ++k)
                context.push_back(next(p.window_row + k / tw, p.window_col + k % tw));
            const auto probs = forecaster.next_token_distribution(context);
            next(r, c) = sample_token(probs, sampling, rng);
            if (placements)
                placements->push_back(p);
        }
    }
    return next;
}

std::uint64_t member_seed(std::uint64_t request_seed, int index)
{
    if (index < 0)
        throw InvalidArgument("member index must be non-negative");
    return derive_seed(request_seed, static_cast<std::uint64_t>(index));
}

std::vector<TokenGrid> rollout_tokens(std::span<const TokenGrid> context_tokens, int lead_steps,
                                      const Forecaster& forecaster, const Sampling& sampling, std::uint64_t seed,
                                      std::vector<StepMetadata>* steps)
{
    if (lead_steps < 1)
        throw InvalidArgument("lead_steps must be >= 1");
    Rng rng(mix64(seed));
    std::vector<TokenGrid> history(context_tokens.begin(), context_tokens.end());
    std::vector<TokenGrid> out;
    for (int s = 0; s < lead_steps; ++s) {
        const auto start = std::chrono::steady_clock::now();
        StepMetadata meta;
        auto grid = generate_next_frame(history, forecaster, sampling, rng, steps ? &meta.placements : nullptr);
        if (steps) {
            meta.tokens = grid;
            meta.context = history;
            meta.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            steps->push_back(std::move(meta));
        }
        history.erase(history.begin());
        history.push_back(grid);
        out.push_back(std::move(grid));
    }
    return out;
}

MemberForecast generate_member(std::span<const TokenGrid> context_tokens, int lead_steps, const Tokenizer& tokenizer,
                               const Forecaster& forecaster, const Sampling& sampling, std::uint64_t seed)
{
    MemberForecast m;
    m.seed = seed;
    const auto grids = rollout_tokens(context_tokens, lead_steps, forecaster, sampling, seed, &m.steps);
    for (const auto& g : grids)
        m.frames.push_back(tokenizer.decode(g));
    return m;
}

EnsembleNowcast nowcast(const NowcastRequest& request, const Tokenizer& tokenizer, const Forecaster& forecaster)
{
    const auto& cfg = forecaster.config();
    if (request.lead_steps < 1)
        throw InvalidArgument("lead_steps must be >= 1");
    if (request.n_members < 1)
        throw InvalidArgument("n_members must be >= 1");
    if (request.context.length() != cfg.context_frames - 1)
        throw InvalidArgument("context must hold exactly " + std::to_string(cfg.context_frames - 1) + " frames, got " +
                              std::to_string(request.context.length()));
    if (tokenizer.config().codebook_size != cfg.vocab_size)
        throw CheckpointMismatch("tokenizer codebook size " + std::to_string(tokenizer.config().codebook_size) +
                                 " differs from the forecaster vocabulary " + std::to_string(cfg.vocab_size));
    check_compatible(forecaster, tokenizer.fingerprint(), request.allow_checkpoint_mismatch);
    request.context.validate();

    EnsembleNowcast out;
    out.lead_steps = request.lead_steps;
    out.context_tokens = tokenizer.encode(request.context.frames);
    for (int i = 0; i < request.n_members; ++i)
        out.members.push_back(generate_member(out.context_tokens, request.lead_steps, tokenizer, forecaster,
                                              request.sampling, member_seed(request.seed, i)));
    return out;
}

}  // namespace radarcast
