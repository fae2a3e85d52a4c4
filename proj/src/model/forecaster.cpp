#include "radarcast/forecaster.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radarcast/error.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/synthetic.hpp"
#include "radarcast/tokenizer.hpp"
#include "torch_util.hpp"

namespace radarcast {

namespace nn = torch::nn;

namespace {

struct AttentionImpl : nn::Module {
    AttentionImpl(int embed, int heads) : heads(heads)
    {
        qkv = register_module("qkv", nn::Linear(embed, 3 * embed));
        proj = register_module("proj", nn::Linear(embed, embed));
    }

    torch::Tensor forward(const torch::Tensor& x)
    {
        const auto b = x.size(0);
        const auto l = x.size(1);
        const auto e = x.size(2);
        auto parts = qkv(x).view({b, l, 3, heads, e / heads}).permute({2, 0, 3, 1, 4});
        auto y = at::scaled_dot_product_attention(parts[0], parts[1], parts[2], {}, 0.0, true);
        return proj(y.transpose(1, 2).contiguous().view({b, l, e}));
    }

    int heads;
    nn::Linear qkv{nullptr}, proj{nullptr};
};
TORCH_MODULE(Attention);

struct BlockImpl : nn::Module {
    BlockImpl(int embed, int heads)
    {
        ln1 = register_module("ln1", nn::LayerNorm(nn::LayerNormOptions({embed})));
        attn = register_module("attn", Attention(embed, heads));
        ln2 = register_module("ln2", nn::LayerNorm(nn::LayerNormOptions({embed})));
        fc = register_module("fc", nn::Linear(embed, 4 * embed));
        out = register_module("out", nn::Linear(4 * embed, embed));
    }

    torch::Tensor forward(torch::Tensor x)
    {
        x = x + attn(ln1(x));
        return x + out(torch::gelu(fc(ln2(x))));
    }

    nn::LayerNorm ln1{nullptr}, ln2{nullptr};
    Attention attn{nullptr};
    nn::Linear fc{nullptr}, out{nullptr};
};
TORCH_MODULE(Block);

struct GptImpl : nn::Module {
    explicit GptImpl(const ForecasterConfig& c)
    {
        token_embed = register_module("token_embed", nn::Embedding(c.vocab_size, c.embed_dim));
        position_embed = register_module("position_embed", nn::Embedding(c.max_positions, c.embed_dim));
        blocks = register_module("blocks", nn::ModuleList());
        for (int i = 0; i < c.n_layers; ++i)
            blocks->push_back(Block(c.embed_dim, c.n_heads));
        ln_f = register_module("ln_f", nn::LayerNorm(nn::LayerNormOptions({c.embed_dim})));
        head = register_module("head", nn::Linear(nn::LinearOptions(c.embed_dim, c.vocab_size).bias(false)));
    }

    /// (B, L) int64 tokens -> (B, L, K) logits.
    torch::Tensor forward(const torch::Tensor& tokens)
    {
        const auto l = tokens.size(1);
        auto x = token_embed(tokens) + position_embed(torch::arange(l, torch::kInt64)).unsqueeze(0);
        for (const auto& block : *blocks)
            x = block->as<BlockImpl>()->forward(x);
        return head(ln_f(x));
    }

    nn::Embedding token_embed{nullptr}, position_embed{nullptr};
    nn::ModuleList blocks{nullptr};
    nn::LayerNorm ln_f{nullptr};
    nn::Linear head{nullptr};
};
TORCH_MODULE(Gpt);

void initialize(nn::Module& module, Rng& rng, int n_layers)
{
    const double residual_std = 0.02 / std::sqrt(2.0 * n_layers);
    for (auto& p : module.named_parameters()) {
        auto t = p.value();
        const std::string& name = p.key();
        const bool is_bias = name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
        torch::NoGradGuard guard;
        if (name.find("ln") != std::string::npos) {
            t.fill_(is_bias ? 0.0 : 1.0);
        } else if (is_bias) {
            t.zero_();
        } else {
            const bool residual = name.find("attn.proj.weight") != std::string::npos ||
                                  name.find(".out.weight") != std::string::npos;
            detail::fill_normal(t, rng, residual ? residual_std : 0.02);
        }
    }
}

torch::Tensor batch_tensor(const std::vector<std::vector<std::int32_t>>& rows)
{
    const auto b = static_cast<std::int64_t>(rows.size());
    const auto l = static_cast<std::int64_t>(rows.front().size());
    std::vector<std::int64_t> flat;
    flat.reserve(static_cast<std::size_t>(b * l));
    for (const auto& r : rows)
        flat.insert(flat.end(), r.begin(), r.end());
    return torch::from_blob(flat.data(), {b, l}, torch::kInt64).clone();
}

/// Next-token cross-entropy over all positions, mean per prediction.
torch::Tensor next_token_loss(Gpt& net, const torch::Tensor& tokens)
{
    const auto l = tokens.size(1);
    const auto logits = net->forward(tokens.narrow(1, 0, l - 1));
    const auto k = logits.size(2);
    return torch::nn::functional::cross_entropy(logits.reshape({-1, k}), tokens.narrow(1, 1, l - 1).reshape({-1}));
}

}  // namespace

void ForecasterConfig::validate() const
{
    if (vocab_size < 2)
        throw ConfigError("vocab_size must be >= 2");
    if (context_frames < 1 || tokens_h < 1 || tokens_w < 1)
        throw ConfigError("context_frames, tokens_h and tokens_w must be positive");
    if (n_layers < 1 || n_heads < 1 || embed_dim < 1)
        throw ConfigError("n_layers, n_heads and embed_dim must be positive");
    if (embed_dim % n_heads != 0)
        throw ConfigError("embed_dim " + std::to_string(embed_dim) + " is not divisible by n_heads " +
                          std::to_string(n_heads));
    if (max_positions < context_length())
        throw ConfigError("max_positions " + std::to_string(max_positions) + " is below the context length " +
                          std::to_string(context_length()));
}

void to_json(nlohmann::json& j, const ForecasterConfig& c)
{
    j = {{"vocab_size", c.vocab_size}, {"context_frames", c.context_frames}, {"tokens_h", c.tokens_h},
         {"tokens_w", c.tokens_w},     {"n_layers", c.n_layers},             {"n_heads", c.n_heads},
         {"embed_dim", c.embed_dim},   {"max_positions", c.max_positions}};
}

void from_json(const nlohmann::json& j, ForecasterConfig& c)
{
    ForecasterConfig d;
    c.vocab_size = j.value("vocab_size", d.vocab_size);
    c.context_frames = j.value("context_frames", d.context_frames);
    c.tokens_h = j.value("tokens_h", d.tokens_h);
    c.tokens_w = j.value("tokens_w", d.tokens_w);
    c.n_layers = j.value("n_layers", d.n_layers);
    c.n_heads = j.value("n_heads", d.n_heads);
    c.embed_dim = j.value("embed_dim", d.embed_dim);
    c.max_positions = j.value("max_positions", d.max_positions);
}

void to_json(nlohmann::json& j, const ForecasterSchedule& s)
{
    j = {{"steps", s.steps},
         {"batch_size", s.batch_size},
         {"learning_rate", s.learning_rate},
         {"warmup_steps", s.warmup_steps},
         {"grad_clip", s.grad_clip},
         {"seed", s.seed},
         {"log_every", s.log_every},
         {"heldout_windows", s.heldout_windows},
         {"dihedral_augment", s.dihedral_augment}};
}

void from_json(const nlohmann::json& j, ForecasterSchedule& s)
{
    ForecasterSchedule d;
    s.steps = j.value("steps", d.steps);
    s.batch_size = j.value("batch_size", d.batch_size);
    s.learning_rate = j.value("learning_rate", d.learning_rate);
    s.warmup_steps = j.value("warmup_steps", d.warmup_steps);
    s.grad_clip = j.value("grad_clip", d.grad_clip);
    s.seed = j.value("seed", d.seed);
    s.log_every = j.value("log_every", d.log_every);
    s.heldout_windows = j.value("heldout_windows", d.heldout_windows);
    s.dihedral_augment = j.value("dihedral_augment", d.dihedral_augment);
}

nlohmann::json ForecasterLogRecord::to_json() const
{
    return {{"step", step}, {"loss", loss}, {"learning_rate", learning_rate}};
}

TokenDataset build_token_dataset(const Tokenizer& tokenizer, std::span<const RadarSequence> sequences, bool dihedral)
{
    TokenDataset out;
    out.vocab_size = tokenizer.config().codebook_size;
    out.tokenizer_hash = tokenizer.fingerprint();
    for (const auto& seq : sequences) {
        seq.validate();
        const int variants = dihedral ? 8 : 1;
        for (int v = 0; v < variants; ++v) {
            if (v == 0) {
                out.sequences.push_back(tokenizer.encode(seq.frames));
                continue;
            }
            const AugmentParams p{0, 0, v % 4, v >= 4};
            const auto moved = apply_augment(seq, p, seq.height(), seq.width());
            out.sequences.push_back(tokenizer.encode(moved.frames));
        }
    }
    return out;
}

std::vector<std::int32_t> window_tokens(const TokenDataset& data, const TokenWindow& w, const ForecasterConfig& config)
{
    const auto& seq = data.sequences.at(static_cast<std::size_t>(w.sequence));
    if (w.frame < 0 || w.frame + config.context_frames > static_cast<int>(seq.size()))
        throw InvalidArgument("window frames out of range");
    std::vector<TokenGrid> grids;
    for (int t = 0; t < config.context_frames; ++t)
        grids.push_back(crop(seq[static_cast<std::size_t>(w.frame + t)], w.row, w.col, config.tokens_h, config.tokens_w));
    return flatten_spatiotemporal(grids).tokens;
}

std::vector<TokenWindow> enumerate_windows(const TokenDataset& data, const ForecasterConfig& config, std::uint64_t seed)
{
    Rng rng(mix64(seed));
    std::vector<TokenWindow> out;
    for (std::size_t s = 0; s < data.sequences.size(); ++s) {
        const auto& seq = data.sequences[s];
        if (seq.empty())
            continue;
        const int h = seq.front().height();
        const int w = seq.front().width();
        if (h < config.tokens_h || w < config.tokens_w)
            throw InvalidArgument("token grid " + std::to_string(h) + "x" + std::to_string(w) +
                                  " is smaller than the model window");
        for (int f = 0; f + config.context_frames <= static_cast<int>(seq.size()); ++f) {
            TokenWindow win{static_cast<int>(s), f, 0, 0};
            win.row = rng.uniform_int(0, h - config.tokens_h);
            win.col = rng.uniform_int(0, w - config.tokens_w);
            out.push_back(win);
        }
    }
    return out;
}

struct Forecaster::Impl {
    ForecasterConfig config;
    std::string tokenizer_hash;
    std::int64_t step = 0;
    Gpt net{nullptr};

    Impl(const ForecasterConfig& c, std::string hash) : config(c), tokenizer_hash(std::move(hash))
    {
        config.validate();
        net = Gpt(config);
        net->eval();
    }

    CheckpointContainer container() const
    {
        CheckpointContainer c;
        c.kind = "forecaster";
        c.meta = {{"config", config}, {"tokenizer_hash", tokenizer_hash}, {"step", step}};
        c.tensors = detail::parameter_records(*net);
        return c;
    }

    void check_context(std::span<const std::int32_t> tokens) const
    {
        if (tokens.empty())
            throw InvalidArgument("empty context");
        if (static_cast<int>(tokens.size()) > config.context_length())
            throw InvalidArgument("context of " + std::to_string(tokens.size()) + " tokens exceeds the context length " +
                                  std::to_string(config.context_length()));
        for (auto t : tokens)
            if (t < 0 || t >= config.vocab_size)
                throw InvalidArgument("token " + std::to_string(t) + " outside the vocabulary");
    }
};

Forecaster::Forecaster(const ForecasterConfig& config, std::uint64_t seed, std::string tokenizer_hash)
    : impl_(std::make_unique<Impl>(config, std::move(tokenizer_hash)))
{
    Rng rng(mix64(seed ^ 0x666f726563617374ULL));
    initialize(*impl_->net, rng, config.n_layers);
}

Forecaster::Forecaster(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Forecaster::~Forecaster() = default;
Forecaster::Forecaster(Forecaster&&) noexcept = default;
Forecaster& Forecaster::operator=(Forecaster&&) noexcept = default;

Forecaster Forecaster::load(const std::filesystem::path& path)
{
    const auto ckpt = read_checkpoint(path, "forecaster");
    try {
        auto impl = std::make_unique<Impl>(ckpt.meta.at("config").get<ForecasterConfig>(),
                                           ckpt.meta.at("tokenizer_hash").get<std::string>());
        impl->step = ckpt.meta.at("step");
        detail::load_parameters(*impl->net, ckpt);
        return Forecaster(std::move(impl));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad forecaster metadata: " + e.what());
    }
}

void Forecaster::save(const std::filesystem::path& path) const { write_checkpoint(impl_->container(), path); }
std::string Forecaster::fingerprint() const { return to_hex(fnv1a64(serialize_checkpoint(impl_->container()))); }

const ForecasterConfig& Forecaster::config() const { return impl_->config; }
const std::string& Forecaster::tokenizer_hash() const { return impl_->tokenizer_hash; }
std::int64_t Forecaster::step() const { return impl_->step; }
std::int64_t Forecaster::parameter_count() const { return detail::count_parameters(*impl_->net); }

std::vector<float> Forecaster::logits(std::span<const std::int32_t> tokens) const
{
    impl_->check_context(tokens);
    torch::NoGradGuard guard;
    const auto out = impl_->net->forward(batch_tensor({std::vector<std::int32_t>(tokens.begin(), tokens.end())}))[0].contiguous();
    return {out.data_ptr<float>(), out.data_ptr<float>() + out.numel()};
}

std::vector<double> Forecaster::next_token_distribution(std::span<const std::int32_t> context) const
{
    const auto all = logits(context);
    const auto k = static_cast<std::size_t>(impl_->config.vocab_size);
    const float* last = all.data() + all.size() - k;
    const double m = *std::max_element(last, last + k);
    std::vector<double> p(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        sum += p[i] = std::exp(static_cast<double>(last[i]) - m);
    for (auto& v : p)
        v /= sum;
    return p;
}

double Forecaster::cross_entropy(const TokenDataset& data, std::span<const TokenWindow> windows) const
{
    if (windows.empty())
        throw InvalidArgument("cross_entropy: no windows");
    if (data.vocab_size != impl_->config.vocab_size)
        throw InvalidArgument("token dataset vocabulary " + std::to_string(data.vocab_size) +
                              " does not match the forecaster's " + std::to_string(impl_->config.vocab_size));
    torch::NoGradGuard guard;
    double total = 0.0;
    constexpr std::size_t kChunk = 64;
    for (std::size_t i = 0; i < windows.size(); i += kChunk) {
        std::vector<std::vector<std::int32_t>> rows;
        for (std::size_t j = i; j < std::min(windows.size(), i + kChunk); ++j)
            rows.push_back(window_tokens(data, windows[j], impl_->config));
        total += next_token_loss(impl_->net, batch_tensor(rows)).item<double>() * static_cast<double>(rows.size());
    }
    return total / static_cast<double>(windows.size());
}

void check_compatible(const Forecaster& forecaster, const std::string& tokenizer_hash, bool allow_mismatch)
{
    if (allow_mismatch || forecaster.tokenizer_hash() == tokenizer_hash)
        return;
    throw CheckpointMismatch("forecaster was trained against tokenizer " + forecaster.tokenizer_hash() +
                             " but the given tokenizer is " + tokenizer_hash);
}

struct ForecasterTrainer {
    static ForecasterTrainResult run(const TokenDataset& train, const TokenDataset& heldout,
                                     const ForecasterConfig& config, const ForecasterSchedule& schedule,
                                     const std::function<void(const ForecasterLogRecord&)>& on_record)
    {
        config.validate();
        if (schedule.steps < 0 || schedule.batch_size < 1)
            throw ConfigError("forecaster schedule needs steps >= 0 and batch_size >= 1");
        for (const auto* d : {&train, &heldout})
            if (d->vocab_size != config.vocab_size)
                throw InvalidArgument("token vocabulary " + std::to_string(d->vocab_size) +
                                      " does not match the forecaster vocab_size " + std::to_string(config.vocab_size));
        if (!heldout.sequences.empty() && heldout.tokenizer_hash != train.tokenizer_hash)
            throw CheckpointMismatch("train and held-out tokens come from different tokenizers");

        std::vector<TokenWindow> held = enumerate_windows(heldout, config, schedule.seed ^ 0x68656c64ULL);
        if (held.size() > static_cast<std::size_t>(std::max(schedule.heldout_windows, 0))) {
            std::vector<TokenWindow> thinned;
            const std::size_t n = static_cast<std::size_t>(schedule.heldout_windows);
            for (std::size_t i = 0; i < n; ++i)
                thinned.push_back(held[i * held.size() / n]);
            held = std::move(thinned);
        }

        ForecasterTrainResult result{Forecaster(config, schedule.seed, train.tokenizer_hash), {}, 0.0, 0.0, false};
        auto& m = *result.model.impl_;
        if (!held.empty())
            result.initial_heldout_loss = result.model.cross_entropy(heldout, held);
        if (schedule.steps == 0) {
            result.final_heldout_loss = result.initial_heldout_loss;
            return result;
        }

        Rng rng(mix64(schedule.seed ^ 0x7472616966637374ULL));
        std::uint64_t epoch = 0;
        std::vector<TokenWindow> pool;
        std::size_t cursor = 0;
        auto refill = [&] {
            pool = enumerate_windows(train, config, mix64(schedule.seed + ++epoch));
            if (pool.empty())
                throw InvalidArgument("training tokens yield no " + std::to_string(config.context_frames) +
                                      "-frame windows");
            for (std::size_t i = pool.size() - 1; i > 0; --i)
                std::swap(pool[i], pool[rng.below(i + 1)]);
            cursor = 0;
        };
        refill();

        torch::optim::AdamW opt(m.net->parameters(),
                                torch::optim::AdamWOptions(schedule.learning_rate).betas({0.9, 0.95}).weight_decay(0.01));
        m.net->train();
        auto good = detail::snapshot(*m.net);

        for (int step = 1; step <= schedule.steps; ++step) {
            double lr = schedule.learning_rate;
            if (step <= schedule.warmup_steps)
                lr *= static_cast<double>(step) / std::max(schedule.warmup_steps, 1);
            else if (schedule.steps > schedule.warmup_steps)
                lr *= 0.5 * (1.0 + std::cos(M_PI * (step - schedule.warmup_steps) /
                                            static_cast<double>(schedule.steps - schedule.warmup_steps)));
            for (auto& group : opt.param_groups())
                static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);

            std::vector<std::vector<std::int32_t>> rows;
            for (int b = 0; b < schedule.batch_size; ++b) {
                if (cursor == pool.size())
                    refill();
                rows.push_back(window_tokens(train, pool[cursor++], config));
            }
            const auto loss = next_token_loss(m.net, batch_tensor(rows));
            const double value = loss.item<double>();
            if (!std::isfinite(value)) {
                detail::restore(*m.net, good);
                result.diverged = true;
                break;
            }
            good = detail::snapshot(*m.net);
            opt.zero_grad();
            loss.backward();
            if (schedule.grad_clip > 0)
                torch::nn::utils::clip_grad_norm_(m.net->parameters(), schedule.grad_clip);
            opt.step();
            m.step = step;

            if (step % std::max(schedule.log_every, 1) == 0 || step == schedule.steps) {
                ForecasterLogRecord rec{step, value, lr};
                result.log.push_back(rec);
                if (on_record)
                    on_record(rec);
            }
        }

        m.net->eval();
        if (!held.empty())
            result.final_heldout_loss = result.model.cross_entropy(heldout, held);
        return result;
    }
};

ForecasterTrainResult train_forecaster(const TokenDataset& train, const TokenDataset& heldout,
                                       const ForecasterConfig& config, const ForecasterSchedule& schedule,
                                       const std::function<void(const ForecasterLogRecord&)>& on_record)
{
    return ForecasterTrainer::run(train, heldout, config, schedule, on_record);
}

ForecasterTrainResult train_forecaster(const std::filesystem::path& manifest, const std::filesystem::path& tokenizer_path,
                                       const ForecasterConfig& config, const ForecasterSchedule& schedule,
                                       const std::function<void(const ForecasterLogRecord&)>& on_record)
{
    const auto before = file_hash(tokenizer_path);
    const auto tokenizer = Tokenizer::load(tokenizer_path);
    if (tokenizer.config().codebook_size != config.vocab_size)
        throw InvalidArgument("tokenizer codebook size " + std::to_string(tokenizer.config().codebook_size) +
                              " does not match vocab_size " + std::to_string(config.vocab_size));
    const auto m = DatasetManifest::load(manifest);
    const auto train_tokens = build_token_dataset(tokenizer, m.load_split(Split::train), schedule.dihedral_augment);
    const auto val_tokens = build_token_dataset(tokenizer, m.load_split(Split::val), false);
    auto result = train_forecaster(train_tokens, val_tokens, config, schedule, on_record);
    if (file_hash(tokenizer_path) != before)
        throw IoError("tokenizer checkpoint " + tokenizer_path.string() + " changed during forecaster training");
    return result;
}

}  // namespace radarcast
