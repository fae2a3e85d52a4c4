#include "radarcast/tokenizer.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "radarcast/hash.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/synthetic.hpp"
#include "torch_util.hpp"

namespace radarcast {

namespace nn = torch::nn;

namespace {

constexpr int kUtilizationWindow = 100;

int group_count(int channels)
{
    for (int g : {8, 4, 2})
        if (channels % g == 0)
            return g;
    return 1;
}

nn::Conv2d conv(int in, int out, int kernel, int stride = 1, int padding = -1)
{
    if (padding < 0)
        padding = kernel / 2;
    return nn::Conv2d(nn::Conv2dOptions(in, out, kernel).stride(stride).padding(padding));
}

struct ResBlockImpl : nn::Module {
    ResBlockImpl(int in, int out)
    {
        norm1 = register_module("norm1", nn::GroupNorm(group_count(in), in));
        conv1 = register_module("conv1", conv(in, out, 3));
        norm2 = register_module("norm2", nn::GroupNorm(group_count(out), out));
        conv2 = register_module("conv2", conv(out, out, 3));
        if (in != out)
            skip = register_module("skip", conv(in, out, 1));
    }

    torch::Tensor forward(const torch::Tensor& x)
    {
        auto h = conv1(torch::silu(norm1(x)));
        h = conv2(torch::silu(norm2(h)));
        return (skip ? skip(x) : x) + h;
    }

    nn::GroupNorm norm1{nullptr}, norm2{nullptr};
    nn::Conv2d conv1{nullptr}, conv2{nullptr}, skip{nullptr};
};
TORCH_MODULE(ResBlock);

std::vector<int> channel_schedule(const TokenizerConfig& c)
{
    std::vector<int> ch;
    for (int l = 0; l <= c.alpha; ++l)
        ch.push_back(std::min(c.base_channels << std::min(l, 20), c.max_channels));
    return ch;
}

struct EncoderImpl : nn::Module {
    explicit EncoderImpl(const TokenizerConfig& c)
    {
        const auto ch = channel_schedule(c);
        conv_in = register_module("conv_in", conv(1, ch[0], 3));
        blocks = register_module("blocks", nn::ModuleList());
        downs = register_module("downs", nn::ModuleList());
        for (int l = 0; l < c.alpha; ++l) {
            blocks->push_back(ResBlock(ch[l], ch[l]));
            downs->push_back(conv(ch[l], ch[l + 1], 3, 2, 1));
        }
        mid = register_module("mid", ResBlock(ch[c.alpha], ch[c.alpha]));
        norm_out = register_module("norm_out", nn::GroupNorm(group_count(ch[c.alpha]), ch[c.alpha]));
        conv_out = register_module("conv_out", conv(ch[c.alpha], c.bottleneck_channels, 1));
    }

    torch::Tensor forward(torch::Tensor x)
    {
        x = conv_in(x);
        for (std::size_t l = 0; l < blocks->size(); ++l) {
            x = blocks[l]->as<ResBlockImpl>()->forward(x);
            x = downs[l]->as<nn::Conv2dImpl>()->forward(x);
        }
        x = mid(x);
        return conv_out(torch::silu(norm_out(x)));
    }

    nn::Conv2d conv_in{nullptr}, conv_out{nullptr};
    nn::ModuleList blocks{nullptr}, downs{nullptr};
    ResBlock mid{nullptr};
    nn::GroupNorm norm_out{nullptr};
};
TORCH_MODULE(Encoder);

struct DecoderImpl : nn::Module {
    explicit DecoderImpl(const TokenizerConfig& c)
    {
        const auto ch = channel_schedule(c);
        conv_in = register_module("conv_in", conv(c.bottleneck_channels, ch[c.alpha], 3));
        mid = register_module("mid", ResBlock(ch[c.alpha], ch[c.alpha]));
        ups = register_module("ups", nn::ModuleList());
        blocks = register_module("blocks", nn::ModuleList());
        for (int l = c.alpha - 1; l >= 0; --l) {
            ups->push_back(conv(ch[l + 1], ch[l], 3));
            blocks->push_back(ResBlock(ch[l], ch[l]));
        }
        norm_out = register_module("norm_out", nn::GroupNorm(group_count(ch[0]), ch[0]));
        conv_out = register_module("conv_out", conv(ch[0], 1, 3));
    }

    torch::Tensor forward(torch::Tensor z)
    {
        auto x = mid(conv_in(z));
        for (std::size_t l = 0; l < ups->size(); ++l) {
            x = torch::nn::functional::interpolate(
                x, torch::nn::functional::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(
                       torch::kNearest));
            x = ups[l]->as<nn::Conv2dImpl>()->forward(x);
            x = blocks[l]->as<ResBlockImpl>()->forward(x);
        }
        return conv_out(torch::silu(norm_out(x)));
    }

    nn::Conv2d conv_in{nullptr}, conv_out{nullptr};
    ResBlock mid{nullptr};
    nn::ModuleList ups{nullptr}, blocks{nullptr};
    nn::GroupNorm norm_out{nullptr};
};
TORCH_MODULE(Decoder);

struct AutoencoderImpl : nn::Module {
    explicit AutoencoderImpl(const TokenizerConfig& c)
    {
        encoder = register_module("encoder", Encoder(c));
        decoder = register_module("decoder", Decoder(c));
        codebook = register_parameter("codebook", torch::zeros({c.codebook_size, c.bottleneck_channels}));
    }

    Encoder encoder{nullptr};
    Decoder decoder{nullptr};
    torch::Tensor codebook;
};
TORCH_MODULE(Autoencoder);

/// Patch discriminator; only alive during adversarial training.
struct DiscriminatorImpl : nn::Module {
    explicit DiscriminatorImpl(int width)
    {
        net = register_module("net", nn::Sequential(conv(1, width, 4, 2, 1), nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)),
                                                     conv(width, 2 * width, 4, 2, 1),
                                                     nn::GroupNorm(group_count(2 * width), 2 * width),
                                                     nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)),
                                                     conv(2 * width, 1, 3, 1, 1)));
    }
    torch::Tensor forward(const torch::Tensor& x) { return net->forward(x); }
    nn::Sequential net{nullptr};
};
TORCH_MODULE(Discriminator);

void initialize(nn::Module& module, Rng& rng, int codebook_size)
{
    for (auto& p : module.named_parameters()) {
        auto t = p.value();
        const std::string& name = p.key();
        const auto dot = name.rfind('.');
        const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
        if (name == "codebook") {
            detail::fill_uniform(t, rng, 1.0 / codebook_size);
        } else if (t.dim() == 4) {
            const auto fan_in = t.size(1) * t.size(2) * t.size(3);
            detail::fill_uniform(t, rng, 1.0 / std::sqrt(static_cast<double>(fan_in)));
        } else {
            torch::NoGradGuard guard;
            // Only normalization layers carry 1-D weights: ones. Biases: zeros.
            t.fill_(leaf == "weight" ? 1.0 : 0.0);
        }
    }
}

torch::Tensor mwae_tensor(const torch::Tensor& target, const torch::Tensor& recon)
{
    const auto st = torch::sigmoid(target);
    return ((st - torch::sigmoid(recon)).abs() * st).mean();
}

}  // namespace

struct Tokenizer::Impl {
    TokenizerConfig config;
    PreprocessSpec preprocess;
    Normalization norm;
    std::int64_t step = 0;
    std::vector<std::int64_t> usage;
    Autoencoder net{nullptr};

    Impl(const TokenizerConfig& c, const PreprocessSpec& pre) : config(c), preprocess(pre)
    {
        config.validate();
        preprocess.validate();
        norm.scale = 6.0 / (preprocess.clip_max_dbz - preprocess.clip_min_dbz);
        norm.offset = -3.0 - preprocess.clip_min_dbz * norm.scale;
        net = Autoencoder(config);
        usage.assign(static_cast<std::size_t>(config.codebook_size), 0);
    }

    void check_shape(int h, int w) const
    {
        const int p = config.patch_size();
        if (h % p != 0 || w % p != 0) {
            const int ph = (h + p - 1) / p * p;
            const int pw = (w + p - 1) / p * p;
            throw InvalidArgument("field " + std::to_string(h) + "x" + std::to_string(w) +
                                  " is not divisible by the patch size " + std::to_string(p) + "; pad to " +
                                  std::to_string(ph) + "x" + std::to_string(pw));
        }
    }

    torch::Tensor to_input(std::span<const ReflectivityField> fields) const
    {
        if (fields.empty())
            throw InvalidArgument("no fields given");
        const int h = fields.front().height();
        const int w = fields.front().width();
        check_shape(h, w);
        std::vector<float> buf;
        buf.reserve(fields.size() * static_cast<std::size_t>(h) * w);
        for (const auto& f : fields) {
            if (f.height() != h || f.width() != w)
                throw ShapeMismatch("fields in a batch must share a shape");
            for (float v : f.values())
                buf.push_back(static_cast<float>(v * norm.scale + norm.offset));
        }
        return detail::tensor_from(buf, {static_cast<std::int64_t>(fields.size()), 1, h, w});
    }

    Codebook codebook() const
    {
        Codebook cb;
        cb.size = config.codebook_size;
        cb.dim = config.bottleneck_channels;
        auto c = net->codebook.detach().contiguous();
        cb.vectors.assign(c.data_ptr<float>(), c.data_ptr<float>() + c.numel());
        cb.usage_counts = usage;
        return cb;
    }

    /// Nearest codes for (B, d, h, w) latents, in (B, h, w) order.
    std::vector<std::int32_t> codes(const torch::Tensor& z) const
    {
        auto flat = z.detach().permute({0, 2, 3, 1}).contiguous();
        const auto cb = codebook();
        return nearest_codes(std::span<const float>(flat.data_ptr<float>(), static_cast<std::size_t>(flat.numel())), cb);
    }

    torch::Tensor lookup(const std::vector<std::int32_t>& idx, std::int64_t b, std::int64_t h, std::int64_t w) const
    {
        std::vector<std::int64_t> i64(idx.begin(), idx.end());
        auto it = torch::from_blob(i64.data(), {static_cast<std::int64_t>(i64.size())}, torch::kInt64).clone();
        return net->codebook.index_select(0, it).view({b, h, w, config.bottleneck_channels}).permute({0, 3, 1, 2});
    }

    ReflectivityField to_field(const torch::Tensor& y, std::int64_t index) const
    {
        auto img = y[index][0].contiguous();
        const int h = static_cast<int>(img.size(0));
        const int w = static_cast<int>(img.size(1));
        ReflectivityField f(h, w);
        const float* src = img.data_ptr<float>();
        for (std::size_t i = 0; i < f.size(); ++i)
            f.values()[i] = static_cast<float>(clip_and_quantize((src[i] - norm.offset) / norm.scale, preprocess));
        return f;
    }

    torch::Tensor reconstruction(const torch::Tensor& x, const torch::Tensor& y) const
    {
        if (config.reconstruction_loss == ReconstructionLoss::mwae)
            return mwae_tensor(x, y);
        return (x - y).abs().mean();
    }

    CheckpointContainer container() const
    {
        CheckpointContainer c;
        c.kind = "tokenizer";
        c.meta = {{"config", config},
                  {"preprocess", preprocess},
                  {"normalization", {{"scale", norm.scale}, {"offset", norm.offset}}},
                  {"step", step},
                  {"usage_counts", usage}};
        c.tensors = detail::parameter_records(*net);
        return c;
    }
};

Tokenizer::Tokenizer(const TokenizerConfig& config, std::uint64_t seed, const PreprocessSpec& preprocess)
    : impl_(std::make_unique<Impl>(config, preprocess))
{
    Rng rng(mix64(seed ^ 0x746f6b656e697a65ULL));
    initialize(*impl_->net, rng, config.codebook_size);
}

Tokenizer::Tokenizer(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Tokenizer::~Tokenizer() = default;
Tokenizer::Tokenizer(Tokenizer&&) noexcept = default;
Tokenizer& Tokenizer::operator=(Tokenizer&&) noexcept = default;

Tokenizer Tokenizer::load(const std::filesystem::path& path)
{
    const auto ckpt = read_checkpoint(path, "tokenizer");
    try {
        const auto config = ckpt.meta.at("config").get<TokenizerConfig>();
        const auto pre = ckpt.meta.at("preprocess").get<PreprocessSpec>();
        auto impl = std::make_unique<Impl>(config, pre);
        impl->norm.scale = ckpt.meta.at("normalization").at("scale");
        impl->norm.offset = ckpt.meta.at("normalization").at("offset");
        impl->step = ckpt.meta.at("step");
        impl->usage = ckpt.meta.at("usage_counts").get<std::vector<std::int64_t>>();
        detail::load_parameters(*impl->net, ckpt);
        return Tokenizer(std::move(impl));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": bad tokenizer metadata: " + e.what());
    }
}

void Tokenizer::save(const std::filesystem::path& path) const { write_checkpoint(impl_->container(), path); }

std::string Tokenizer::fingerprint() const { return to_hex(fnv1a64(serialize_checkpoint(impl_->container()))); }

const TokenizerConfig& Tokenizer::config() const { return impl_->config; }
const PreprocessSpec& Tokenizer::preprocess() const { return impl_->preprocess; }
Normalization Tokenizer::normalization() const { return impl_->norm; }
std::int64_t Tokenizer::step() const { return impl_->step; }
std::int64_t Tokenizer::parameter_count() const { return detail::count_parameters(*impl_->net); }
Codebook Tokenizer::codebook() const { return impl_->codebook(); }

std::vector<TokenGrid> Tokenizer::encode(std::span<const ReflectivityField> fields) const
{
    if (fields.empty())
        return {};
    torch::NoGradGuard guard;
    const auto x = impl_->to_input(fields);
    const auto z = impl_->net->encoder->forward(x);
    const auto idx = impl_->codes(z);
    const int h = static_cast<int>(z.size(2));
    const int w = static_cast<int>(z.size(3));
    std::vector<TokenGrid> out;
    const auto per = static_cast<std::ptrdiff_t>(h) * w;
    for (std::size_t b = 0; b < fields.size(); ++b) {
        auto first = idx.begin() + static_cast<std::ptrdiff_t>(b) * per;
        out.emplace_back(h, w, std::vector<std::int32_t>(first, first + per));
    }
    return out;
}

TokenGrid Tokenizer::encode(const ReflectivityField& field) const
{
    return encode(std::span<const ReflectivityField>(&field, 1)).front();
}

std::vector<float> Tokenizer::encode_latents(const ReflectivityField& field) const
{
    torch::NoGradGuard guard;
    const auto z = impl_->net->encoder->forward(impl_->to_input(std::span<const ReflectivityField>(&field, 1)));
    auto flat = z.permute({0, 2, 3, 1}).contiguous();
    return {flat.data_ptr<float>(), flat.data_ptr<float>() + flat.numel()};
}

ReflectivityField Tokenizer::decode(const TokenGrid& tokens) const
{
    tokens.check_range(impl_->config.codebook_size);
    if (tokens.size() == 0)
        throw InvalidArgument("empty token grid");
    torch::NoGradGuard guard;
    const std::vector<std::int32_t> idx(tokens.indices().begin(), tokens.indices().end());
    const auto zq = impl_->lookup(idx, 1, tokens.height(), tokens.width());
    const auto y = impl_->net->decoder->forward(zq);
    return impl_->to_field(y, 0);
}

double Tokenizer::reconstruction_loss(std::span<const ReflectivityField> fields) const
{
    if (fields.empty())
        throw InvalidArgument("reconstruction_loss: no fields");
    torch::NoGradGuard guard;
    double total = 0.0;
    constexpr std::size_t kChunk = 16;
    for (std::size_t i = 0; i < fields.size(); i += kChunk) {
        const auto part = fields.subspan(i, std::min(kChunk, fields.size() - i));
        const auto x = impl_->to_input(part);
        const auto z = impl_->net->encoder->forward(x);
        const auto zq = impl_->lookup(impl_->codes(z), z.size(0), z.size(2), z.size(3));
        const auto y = impl_->net->decoder->forward(zq);
        total += impl_->reconstruction(x, y).item<double>() * static_cast<double>(part.size());
    }
    return total / static_cast<double>(fields.size());
}

double codebook_utilization(const Tokenizer& tokenizer, std::span<const ReflectivityField> fields)
{
    if (fields.empty())
        throw InvalidArgument("codebook_utilization: empty dataset");
    std::vector<bool> used(static_cast<std::size_t>(tokenizer.config().codebook_size), false);
    constexpr std::size_t kChunk = 32;
    for (std::size_t i = 0; i < fields.size(); i += kChunk) {
        for (const auto& grid : tokenizer.encode(fields.subspan(i, std::min(kChunk, fields.size() - i))))
            for (auto k : grid.indices())
                used[static_cast<std::size_t>(k)] = true;
    }
    return static_cast<double>(std::count(used.begin(), used.end(), true)) / static_cast<double>(used.size());
}

struct TokenizerTrainer {
    static TokenizerTrainResult run(std::span<const RadarSequence> train, std::span<const RadarSequence> heldout,
                                    const TokenizerConfig& config, const TokenizerSchedule& schedule,
                                    const std::function<void(const TokenizerLogRecord&)>& on_record,
                                    const PreprocessSpec& preprocess)
    {
        config.validate();
        if (schedule.steps < 0 || schedule.batch_size < 1)
            throw ConfigError("tokenizer schedule needs steps >= 0 and batch_size >= 1");
        if (schedule.crop_size % config.patch_size() != 0)
            throw ConfigError("crop_size " + std::to_string(schedule.crop_size) + " is not a multiple of the patch size " +
                              std::to_string(config.patch_size()));

        std::vector<const ReflectivityField*> pool;
        for (const auto& s : train)
            for (const auto& f : s.frames)
                pool.push_back(&f);
        if (pool.empty())
            throw InvalidArgument("training set has no frames");

        std::vector<ReflectivityField> held;
        {
            std::vector<const ReflectivityField*> all;
            for (const auto& s : heldout)
                for (const auto& f : s.frames)
                    all.push_back(&f);
            const std::size_t n = std::min<std::size_t>(all.size(), static_cast<std::size_t>(std::max(schedule.heldout_frames, 0)));
            for (std::size_t i = 0; i < n; ++i)
                held.push_back(*all[i * all.size() / n]);
        }

        Tokenizer model(config, schedule.seed, preprocess);
        auto& impl = *model.impl_;
        impl.net->train();

        TokenizerTrainResult result{std::move(model), {}, 0.0, 0.0, false};
        auto& m = *result.model.impl_;
        if (!held.empty())
            result.initial_heldout_loss = result.model.reconstruction_loss(held);

        torch::optim::Adam opt(m.net->parameters(), torch::optim::AdamOptions(schedule.learning_rate).betas({0.5, 0.9}));

        Discriminator disc{nullptr};
        std::unique_ptr<torch::optim::Adam> disc_opt;
        Rng rng(mix64(schedule.seed ^ 0x747261696e746f6bULL));
        if (config.use_adversarial) {
            disc = Discriminator(config.base_channels);
            initialize(*disc, rng, config.codebook_size);
            disc_opt = std::make_unique<torch::optim::Adam>(
                disc->parameters(), torch::optim::AdamOptions(schedule.disc_learning_rate).betas({0.5, 0.9}));
        }

        std::vector<std::int64_t> last_used(static_cast<std::size_t>(config.codebook_size), -1);
        const int crop = schedule.crop_size;
        auto good = detail::snapshot(*m.net);

        for (int step = 1; step <= schedule.steps; ++step) {
            std::vector<ReflectivityField> batch;
            batch.reserve(static_cast<std::size_t>(schedule.batch_size));
            for (int b = 0; b < schedule.batch_size; ++b) {
                const auto* frame = pool[rng.below(pool.size())];
                const auto params = draw_augment(frame->height(), frame->width(), crop, crop, rng.next());
                batch.push_back(apply_augment(*frame, params, crop, crop));
            }
            const auto x = m.to_input(batch);
            const auto z = m.net->encoder->forward(x);
            const auto idx = m.codes(z);
            const auto zq = m.lookup(idx, z.size(0), z.size(2), z.size(3));
            const auto codebook_loss = torch::mse_loss(zq, z.detach());
            const auto commitment_loss = torch::mse_loss(z, zq.detach());
            const auto z_st = z + (zq - z).detach();
            const auto y = m.net->decoder->forward(z_st);
            const auto rec = m.reconstruction(x, y);
            auto loss = rec + codebook_loss + config.commitment_beta * commitment_loss;

            double adv_value = 0.0;
            double disc_value = 0.0;
            const bool adversarial_on = config.use_adversarial && step > schedule.disc_start_step;
            if (adversarial_on) {
                const auto g_loss = -disc->forward(y).mean();
                // Balance the adversarial gradient against the reconstruction
                // gradient at the decoder's last layer.
                auto& last = m.net->decoder->conv_out->weight;
                const auto rec_grad = torch::autograd::grad({rec}, {last}, {}, true)[0];
                const auto g_grad = torch::autograd::grad({g_loss}, {last}, {}, true)[0];
                const double weight = std::clamp(rec_grad.norm().item<double>() / (g_grad.norm().item<double>() + 1e-4), 0.0, 1e4) *
                                      schedule.disc_weight;
                loss = loss + weight * g_loss;
                adv_value = g_loss.item<double>();
            }

            const double rec_value = rec.item<double>();
            const double cb_value = codebook_loss.item<double>();
            const double commit_value = commitment_loss.item<double>();
            if (!std::isfinite(rec_value) || !std::isfinite(cb_value) || !std::isfinite(commit_value) ||
                !std::isfinite(loss.item<double>())) {
                detail::restore(*m.net, good);
                result.diverged = true;
                break;
            }
            good = detail::snapshot(*m.net);

            opt.zero_grad();
            loss.backward();
            opt.step();

            if (adversarial_on) {
                disc_opt->zero_grad();
                const auto real = disc->forward(x.detach());
                const auto fake = disc->forward(y.detach());
                const auto d_loss = 0.5 * (torch::relu(1.0 - real).mean() + torch::relu(1.0 + fake).mean());
                d_loss.backward();
                disc_opt->step();
                disc_value = d_loss.item<double>();
            }

            for (auto k : idx) {
                ++m.usage[static_cast<std::size_t>(k)];
                last_used[static_cast<std::size_t>(k)] = step;
            }
            if (config.dead_code_revival) {
                torch::NoGradGuard guard;
                auto flat = z.detach().permute({0, 2, 3, 1}).reshape({-1, config.bottleneck_channels});
                for (int k = 0; k < config.codebook_size; ++k) {
                    if (step - std::max<std::int64_t>(last_used[static_cast<std::size_t>(k)], 0) < config.revival_after_steps)
                        continue;
                    const auto row = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(flat.size(0))));
                    m.net->codebook[k].copy_(flat[row]);
                    last_used[static_cast<std::size_t>(k)] = step;
                }
            }
            m.step = step;

            if (step % std::max(schedule.log_every, 1) == 0 || step == schedule.steps) {
                TokenizerLogRecord rec_log;
                rec_log.step = step;
                rec_log.reconstruction = rec_value;
                rec_log.codebook = cb_value;
                rec_log.commitment = commit_value;
                rec_log.adversarial = adv_value;
                rec_log.discriminator = disc_value;
                const auto recent = std::count_if(last_used.begin(), last_used.end(), [&](std::int64_t s) {
                    return s >= 0 && step - s < kUtilizationWindow;
                });
                rec_log.utilization = static_cast<double>(recent) / config.codebook_size;
                result.log.push_back(rec_log);
                if (on_record)
                    on_record(rec_log);
            }
        }

        m.net->eval();
        if (!held.empty())
            result.final_heldout_loss = result.model.reconstruction_loss(held);
        return result;
    }
};

TokenizerTrainResult train_tokenizer(std::span<const RadarSequence> train, std::span<const RadarSequence> heldout,
                                     const TokenizerConfig& config, const TokenizerSchedule& schedule,
                                     const std::function<void(const TokenizerLogRecord&)>& on_record,
                                     const PreprocessSpec& preprocess)
{
    return TokenizerTrainer::run(train, heldout, config, schedule, on_record, preprocess);
}

TokenizerTrainResult train_tokenizer(const std::filesystem::path& manifest, const TokenizerConfig& config,
                                     const TokenizerSchedule& schedule,
                                     const std::function<void(const TokenizerLogRecord&)>& on_record)
{
    const auto m = DatasetManifest::load(manifest);
    const auto train = m.load_split(Split::train);
    const auto val = m.load_split(Split::val);
    return train_tokenizer(train, val, config, schedule, on_record);
}

}  // namespace radarcast
