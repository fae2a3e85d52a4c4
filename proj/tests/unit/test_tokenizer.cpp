#include "doctest.h"

#include <cmath>
#include <limits>

#include "radarcast/error.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/synthetic.hpp"
#include "radarcast/tokenizer.hpp"
#include "test_support.hpp"

using namespace radarcast;

namespace {

std::vector<RadarSequence> small_sequences(std::uint64_t first, int n, int frames = 4)
{
    std::vector<RadarSequence> out;
    for (int i = 0; i < n; ++i) {
        SynthSpec s;
        s.seed = first + static_cast<std::uint64_t>(i);
        s.n_frames = frames;
        out.push_back(generate_sequence(s));
    }
    return out;
}

TokenizerConfig tiny_config()
{
    TokenizerConfig c;
    c.alpha = 2;
    c.base_channels = 8;
    c.max_channels = 16;
    c.codebook_size = 16;
    c.bottleneck_channels = 4;
    return c;
}

}  // namespace

TEST_CASE("mwae matches a scalar loop and is asymmetric")
{
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<float> x(1 + rng.below(200)), y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = static_cast<float>(rng.uniform(-3, 3));
            y[i] = static_cast<float>(rng.uniform(-3, 3));
        }
        double want = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double sx = 1.0 / (1.0 + std::exp(-static_cast<double>(x[i])));
            const double sy = 1.0 / (1.0 + std::exp(-static_cast<double>(y[i])));
            want += std::fabs(sx - sy) * sx;
        }
        CHECK(std::abs(mwae_loss(x, y) - want) < 1e-6);
        CHECK(mwae_loss(x, x) == 0.0);
    }
    // Missing a strong echo costs more than inventing one.
    const std::vector<float> strong{3.0f}, weak{-3.0f};
    CHECK(mwae_loss(strong, weak) > mwae_loss(weak, strong));
    CHECK_THROWS_AS(mwae_loss(strong, std::vector<float>{1.0f, 2.0f}), ShapeMismatch);
}

TEST_CASE("nearest_codes is the exhaustive argmin with lowest-index ties")
{
    Rng rng(2);
    Codebook cb;
    cb.size = 12;
    cb.dim = 3;
    for (int i = 0; i < cb.size * cb.dim; ++i)
        cb.vectors.push_back(static_cast<float>(rng.uniform(-1, 1)));
    std::vector<float> z(300 * 3);
    for (auto& v : z)
        v = static_cast<float>(rng.uniform(-1.5, 1.5));
    const auto codes = nearest_codes(z, cb);
    REQUIRE(codes.size() == 300);
    for (std::size_t n = 0; n < 300; ++n) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < cb.size; ++k) {
            double d = 0;
            for (int j = 0; j < 3; ++j)
                d += std::pow(z[n * 3 + j] - cb.vector(k)[static_cast<std::size_t>(j)], 2);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        CHECK(codes[n] == best);
    }

    Codebook dup;
    dup.size = 3;
    dup.dim = 2;
    dup.vectors = {1, 0, -1, 0, 1, 0};
    const std::vector<float> origin{0, 0}, right{0.9f, 0};
    CHECK(nearest_codes(origin, dup)[0] == 0);
    CHECK(nearest_codes(right, dup)[0] == 0);

    const auto q = quantize(z, 15, 20, cb);
    CHECK(q.tokens.height() == 15);
    CHECK(q.tokens.width() == 20);
    CHECK(q.codebook_loss == doctest::Approx(q.commitment_loss));
    CHECK_THROWS_AS(nearest_codes(std::vector<float>{1, 2, 3, 4}, cb), ShapeMismatch);
}

TEST_CASE("compression ratio")
{
    TokenizerConfig c;
    c.alpha = 4;
    c.codebook_size = 1024;
    const double r = compression_ratio(c, 192, 192, 601);
    CHECK(std::abs(r - 150.0) / 150.0 < 0.005);
    CHECK(r == doctest::Approx(192.0 * 192 * 601 / (12.0 * 12 * 1024)));
}

TEST_CASE("encode shapes and padding errors")
{
    TokenizerConfig big;
    big.alpha = 4;
    big.codebook_size = 1024;
    const Tokenizer t4(big, 3);
    const auto g = t4.encode(ReflectivityField(192, 192, 10.0f));
    CHECK(g.height() == 12);
    CHECK(g.width() == 12);
    CHECK(t4.codebook().size == 1024);

    const Tokenizer t3(TokenizerConfig{}, 3);
    const auto g3 = t3.encode(ReflectivityField(64, 64));
    CHECK(g3.height() == 8);
    CHECK(g3.width() == 8);
    for (auto v : g3.indices()) {
        CHECK(v >= 0);
        CHECK(v < 64);
    }
    try {
        t3.encode(ReflectivityField(60, 64));
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("pad") != std::string::npos);
    }

    const auto decoded = t3.decode(g3);
    CHECK(decoded.height() == 64);
    for (float v : decoded.values()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 60.0f);
    }
    CHECK(t3.encode_latents(ReflectivityField(64, 64)).size() == 8u * 8u * 8u);
    CHECK_THROWS_AS(t3.decode(TokenGrid(2, 2, {0, 1, 2, 64})), InvalidArgument);
}

TEST_CASE("tokenizer checkpoints round trip")
{
    test::TempDir dir;
    const Tokenizer t(tiny_config(), 9);
    const auto path = dir.path() / "tok.ckpt";
    t.save(path);
    CHECK(t.fingerprint() == file_hash(path));

    const auto back = Tokenizer::load(path);
    CHECK(back.config() == t.config());
    CHECK(back.fingerprint() == t.fingerprint());
    ReflectivityField f(32, 32);
    Rng rng(4);
    for (auto& v : f.values())
        v = static_cast<float>(rng.uniform(0, 50));
    CHECK(back.encode(f) == t.encode(f));
    CHECK(back.decode(t.encode(f)) == t.decode(t.encode(f)));

    const Tokenizer other(tiny_config(), 10);
    CHECK(other.fingerprint() != t.fingerprint());

    auto bytes = test::read_bytes(path);
    bytes.resize(bytes.size() / 2);
    test::write_bytes(dir.path() / "cut.ckpt", bytes);
    CHECK_THROWS_AS(Tokenizer::load(dir.path() / "cut.ckpt"), TruncatedFile);
    CHECK_THROWS(Tokenizer::load(dir.path() / "none.ckpt"));
}

TEST_CASE("config validation")
{
    auto c = tiny_config();
    c.codebook_size = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.alpha = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    const nlohmann::json j = c;
    CHECK(j.get<TokenizerConfig>() == c);
}

TEST_CASE("short training lowers held-out loss and is reproducible")
{
    const auto train = small_sequences(0, 6);
    const auto held = small_sequences(100, 2);
    TokenizerSchedule s;
    s.steps = 40;
    s.batch_size = 4;
    s.crop_size = 32;
    s.heldout_frames = 8;
    s.seed = 5;
    std::vector<TokenizerLogRecord> seen;
    const auto a = train_tokenizer(train, held, tiny_config(), s, [&](const TokenizerLogRecord& r) { seen.push_back(r); });
    CHECK_FALSE(a.diverged);
    CHECK(a.final_heldout_loss < a.initial_heldout_loss);
    CHECK(seen.size() == a.log.size());
    CHECK(a.log.back().step == 40);
    CHECK(a.model.step() == 40);

    const auto b = train_tokenizer(train, held, tiny_config(), s);
    CHECK(a.model.fingerprint() == b.model.fingerprint());

    std::vector<ReflectivityField> frames;
    for (const auto& seq : held)
        frames.insert(frames.end(), seq.frames.begin(), seq.frames.end());
    const double u = codebook_utilization(a.model, frames);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
}

TEST_CASE("a diverging run keeps the last finite parameters")
{
    const auto train = small_sequences(0, 2);
    TokenizerSchedule s;
    s.steps = 30;
    s.batch_size = 2;
    s.crop_size = 32;
    s.heldout_frames = 4;
    s.learning_rate = 1e30;
    const auto r = train_tokenizer(train, train, tiny_config(), s);
    CHECK(r.diverged);
    CHECK(r.log.size() < 30);
    CHECK(std::isfinite(r.model.reconstruction_loss(train[0].frames)));
}
