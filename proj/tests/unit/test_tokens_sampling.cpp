#include "doctest.h"

#include <cmath>

#include "radarcast/checkpoint.hpp"
#include "radarcast/error.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/sampling.hpp"
#include "radarcast/tokens.hpp"
#include "test_support.hpp"

using namespace radarcast;

TEST_CASE("flatten orders frames oldest first, then row-major")
{
    const std::vector<TokenGrid> grids{TokenGrid(2, 2, {0, 1, 2, 3}), TokenGrid(2, 2, {4, 5, 6, 7})};
    const auto seq = flatten_spatiotemporal(grids);
    CHECK(seq.tokens == std::vector<std::int32_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(seq.layout == TokenLayout{2, 2, 2});

    const std::vector<TokenGrid> single{TokenGrid(1, 1, {9})};
    CHECK(flatten_spatiotemporal(single).tokens == std::vector<std::int32_t>{9});
}

TEST_CASE("flatten and unflatten are exact inverses")
{
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const int t = 1 + static_cast<int>(rng.below(4));
        const int h = 1 + static_cast<int>(rng.below(6));
        const int w = 1 + static_cast<int>(rng.below(6));
        std::vector<TokenGrid> grids;
        for (int k = 0; k < t; ++k) {
            TokenGrid g(h, w);
            for (auto& v : g.indices())
                v = static_cast<std::int32_t>(rng.below(1024));
            grids.push_back(g);
        }
        const auto seq = flatten_spatiotemporal(grids);
        for (int k = 0; k < t; ++k)
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c)
                    CHECK(seq.tokens[static_cast<std::size_t>(k * h * w + r * w + c)] == grids[k](r, c));
        CHECK(unflatten_spatiotemporal(seq) == grids);
    }
}

TEST_CASE("flatten rejects mismatched shapes and too many frames")
{
    const std::vector<TokenGrid> mixed{TokenGrid(2, 2), TokenGrid(2, 3)};
    CHECK_THROWS_AS(flatten_spatiotemporal(mixed), ShapeMismatch);
    const std::vector<TokenGrid> three(3, TokenGrid(1, 1));
    CHECK_THROWS_AS(flatten_spatiotemporal(three, 2), InvalidArgument);
    CHECK_THROWS_AS(TokenGrid(2, 2, {1, 2, 3}), ShapeMismatch);
    CHECK_THROWS_AS(TokenGrid(1, 2, {0, 5}).check_range(5), InvalidArgument);
    CHECK(crop(TokenGrid(3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8}), 1, 1, 2, 2) == TokenGrid(2, 2, {4, 5, 7, 8}));
}

TEST_CASE("sample_token: one-hot and greedy")
{
    std::vector<double> onehot(8, 0.0);
    onehot[3] = 1.0;
    Rng rng(1);
    for (const auto* mode : {"multinomial", "greedy", "top_k:2", "temperature:0.5"})
        CHECK(sample_token(onehot, Sampling::parse(mode), rng) == 3);

    const std::vector<double> p{0.2, 0.5, 0.3};
    CHECK(sample_token(p, Sampling::parse("greedy"), rng) == 1);
    const std::vector<double> tie{0.4, 0.1, 0.4, 0.1};
    CHECK(sample_token(tie, Sampling::parse("greedy"), rng) == 0);
}

TEST_CASE("sample_token: multinomial frequency")
{
    const std::vector<double> p{0.5, 0.5};
    Rng rng(2024);
    int zeros = 0;
    for (int i = 0; i < 10000; ++i)
        zeros += sample_token(p, Sampling{}, rng) == 0;
    CHECK(zeros >= 4800);
    CHECK(zeros <= 5200);
}

TEST_CASE("sample_token: top_k and temperature")
{
    const std::vector<double> p{0.1, 0.4, 0.2, 0.3};
    Rng rng(5);
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 20000; ++i)
        ++counts[sample_token(p, Sampling::parse("top_k:2"), rng)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(counts[1] / 20000.0 == doctest::Approx(4.0 / 7.0).epsilon(0.03));

    // tau = 0.5 squares the probabilities before renormalizing.
    const std::vector<double> q{0.25, 0.75};
    int ones = 0;
    for (int i = 0; i < 20000; ++i)
        ones += sample_token(q, Sampling::parse("temperature:0.5"), rng);
    CHECK(ones / 20000.0 == doctest::Approx(0.9).epsilon(0.02));

    const std::vector<double> zero(4, 0.0);
    CHECK_THROWS_AS(sample_token(zero, Sampling{}, rng), InvalidArgument);
    CHECK_THROWS_AS(Sampling::parse("top_k:0"), InvalidArgument);
    CHECK_THROWS_AS(Sampling::parse("beam"), InvalidArgument);
    CHECK(Sampling::parse("top_k:5").to_string() == "top_k:5");
}

TEST_CASE("checkpoint container round trip and fingerprint")
{
    test::TempDir dir;
    CheckpointContainer c;
    c.kind = "unit";
    c.meta = {{"answer", 42}, {"name", "x"}};
    c.tensors.push_back({"w", {2, 3}, {1, 2, 3, 4, 5, 6}});
    c.tensors.push_back({"b", {1}, {-0.5f}});
    const auto path = dir.path() / "c.ckpt";
    write_checkpoint(c, path);
    CHECK(file_hash(path) == to_hex(fnv1a64(serialize_checkpoint(c))));

    const auto back = read_checkpoint(path, "unit");
    CHECK(back.meta == c.meta);
    CHECK(back.tensor("w").data == c.tensors[0].data);
    CHECK(back.tensor("w").shape == c.tensors[0].shape);
    CHECK_THROWS_AS(back.tensor("missing"), FormatError);
    CHECK_THROWS_AS(read_checkpoint(path, "other"), InvalidArgument);

    auto bytes = test::read_bytes(path);
    bytes.resize(bytes.size() - 2);
    test::write_bytes(dir.path() / "cut.ckpt", bytes);
    CHECK_THROWS_AS(read_checkpoint(dir.path() / "cut.ckpt"), TruncatedFile);
    bytes[0] = 'Z';
    test::write_bytes(dir.path() / "bad.ckpt", bytes);
    CHECK_THROWS_AS(read_checkpoint(dir.path() / "bad.ckpt"), BadMagic);
}

TEST_CASE("hash helpers")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(to_hex(0xabcULL) == "0000000000000abc");
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
