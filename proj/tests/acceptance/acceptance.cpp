// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "../unit/test_support.hpp"
#include "oracles.hpp"
#include "radarcast/forecaster.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/inference.hpp"
#include "radarcast/rng.hpp"
#include "radarcast/synthetic.hpp"
#include "radarcast/tokenizer.hpp"
#include "radarcast/tokens.hpp"
#include "radarcast/verification.hpp"

using namespace radarcast;

namespace {

constexpr int kDeskSequences = 120;
constexpr int kEnsembleCases = 50;
constexpr int kEnsembleMembers = 20;
constexpr int kForecasterSteps = 3000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failed sub-checks of one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what)
    {
        ++total_;
        if (!ok && failures_.size() < 8)
            failures_.push_back(what);
        failed_ += !ok;
    }
    bool ok() const { return failed_ == 0; }
    std::string summary() const
    {
        std::string s = std::to_string(total_ - failed_) + "/" + std::to_string(total_) + " checks";
        for (const auto& f : failures_)
            s += "; failed: " + f;
        return s;
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::vector<std::string> failures_;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body, double budget_s)
{
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = seconds_since(t0);
    if (budget_s > 0 && s > budget_s) {
        o.pass = false;
        o.detail += "; over time budget " + std::to_string(static_cast<int>(budget_s)) + " s";
    }
    failures += !o.pass;
    std::printf("criterion %2d %s  %s  [%.1f s]  %s\n", id, o.pass ? "PASS" : "FAIL", title, s, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

template <typename F>
F random_field(Rng& rng, int h, int w, double lo, double hi)
{
    F f(h, w);
    for (auto& v : f.values())
        v = static_cast<float>(rng.uniform(lo, hi));
    return f;
}

RainRateField blob(int h, int w, double r0, double c0, double sigma, double peak)
{
    RainRateField f(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            f(r, c) = static_cast<float>(peak * std::exp(-((r - r0) * (r - r0) + (c - c0) * (c - c0)) / (2 * sigma * sigma)));
    return f;
}

bool rel_close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// ---------------------------------------------------------------- criterion 1

Outcome metric_oracles()
{
    Checks ck;
    Rng rng(101);
    constexpr int n = 100;

    for (int i = 0; i < n; ++i) {
        const int h = 8 + static_cast<int>(rng.below(9));
        const int w = 8 + static_cast<int>(rng.below(9));
        const auto a = random_field<ReflectivityField>(rng, h, w, 0, 60);
        auto b = a;
        for (auto& v : b.values())
            v = static_cast<float>(std::clamp(v + rng.normal() * 8.0, 0.0, 60.0));
        const auto s = continuous_scores(a, b);
        ck.expect(std::abs(s.mae - oracle::mae(a, b)) < 1e-10, "mae");
        ck.expect(std::abs(s.mse - oracle::mse(a, b)) < 1e-10, "mse");
        ck.expect(rel_close(s.ssim, oracle::ssim(a, b), 1e-9), "ssim");
    }
    {
        const auto a = random_field<ReflectivityField>(rng, 8, 8, 0, 59);
        auto b = a;
        for (auto& v : b.values())
            v += 1.0f;
        const auto same = continuous_scores(a, a);
        ck.expect(same.mae == 0 && same.mse == 0 && std::abs(same.ssim - 1) < 1e-12, "identical continuous");
        const auto off = continuous_scores(a, b);
        ck.expect(std::abs(off.mae - 1) < 1e-6 && std::abs(off.mse - 1) < 1e-5, "offset continuous");
    }

    for (int i = 0; i < n; ++i) {
        const auto o = random_field<RainRateField>(rng, 6 + static_cast<int>(rng.below(10)), 6 + static_cast<int>(rng.below(10)), 0, 20);
        auto p = o;
        for (auto& v : p.values())
            v = static_cast<float>(std::max(0.0, v + rng.normal() * 6.0));
        const double th = rng.uniform(0.1, 15);
        const auto got = contingency_table(o, p, th);
        const auto want = oracle::contingency(o, p, th);
        ck.expect(got.hits == want.hits && got.misses == want.misses && got.false_alarms == want.false_alarms &&
                      got.correct_negatives == want.correct_negatives,
                  "contingency counts");
        const auto sc = categorical_score(got);
        const double events = static_cast<double>(want.hits + want.misses + want.false_alarms);
        if (events > 0 && want.hits + want.misses > 0) {
            ck.expect(std::abs(sc.csi - want.hits / events) < 1e-12, "csi");
            ck.expect(std::abs(sc.bias - static_cast<double>(want.hits + want.false_alarms) / (want.hits + want.misses)) < 1e-12, "bias");
        }
    }
    {
        RainRateField obs(6, 6), pred(6, 6);
        obs(0, 0) = obs(0, 1) = obs(0, 2) = obs(1, 0) = 2.0f;
        pred(0, 0) = pred(0, 1) = pred(0, 2) = pred(2, 0) = pred(2, 1) = 2.0f;
        const auto s = categorical_score(contingency_table(obs, pred, 1.0));
        ck.expect(std::abs(s.csi - 0.5) < 1e-12 && std::abs(s.bias - 1.25) < 1e-12, "csi/bias worked example");
        const auto same = categorical_score(contingency_table(obs, obs, 1.0));
        ck.expect(same.csi == 1.0 && same.bias == 1.0, "identical csi/bias");
        const auto none = categorical_score(contingency_table(obs, RainRateField(6, 6), 1.0));
        ck.expect(none.csi == 0.0 && none.bias == 0.0, "all-below csi/bias");
    }

    for (int i = 0; i < n; ++i) {
        const int h = 4 + static_cast<int>(rng.below(10));
        const int w = 4 + static_cast<int>(rng.below(10));
        const auto f = random_field<ReflectivityField>(rng, h, w, 0, 60);
        const auto got = rapsd(f);
        const auto want = oracle::radial_power(f);
        bool same = got.power.size() == want.size();
        for (std::size_t k = 0; same && k < want.size(); ++k)
            same = rel_close(got.power[k], want[k], 1e-9);
        ck.expect(same, "rapsd bins");
        double energy = 0;
        for (float v : f.values())
            energy += static_cast<double>(v) * v;
        ck.expect(std::abs(got.total_power - static_cast<double>(h) * w * energy) <= 1e-6 * h * w * energy, "parseval");
    }
    {
        const auto s = rapsd(ReflectivityField(32, 32, 7.0f));
        ck.expect(*std::max_element(s.power.begin(), s.power.end()) < 1e-12 * s.total_power, "constant field spectrum");
        ReflectivityField sine(64, 64);
        for (int r = 0; r < 64; ++r)
            for (int c = 0; c < 64; ++c)
                sine(r, c) = static_cast<float>(std::sin(2 * std::numbers::pi * 4 * c / 64));
        const auto ss = rapsd(sine);
        const double total = std::accumulate(ss.power.begin(), ss.power.end(), 0.0);
        ck.expect(ss.power[3] / total > 0.99, "sinusoid bin 4");
    }

    for (int i = 0; i < n; ++i) {
        RainRateField o(24, 24), p(24, 24);
        for (int k = 0; k < 3; ++k) {
            const auto a = blob(24, 24, rng.uniform(0, 24), rng.uniform(0, 24), rng.uniform(1, 4), rng.uniform(1, 30));
            const auto b = blob(24, 24, rng.uniform(0, 24), rng.uniform(0, 24), rng.uniform(1, 4), rng.uniform(1, 30));
            for (std::size_t j = 0; j < o.size(); ++j) {
                o.values()[j] = std::max(o.values()[j], a.values()[j]);
                p.values()[j] = std::max(p.values()[j], b.values()[j]);
            }
        }
        const auto got = sal(o, p);
        const auto want = oracle::sal(o, p);
        ck.expect(static_cast<int>(got.obs_objects.size()) == want.obs_objects &&
                      static_cast<int>(got.pred_objects.size()) == want.pred_objects,
                  "sal object count");
        ck.expect(rel_close(got.S, want.S, 1e-9) && rel_close(got.A, want.A, 1e-9) && rel_close(got.L1, want.L1, 1e-9) &&
                      rel_close(got.L2, want.L2, 1e-9),
                  "sal components");
    }
    {
        auto obs = blob(100, 100, 40, 40, 6, 20);
        for (auto& v : obs.values())
            v = v < 0.1f ? 0.0f : v;
        const auto self = sal(obs, obs);
        ck.expect(std::abs(self.S) < 1e-12 && std::abs(self.A) < 1e-12 && std::abs(self.L) < 1e-12, "sal identity");
        auto twice = obs;
        for (auto& v : twice.values())
            v *= 2.0f;
        const auto d = sal(obs, twice);
        ck.expect(std::abs(d.A - 2.0 / 3.0) < 1e-6 && std::abs(d.L) < 1e-9, "sal doubling");
        const auto moved = sal(obs, blob(100, 100, 50, 50, 6, 20));
        ck.expect(std::abs(moved.L1 - 0.1) < 1e-3 && std::abs(moved.S) < 1e-3 && std::abs(moved.A) < 1e-3, "sal translation");
    }

    for (int i = 0; i < n; ++i) {
        std::vector<double> m(1 + rng.below(30));
        for (auto& v : m)
            v = rng.uniform(0, 60);
        const double y = rng.uniform(-5, 65);
        ck.expect(std::abs(crps(m, y) - oracle::crps_integral(m, y)) < 1e-6, "crps integral");
    }
    {
        const std::vector<double> two{0.0, 1.0};
        ck.expect(std::abs(crps(two, 0.0) - 0.25) < 1e-12 && std::abs(oracle::crps_integral(two, 0.0) - 0.25) < 1e-6, "crps {0,1}");
        const std::vector<double> one{4.5};
        ck.expect(std::abs(crps(one, 1.0) - 3.5) < 1e-12, "crps single member");
        const std::vector<double> equal(5, 2.0);
        ck.expect(crps(equal, 2.0) == 0.0, "crps exact members");
    }

    for (int i = 0; i < n; ++i) {
        const int members = 2 + static_cast<int>(rng.below(10));
        const int samples = 1 + static_cast<int>(rng.below(60));
        std::vector<double> ens(static_cast<std::size_t>(samples * members)), obs(static_cast<std::size_t>(samples));
        for (auto& v : ens)
            v = rng.uniform(0, 1);
        for (auto& v : obs)
            v = rng.uniform(0, 1);
        const auto h = rank_histogram(ens, obs, members, rng.next());
        std::vector<std::int64_t> want(static_cast<std::size_t>(members + 1), 0);
        for (int s = 0; s < samples; ++s)
            ++want[static_cast<std::size_t>(oracle::rank_no_ties(
                std::span(ens).subspan(static_cast<std::size_t>(s * members), static_cast<std::size_t>(members)),
                obs[static_cast<std::size_t>(s)]))];
        ck.expect(h.counts == want, "rank counts");
        ck.expect(std::abs(h.kl_from_uniform - oracle::kl_uniform(want)) < 1e-12, "kl");
    }
    {
        const std::vector<double> ens{0.1, 0.2, 0.3}, obs{5.0};
        const auto top = rank_histogram(ens, obs, 3);
        ck.expect(top.counts == std::vector<std::int64_t>{0, 0, 0, 1}, "rank top / single sample");

        const int members = 20, samples = 10000;
        Rng r(2024);
        std::vector<double> e(static_cast<std::size_t>(samples * members)), o(static_cast<std::size_t>(samples));
        for (int s = 0; s < samples; ++s) {
            o[static_cast<std::size_t>(s)] = r.normal();
            for (int m = 0; m < members; ++m)
                e[static_cast<std::size_t>(s * members + m)] = r.normal();
        }
        const auto flat = rank_histogram(e, o, members, 11);
        const double p = 1.0 / 21.0;
        const double se = std::sqrt(p * (1 - p) / samples);
        double chi2 = 0;
        bool within = true;
        for (auto c : flat.counts) {
            within &= std::abs(static_cast<double>(c) / samples - p) < 3 * se;
            chi2 += std::pow(c - samples * p, 2) / (samples * p);
        }
        ck.expect(within, "rank frequencies within 3 SE");
        ck.expect(flat.kl_from_uniform < 0.01, "rank kl < 0.01");
        ck.expect(boost::math::cdf(boost::math::complement(boost::math::chi_squared(20), chi2)) > 0.001, "rank chi-square");
    }
    return {ck.ok(), ck.summary()};
}

// ---------------------------------------------------------------- criterion 2

Outcome mwae_property()
{
    Checks ck;
    Rng rng(202);
    for (int i = 0; i < 200; ++i) {
        std::vector<float> x(1 + rng.below(4096)), y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] = static_cast<float>(rng.uniform(-4, 4));
            y[k] = static_cast<float>(rng.uniform(-4, 4));
        }
        long double want = 0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const long double sx = 1.0L / (1.0L + std::exp(-static_cast<long double>(x[k])));
            const long double sy = 1.0L / (1.0L + std::exp(-static_cast<long double>(y[k])));
            want += std::fabs(sx - sy) * sx;
        }
        const double got = mwae_loss(x, y);
        ck.expect(std::abs(got - static_cast<double>(want)) <= 1e-6 * std::abs(static_cast<double>(want)), "mwae vs loop");
        ck.expect(mwae_loss(x, x) == 0.0, "mwae(x, x)");
    }
    // Under-predicting a high value costs more than over-predicting a low one.
    for (int i = 0; i < 100; ++i) {
        const float hi = static_cast<float>(rng.uniform(0.5, 4));
        const float lo = static_cast<float>(rng.uniform(-4, hi - 0.1));
        const std::vector<float> a{hi}, b{lo};
        ck.expect(mwae_loss(a, b) > mwae_loss(b, a), "asymmetry");
    }
    return {ck.ok(), ck.summary()};
}

// ---------------------------------------------------------------- criterion 3

Outcome quantizer_exactness()
{
    Checks ck;
    Rng rng(303);
    Codebook cb;
    cb.size = 64;
    cb.dim = 8;
    for (int i = 0; i < cb.size * cb.dim; ++i)
        cb.vectors.push_back(static_cast<float>(rng.uniform(-1, 1)));
    // Duplicate rows force exact ties.
    std::copy_n(cb.vectors.begin() + 5 * 8, 8, cb.vectors.begin() + 40 * 8);
    std::copy_n(cb.vectors.begin() + 9 * 8, 8, cb.vectors.begin() + 63 * 8);

    std::vector<float> z(1000 * 8);
    for (std::size_t n = 0; n < 1000; ++n) {
        if (n % 10 == 0) {
            const int k = n % 20 == 0 ? 40 : 63;
            std::copy_n(cb.vectors.begin() + k * 8, 8, z.begin() + static_cast<std::ptrdiff_t>(n * 8));
        } else {
            for (int j = 0; j < 8; ++j)
                z[n * 8 + static_cast<std::size_t>(j)] = static_cast<float>(rng.uniform(-1.2, 1.2));
        }
    }
    const auto codes = nearest_codes(z, cb);
    int ties = 0;
    for (std::size_t n = 0; n < 1000; ++n) {
        int best = -1;
        float best_d = std::numeric_limits<float>::infinity();
        for (int k = 0; k < cb.size; ++k) {
            float d = 0;
            for (int j = 0; j < 8; ++j) {
                const float diff = z[n * 8 + static_cast<std::size_t>(j)] - cb.vectors[static_cast<std::size_t>(k * 8 + j)];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = k;
            } else if (d == best_d) {
                ++ties;
            }
        }
        ck.expect(codes[n] == best, "nearest index " + std::to_string(n));
    }
    ck.expect(ties >= 100, "tie cases exercised");
    return {ck.ok(), ck.summary() + ", " + std::to_string(ties) + " ties"};
}

// ---------------------------------------------------------------- criterion 4

Outcome geometry()
{
    Checks ck;
    TokenizerConfig full_scale;
    full_scale.alpha = 4;
    full_scale.codebook_size = 1024;
    const double ratio = compression_ratio(full_scale, 192, 192, 601);
    ck.expect(std::abs(ratio - 150.0) / 150.0 < 0.005, "compression ratio");

    const Tokenizer t4(full_scale, 1);
    const auto g12 = t4.encode(ReflectivityField(192, 192, 12.0f));
    ck.expect(g12.height() == 12 && g12.width() == 12, "192 px at alpha 4 -> 12x12");
    const auto g8 = t4.encode(ReflectivityField(128, 128, 12.0f));
    ck.expect(g8.height() == 8 && g8.width() == 8, "128 px at alpha 4 -> 8x8");
    const Tokenizer desk(TokenizerConfig{}, 1);
    const auto d8 = desk.encode(ReflectivityField(64, 64, 12.0f));
    ck.expect(d8.height() == 8 && d8.width() == 8, "64 px at alpha 3 -> 8x8");
    return {ck.ok(), ck.summary() + ", ratio " + fmt("%.2f", ratio)};
}

// ---------------------------------------------------------------- criterion 5

Outcome causality_ordering()
{
    Checks ck;
    ForecasterConfig c;
    c.context_frames = 4;
    c.tokens_h = 4;
    c.tokens_w = 4;
    const Forecaster f(c, 5);
    const int len = c.context_length();
    const int k = c.vocab_size;
    Rng rng(505);
    float worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::int32_t> a(static_cast<std::size_t>(len));
        for (auto& v : a)
            v = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(k)));
        const int cut = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(len - 1)));
        auto b = a;
        for (int i = cut; i < len; ++i)
            b[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(k)));
        const auto la = f.logits(a);
        const auto lb = f.logits(b);
        for (int i = 0; i < cut * k; ++i)
            worst = std::max(worst, std::abs(la[static_cast<std::size_t>(i)] - lb[static_cast<std::size_t>(i)]));
    }
    ck.expect(worst < 1e-4f, "causality");

    // Every grid shape up to 4 frames of 4 x 4 with distinct values.
    int shapes = 0;
    for (int t = 1; t <= 4; ++t)
        for (int h = 1; h <= 4; ++h)
            for (int w = 1; w <= 4; ++w) {
                std::vector<TokenGrid> grids;
                for (int q = 0; q < t; ++q) {
                    TokenGrid g(h, w);
                    for (int r = 0; r < h; ++r)
                        for (int col = 0; col < w; ++col)
                            g(r, col) = q * h * w + r * w + col;
                    grids.push_back(g);
                }
                const auto seq = flatten_spatiotemporal(grids);
                bool ordered = seq.tokens.size() == static_cast<std::size_t>(t * h * w);
                for (std::size_t i = 0; ordered && i < seq.tokens.size(); ++i)
                    ordered = seq.tokens[i] == static_cast<std::int32_t>(i);
                ck.expect(ordered, "flatten order");
                ck.expect(unflatten_spatiotemporal(seq) == grids, "unflatten inverse");
                ++shapes;
            }

    ForecasterConfig wide;
    wide.context_frames = 8;
    wide.tokens_h = 16;
    wide.tokens_w = 16;
    wide.max_positions = 2048;
    auto narrow = wide;
    narrow.tokens_h = 8;
    narrow.tokens_w = 8;
    const auto pw = Forecaster(wide, 0).parameter_count();
    const auto pn = Forecaster(narrow, 0).parameter_count();
    ck.expect(pw == pn, "parameter count equality");
    return {ck.ok(), ck.summary() + ", max logit change " + fmt("%.2e", worst) + ", " + std::to_string(shapes) +
                         " layouts, parameters " + std::to_string(pw) + " vs " + std::to_string(pn)};
}

// ------------------------------------------------------------ shared desk data

struct DeskData {
    std::vector<RadarSequence> train, val, test;
    std::vector<RadarSequence> cases;  ///< first held-out test sequences for ensemble checks
};

DeskData desk_data()
{
    DeskData d;
    for (int i = 0; i < kDeskSequences; ++i) {
        SynthSpec s;
        s.seed = static_cast<std::uint64_t>(i);
        auto seq = generate_sequence(s);
        switch (split_for_seed(s.seed)) {
        case Split::train: d.train.push_back(std::move(seq)); break;
        case Split::val: d.val.push_back(std::move(seq)); break;
        case Split::test: d.test.push_back(std::move(seq)); break;
        }
    }
    for (std::uint64_t seed = 0; static_cast<int>(d.cases.size()) < kEnsembleCases; ++seed) {
        if (split_for_seed(seed) != Split::test)
            continue;
        SynthSpec s;
        s.seed = seed;
        d.cases.push_back(generate_sequence(s));
    }
    return d;
}

std::vector<ReflectivityField> all_frames(const std::vector<RadarSequence>& seqs)
{
    std::vector<ReflectivityField> out;
    for (const auto& s : seqs)
        out.insert(out.end(), s.frames.begin(), s.frames.end());
    return out;
}

/// Frequency bias of reconstructions at a rain-rate threshold.
double reconstruction_bias(const Tokenizer& tok, const std::vector<ReflectivityField>& frames, double threshold)
{
    std::int64_t obs_events = 0, rec_events = 0;
    for (const auto& f : frames) {
        const auto t = contingency_table(dbz_to_rainrate(f), dbz_to_rainrate(tok.decode(tok.encode(f))), threshold);
        obs_events += t.hits + t.misses;
        rec_events += t.hits + t.false_alarms;
    }
    return static_cast<double>(rec_events) / static_cast<double>(obs_events);
}

/// 90th percentile of the wet (>= 0.1 mm/h) observed rain rates.
double top_decile_threshold(const std::vector<ReflectivityField>& frames)
{
    std::vector<double> wet;
    for (const auto& f : frames)
        for (float v : dbz_to_rainrate(f).values())
            if (v >= 0.1f)
                wet.push_back(v);
    std::sort(wet.begin(), wet.end());
    const double pos = 0.9 * static_cast<double>(wet.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, wet.size() - 1);
    return wet[lo] + (pos - static_cast<double>(lo)) * (wet[hi] - wet[lo]);
}

std::optional<Tokenizer> mwae_tokenizer;
std::optional<Forecaster> desk_forecaster;

// ---------------------------------------------------------------- criterion 6

Outcome tokenizer_training(const DeskData& d)
{
    Checks ck;
    TokenizerConfig cfg;
    const TokenizerSchedule sched;
    auto mwae = train_tokenizer(d.train, d.val, cfg, sched);
    cfg.reconstruction_loss = ReconstructionLoss::mae;
    auto mae = train_tokenizer(d.train, d.val, cfg, sched);

    const auto test = all_frames(d.test);
    double ssim = 0;
    for (const auto& f : test)
        ssim += structural_similarity(f, mwae.model.decode(mwae.model.encode(f)));
    ssim /= static_cast<double>(test.size());
    const auto train = all_frames(d.train);
    const double util = codebook_utilization(mwae.model, train);
    const double util_mae = codebook_utilization(mae.model, train);
    const double th = top_decile_threshold(test);
    const double bias_mwae = reconstruction_bias(mwae.model, test, th);
    const double bias_mae = reconstruction_bias(mae.model, test, th);

    ck.expect(!mwae.diverged && !mae.diverged, "training finished");
    ck.expect(ssim >= 0.85, "held-out SSIM >= 0.85");
    ck.expect(util >= 0.9, "utilization >= 0.9");
    ck.expect(bias_mae < bias_mwae, "MAE bias below MWAE bias");
    mwae_tokenizer.emplace(std::move(mwae.model));
    return {ck.ok(), ck.summary() + ", SSIM " + fmt("%.4f", ssim) + ", utilization " + fmt("%.3f", util) + " (MAE " +
                         fmt("%.3f", util_mae) + "), top-decile threshold " + fmt("%.2f", th) + " mm/h, BIAS MWAE " +
                         fmt("%.3f", bias_mwae) + " vs MAE " + fmt("%.3f", bias_mae)};
}

// ---------------------------------------------------------------- criterion 7

Outcome forecaster_training(const DeskData& d)
{
    if (!mwae_tokenizer)
        return {false, "no tokenizer from criterion 6"};
    const auto train = build_token_dataset(*mwae_tokenizer, d.train, true);
    const auto val = build_token_dataset(*mwae_tokenizer, d.val, false);
    ForecasterConfig cfg;
    cfg.vocab_size = mwae_tokenizer->config().codebook_size;
    ForecasterSchedule sched;
    sched.steps = kForecasterSteps;
    auto r = train_forecaster(train, val, cfg, sched);
    const double target = 0.8 * std::log(static_cast<double>(cfg.vocab_size));
    const bool ok = !r.diverged && r.final_heldout_loss <= target;
    std::string detail = "held-out CE " + fmt("%.4f", r.initial_heldout_loss) + " -> " + fmt("%.4f", r.final_heldout_loss) +
                         " nats, target <= " + fmt("%.4f", target);
    desk_forecaster.emplace(std::move(r.model));
    return {ok, detail};
}

// ---------------------------------------------------------------- criterion 8

Outcome ensemble_sanity(const DeskData& d)
{
    if (!mwae_tokenizer || !desk_forecaster)
        return {false, "no trained models"};
    const int context = desk_forecaster->config().context_frames - 1;
    double crps_model = 0, crps_persistence = 0;
    std::vector<std::int64_t> counts(kEnsembleMembers + 1, 0);
    for (int c = 0; c < kEnsembleCases; ++c) {
        const auto& seq = d.cases[static_cast<std::size_t>(c)];
        NowcastRequest req;
        req.context.frames.assign(seq.frames.begin(), seq.frames.begin() + context);
        req.lead_steps = 1;
        req.n_members = kEnsembleMembers;
        req.seed = static_cast<std::uint64_t>(c);
        const auto out = nowcast(req, *mwae_tokenizer, *desk_forecaster);
        std::vector<ReflectivityField> members;
        for (const auto& m : out.members)
            members.push_back(m.frames[0]);
        const auto& obs = seq.frames[static_cast<std::size_t>(context)];
        crps_model += crps_field(members, obs);
        const std::vector<ReflectivityField> persistence{seq.frames[static_cast<std::size_t>(context - 1)]};
        crps_persistence += crps_field(persistence, obs);

        std::vector<double> ens, ob;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            ob.push_back(obs.values()[i]);
            for (const auto& m : members)
                ens.push_back(m.values()[i]);
        }
        accumulate_rank_counts(ens, ob, kEnsembleMembers, derive_seed(static_cast<std::uint64_t>(c), 1), counts);
    }
    crps_model /= kEnsembleCases;
    crps_persistence /= kEnsembleCases;
    const double kl = kl_from_uniform(counts);
    Checks ck;
    ck.expect(crps_model < crps_persistence, "CRPS below persistence");
    ck.expect(kl < 0.1, "rank KL < 0.1");
    return {ck.ok(), ck.summary() + ", lead-1 CRPS " + fmt("%.4f", crps_model) + " dBZ vs persistence " +
                         fmt("%.4f", crps_persistence) + " dBZ, rank KL " + fmt("%.4f", kl)};
}

// ---------------------------------------------------------------- criterion 9

Outcome determinism(const DeskData& d)
{
    if (!mwae_tokenizer || !desk_forecaster)
        return {false, "no trained models"};
    Checks ck;
    const int context = desk_forecaster->config().context_frames - 1;
    for (int c = 0; c < 3; ++c) {
        const auto& seq = d.cases[static_cast<std::size_t>(c)];
        NowcastRequest req;
        req.context.frames.assign(seq.frames.begin(), seq.frames.begin() + context);
        req.lead_steps = 2;
        req.n_members = 4;
        req.seed = 77 + static_cast<std::uint64_t>(c);

        auto greedy = req;
        greedy.sampling = Sampling::parse("greedy");
        const auto g1 = nowcast(greedy, *mwae_tokenizer, *desk_forecaster);
        const auto g2 = nowcast(greedy, *mwae_tokenizer, *desk_forecaster);
        for (std::size_t m = 0; m < g1.members.size(); ++m)
            ck.expect(g1.members[m].frames == g2.members[m].frames, "greedy repeat");

        const auto a = nowcast(req, *mwae_tokenizer, *desk_forecaster);
        const auto b = nowcast(req, *mwae_tokenizer, *desk_forecaster);
        for (std::size_t m = 0; m < a.members.size(); ++m)
            ck.expect(a.members[m].frames == b.members[m].frames, "multinomial repeat");

        // A member depends only on (request seed, index).
        auto more = req;
        more.n_members = 6;
        const auto wide = nowcast(more, *mwae_tokenizer, *desk_forecaster);
        for (std::size_t m = 0; m < a.members.size(); ++m)
            ck.expect(wide.members[m].frames == a.members[m].frames, "member independent of ensemble size");
        const auto solo = generate_member(a.context_tokens, req.lead_steps, *mwae_tokenizer, *desk_forecaster, req.sampling,
                                          member_seed(req.seed, 2));
        ck.expect(solo.frames == a.members[2].frames, "member reproducible alone");
        std::set<std::uint64_t> seeds;
        for (const auto& m : wide.members)
            seeds.insert(m.seed);
        ck.expect(seeds.size() == wide.members.size(), "distinct member seeds");
    }
    return {ck.ok(), ck.summary()};
}

// --------------------------------------------------------------- criterion 10

int run_cli(const std::string& args, const std::filesystem::path& log)
{
    const std::string cmd = std::string(RADARCAST_BIN) + " " + args + " >> " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end()
{
    test::TempDir dir;
    const auto p = [&](const std::string& name) { return (dir.path() / name).string(); };
    const auto log = dir.path() / "cli.log";
    const std::string config = std::string(RADARCAST_CONFIG_DIR) + "/smoke.json";
    const std::vector<std::pair<std::string, std::string>> steps{
        {"synth", "synth --config " + config + " --n 12 --out " + p("data")},
        {"train-tokenizer", "train-tokenizer --config " + config + " --data " + p("data") + " --out " + p("tok")},
        {"train-forecaster", "train-forecaster --config " + config + " --data " + p("data") + " --tokenizer " + p("tok/tokenizer.ckpt") +
                                 " --out " + p("fc")},
        {"nowcast", "nowcast --config " + config + " --tokenizer " + p("tok/tokenizer.ckpt") + " --forecaster " +
                        p("fc/forecaster.ckpt") + " --context " + p("data/seq_00000.rprc") + " --out " + p("now")},
        {"verify", "verify --config " + config + " --obs " + p("data/seq_00000.rprc") + " --obs-offset 3 --forecast " + p("now") +
                       " --plots --out " + p("ver")},
        {"plot", "plot --report " + p("ver/verify_report.json") + " --field " + p("now/member_000.rprc") + " --out " + p("plots")},
    };
    std::string detail;
    for (const auto& [name, args] : steps) {
        const int code = run_cli(args, log);
        detail += name + "=" + std::to_string(code) + " ";
        if (code != 0) {
            std::ifstream in(log);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto text = ss.str();
            return {false, detail + "| " + text.substr(text.size() > 400 ? text.size() - 400 : 0)};
        }
    }
    return {true, detail};
}

}  // namespace

int main()
{
    const auto t0 = Clock::now();
    report(1, "metric oracles", metric_oracles, 120);
    report(2, "MWAE loss", mwae_property, 10);
    report(3, "quantizer exactness", quantizer_exactness, 30);
    report(4, "geometry arithmetic", geometry, 0);
    report(5, "causality and ordering", causality_ordering, 0);
    const auto data = desk_data();
    report(6, "desk tokenizer training", [&] { return tokenizer_training(data); }, 1800);
    report(7, "desk forecaster training", [&] { return forecaster_training(data); }, 1800);
    report(8, "ensemble sanity", [&] { return ensemble_sanity(data); }, 900);
    report(9, "determinism", [&] { return determinism(data); }, 0);
    report(10, "end-to-end CLI", end_to_end, 600);
    std::printf("acceptance: %d of 10 criteria failed [%.0f s]\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
