#include "radarcast/verification.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <mutex>

#include <fftw3.h>

#include "radarcast/rng.hpp"

namespace radarcast {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> gaussian_kernel(int size, double sigma)
{
    std::vector<double> k(static_cast<std::size_t>(size));
    const double mid = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - mid) * (i - mid) / (sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

// Separable 'valid' filtering of an h x w image; output is (h-n+1) x (w-n+1).
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w, const std::vector<double>& k)
{
    const int n = static_cast<int>(k.size());
    const int oh = h - n + 1;
    const int ow = w - n + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow, 0.0);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += k[static_cast<std::size_t>(i)] * img[static_cast<std::size_t>(r) * w + c + i];
            rows[static_cast<std::size_t>(r) * ow + c] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
    for (int r = 0; r < oh; ++r)
        for (int c = 0; c < ow; ++c) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += k[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>(r + i) * ow + c];
            out[static_cast<std::size_t>(r) * ow + c] = s;
        }
    return out;
}

}  // namespace

double structural_similarity(const ReflectivityField& a, const ReflectivityField& b, const SsimParams& p)
{
    require_same_shape(a, b, "ssim");
    const int h = a.height();
    const int w = a.width();
    int win = std::min(p.window, std::min(h, w));
    if (win % 2 == 0)
        --win;
    if (win < 1)
        throw InvalidArgument("ssim: empty field");
    const auto k = gaussian_kernel(win, p.sigma);

    const std::size_t n = a.size();
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = a.values()[i];
        y[i] = b.values()[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, k);
    const auto my = filter_valid(y, h, w, k);
    const auto mxx = filter_valid(xx, h, w, k);
    const auto myy = filter_valid(yy, h, w, k);
    const auto mxy = filter_valid(xy, h, w, k);

    const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
    const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
    double total = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = mxx[i] - mx[i] * mx[i];
        const double vy = myy[i] - my[i] * my[i];
        const double cxy = mxy[i] - mx[i] * my[i];
        total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return total / static_cast<double>(mx.size());
}

ContinuousScores continuous_scores(const ReflectivityField& obs, const ReflectivityField& pred, const SsimParams& ssim)
{
    require_same_shape(obs, pred, "continuous_scores");
    ContinuousScores s;
    if (obs.size() == 0)
        throw InvalidArgument("continuous_scores: empty field");
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double d = static_cast<double>(pred.values()[i]) - obs.values()[i];
        abs_sum += std::abs(d);
        sq_sum += d * d;
    }
    s.mae = abs_sum / static_cast<double>(obs.size());
    s.mse = sq_sum / static_cast<double>(obs.size());
    s.ssim = structural_similarity(obs, pred, ssim);
    return s;
}

ContingencyTable contingency_table(const RainRateField& obs, const RainRateField& pred, double threshold_mmh)
{
    require_same_shape(obs, pred, "contingency_table");
    ContingencyTable t;
    t.threshold_mmh = threshold_mmh;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const bool o = obs.values()[i] >= threshold_mmh;
        const bool f = pred.values()[i] >= threshold_mmh;
        if (o && f)
            ++t.hits;
        else if (o)
            ++t.misses;
        else if (f)
            ++t.false_alarms;
        else
            ++t.correct_negatives;
    }
    return t;
}

CategoricalScore categorical_score(const ContingencyTable& t)
{
    CategoricalScore s;
    s.threshold_mmh = t.threshold_mmh;
    s.table = t;
    const auto csi_den = t.hits + t.misses + t.false_alarms;
    const auto bias_den = t.hits + t.misses;
    s.csi = csi_den > 0 ? static_cast<double>(t.hits) / static_cast<double>(csi_den) : kNaN;
    s.bias = bias_den > 0 ? static_cast<double>(t.hits + t.false_alarms) / static_cast<double>(bias_den) : kNaN;
    s.no_events = csi_den == 0 || bias_den == 0;
    return s;
}

std::vector<CategoricalScore> categorical_scores(const RainRateField& obs, const RainRateField& pred,
                                                 std::span<const double> thresholds_mmh)
{
    std::vector<CategoricalScore> out;
    out.reserve(thresholds_mmh.size());
    for (double th : thresholds_mmh)
        out.push_back(categorical_score(contingency_table(obs, pred, th)));
    return out;
}

std::vector<CategoricalScore> categorical_scores(const RainRateField& obs, const RainRateField& pred)
{
    static constexpr double kDefault[] = {1.0, 10.0, 50.0};
    return categorical_scores(obs, pred, kDefault);
}

namespace {

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

template <typename Tag>
SpectrumResult rapsd(const Field<Tag>& field)
{
    const int h = field.height();
    const int w = field.width();
    if (h < 4 || w < 4)
        throw InvalidArgument("rapsd: both dims must be >= 4");

    const std::size_t n = field.size();
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = field.values()[i];
        buf[i][1] = 0.0;
    }
    fftw_execute(plan);

    const int nbins = std::min(h, w) / 2;
    const double scale = std::min(h, w);
    SpectrumResult out;
    std::vector<double> sum(static_cast<std::size_t>(nbins) + 1, 0.0);
    std::vector<std::int64_t> count(static_cast<std::size_t>(nbins) + 1, 0);
    for (int i = 0; i < h; ++i) {
        const double fy = static_cast<double>(i <= h / 2 ? i : i - h) / h;
        for (int j = 0; j < w; ++j) {
            const double fx = static_cast<double>(j <= w / 2 ? j : j - w) / w;
            const auto& c = buf[static_cast<std::size_t>(i) * w + j];
            const double p = c[0] * c[0] + c[1] * c[1];
            out.total_power += p;
            const long bin = std::lround(std::sqrt(fy * fy + fx * fx) * scale);
            if (bin >= 1 && bin <= nbins) {
                sum[static_cast<std::size_t>(bin)] += p;
                ++count[static_cast<std::size_t>(bin)];
            }
        }
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);

    for (int k = 1; k <= nbins; ++k) {
        const double mean = count[static_cast<std::size_t>(k)] > 0
                                ? sum[static_cast<std::size_t>(k)] / static_cast<double>(count[static_cast<std::size_t>(k)])
                                : 0.0;
        out.wavenumber.push_back(k);
        out.wavelength_km.push_back(scale * field.resolution_km / k);
        out.power.push_back(mean);
        out.power_db.push_back(10.0 * std::log10(mean));
    }
    return out;
}

template SpectrumResult rapsd(const ReflectivityField&);
template SpectrumResult rapsd(const RainRateField&);

namespace {

double percentile_linear(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    if (v.empty())
        return kNaN;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct FieldSummary {
    std::vector<SalObject> objects;
    double domain_mean = 0.0;
    double total = 0.0;
    double com_row = 0.0;
    double com_col = 0.0;
};

FieldSummary summarize(const RainRateField& f, const SalParams& p)
{
    const int h = f.height();
    const int w = f.width();
    std::vector<double> r(f.size());
    std::vector<double> wet;
    FieldSummary s;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = f.values()[i];
        r[i] = v >= p.wet_threshold_mmh ? v : 0.0;
        if (r[i] > 0.0) {
            wet.push_back(r[i]);
            s.total += r[i];
            s.com_row += r[i] * static_cast<double>(i / static_cast<std::size_t>(w));
            s.com_col += r[i] * static_cast<double>(i % static_cast<std::size_t>(w));
        }
    }
    s.domain_mean = s.total / static_cast<double>(f.size());
    if (wet.empty())
        return s;
    s.com_row /= s.total;
    s.com_col /= s.total;

    const double threshold = p.object_threshold_factor * percentile_linear(wet, 0.95);
    std::vector<int> label(f.size(), -1);
    std::deque<int> queue;
    for (int start = 0; start < static_cast<int>(f.size()); ++start) {
        if (label[static_cast<std::size_t>(start)] >= 0 || r[static_cast<std::size_t>(start)] <= 0.0 ||
            r[static_cast<std::size_t>(start)] < threshold)
            continue;
        const int id = static_cast<int>(s.objects.size());
        SalObject obj;
        label[static_cast<std::size_t>(start)] = id;
        queue.push_back(start);
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            const int cr = cur / w;
            const int cc = cur % w;
            const double v = r[static_cast<std::size_t>(cur)];
            ++obj.pixels;
            obj.amount += v;
            obj.peak = std::max(obj.peak, v);
            obj.center_row += v * cr;
            obj.center_col += v * cc;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int nr = cr + dr;
                    const int nc = cc + dc;
                    if ((dr == 0 && dc == 0) || nr < 0 || nr >= h || nc < 0 || nc >= w)
                        continue;
                    const int ni = nr * w + nc;
                    const double nv = r[static_cast<std::size_t>(ni)];
                    if (label[static_cast<std::size_t>(ni)] < 0 && nv > 0.0 && nv >= threshold) {
                        label[static_cast<std::size_t>(ni)] = id;
                        queue.push_back(ni);
                    }
                }
        }
        obj.center_row /= obj.amount;
        obj.center_col /= obj.amount;
        s.objects.push_back(obj);
    }
    return s;
}

double scaled_volume(const std::vector<SalObject>& objects)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& o : objects) {
        num += o.amount * (o.amount / o.peak);
        den += o.amount;
    }
    return num / den;
}

double weighted_distance(const FieldSummary& s)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& o : s.objects) {
        num += o.amount * std::hypot(o.center_row - s.com_row, o.center_col - s.com_col);
        den += o.amount;
    }
    return num / den;
}

}  // namespace

SalScore sal(const RainRateField& obs, const RainRateField& pred, const SalParams& params)
{
    require_same_shape(obs, pred, "sal");
    const auto o = summarize(obs, params);
    const auto p = summarize(pred, params);

    SalScore s;
    s.obs_objects = o.objects;
    s.pred_objects = p.objects;
    if (o.domain_mean + p.domain_mean > 0.0) {
        s.A = (p.domain_mean - o.domain_mean) / (0.5 * (p.domain_mean + o.domain_mean));
    } else {
        s.A = kNaN;
        s.amplitude_defined = false;
    }
    if (o.objects.empty() || p.objects.empty()) {
        s.structure_defined = false;
        s.S = s.L = s.L1 = s.L2 = kNaN;
        return s;
    }
    const double vo = scaled_volume(o.objects);
    const double vp = scaled_volume(p.objects);
    s.S = (vp - vo) / (0.5 * (vp + vo));
    const double diag = std::hypot(static_cast<double>(obs.height()), static_cast<double>(obs.width()));
    s.L1 = std::hypot(p.com_row - o.com_row, p.com_col - o.com_col) / diag;
    s.L2 = 2.0 * std::abs(weighted_distance(p) - weighted_distance(o)) / diag;
    s.L = s.L1 + s.L2;
    return s;
}

double crps(std::span<const double> members, double obs)
{
    if (members.empty())
        throw InvalidArgument("crps: empty ensemble");
    std::vector<double> x(members.begin(), members.end());
    std::sort(x.begin(), x.end());
    const auto n = static_cast<double>(x.size());
    double abs_err = 0.0;
    double spread = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        abs_err += std::abs(x[i] - obs);
        // sum_{i,j} |x_i - x_j| = 2 sum_i (2i - n + 1) x_(i) for sorted x
        spread += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
    }
    const double mean_abs = abs_err / n;
    const double mean_pair = 2.0 * spread / (n * n);
    return std::max(0.0, mean_abs - 0.5 * mean_pair);
}

double crps_field(std::span<const ReflectivityField> members, const ReflectivityField& obs)
{
    if (members.empty())
        throw InvalidArgument("crps_field: empty ensemble");
    for (const auto& m : members)
        require_same_shape(m, obs, "crps_field");
    std::vector<double> buf(members.size());
    double total = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        for (std::size_t m = 0; m < members.size(); ++m)
            buf[m] = members[m].values()[i];
        total += crps(buf, obs.values()[i]);
    }
    return total / static_cast<double>(obs.size());
}

void accumulate_rank_counts(std::span<const double> ensembles, std::span<const double> observations,
                            int n_members, std::uint64_t seed, std::vector<std::int64_t>& counts,
                            double wet_threshold)
{
    if (n_members < 1)
        throw InvalidArgument("rank_histogram: need at least one member");
    if (ensembles.size() != observations.size() * static_cast<std::size_t>(n_members))
        throw ShapeMismatch("rank_histogram: " + std::to_string(ensembles.size()) + " member values for " +
                            std::to_string(observations.size()) + " observations x " +
                            std::to_string(n_members) + " members");
    if (counts.size() != static_cast<std::size_t>(n_members) + 1)
        counts.assign(static_cast<std::size_t>(n_members) + 1, 0);
    Rng rng(seed);
    for (std::size_t s = 0; s < observations.size(); ++s) {
        const double y = observations[s];
        const auto row = ensembles.subspan(s * static_cast<std::size_t>(n_members), static_cast<std::size_t>(n_members));
        if (wet_threshold >= 0.0 && y < wet_threshold &&
            std::all_of(row.begin(), row.end(), [&](double v) { return v < wet_threshold; }))
            continue;
        std::uint64_t below = 0;
        std::uint64_t ties = 0;
        for (double v : row) {
            if (v < y)
                ++below;
            else if (v == y)
                ++ties;
        }
        const auto rank = below + (ties > 0 ? rng.below(ties + 1) : 0);
        ++counts[static_cast<std::size_t>(rank)];
    }
}

double kl_from_uniform(std::span<const std::int64_t> counts)
{
    std::int64_t total = 0;
    for (auto c : counts)
        total += c;
    if (total == 0)
        return kNaN;
    double kl = 0.0;
    for (auto c : counts) {
        if (c == 0)
            continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        // c * bins / total is formed from exact integers so uniform counts give log(1) = 0.
        kl += p * std::log(static_cast<double>(c * static_cast<std::int64_t>(counts.size())) / static_cast<double>(total));
    }
    return kl;
}

RankHistogramResult rank_histogram(std::span<const double> ensembles, std::span<const double> observations,
                                   int n_members, std::uint64_t seed, double wet_threshold)
{
    RankHistogramResult r;
    r.counts.assign(static_cast<std::size_t>(std::max(n_members, 0)) + 1, 0);
    accumulate_rank_counts(ensembles, observations, n_members, seed, r.counts, wet_threshold);
    for (auto c : r.counts)
        r.n_samples += c;
    r.kl_from_uniform = kl_from_uniform(r.counts);
    return r;
}

}  // namespace radarcast
