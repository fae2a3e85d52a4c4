#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "radarcast/field.hpp"

namespace radarcast {

struct ContinuousScores {
    double mae = 0.0;
    double mse = 0.0;
    double ssim = 0.0;
};

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double data_range = 60.0;
    double k1 = 0.01;
    double k2 = 0.03;
};

/// MAE, MSE and mean single-scale SSIM (Gaussian window, valid region).
ContinuousScores continuous_scores(const ReflectivityField& obs, const ReflectivityField& pred,
                                   const SsimParams& ssim = {});

double structural_similarity(const ReflectivityField& a, const ReflectivityField& b, const SsimParams& params = {});

struct ContingencyTable {
    std::int64_t hits = 0;
    std::int64_t misses = 0;
    std::int64_t false_alarms = 0;
    std::int64_t correct_negatives = 0;
    double threshold_mmh = 0.0;

    std::int64_t total() const { return hits + misses + false_alarms + correct_negatives; }
};

/// An event is a pixel with rain rate >= threshold.
ContingencyTable contingency_table(const RainRateField& obs, const RainRateField& pred, double threshold_mmh);

struct CategoricalScore {
    double threshold_mmh = 0.0;
    double csi = 0.0;   ///< NaN when no events
    double bias = 0.0;  ///< NaN when no events
    bool no_events = false;
    ContingencyTable table;
};

CategoricalScore categorical_score(const ContingencyTable& table);

std::vector<CategoricalScore> categorical_scores(const RainRateField& obs, const RainRateField& pred,
                                                 std::span<const double> thresholds_mmh);
std::vector<CategoricalScore> categorical_scores(const RainRateField& obs, const RainRateField& pred);

struct SpectrumResult {
    std::vector<int> wavenumber;         ///< radial bins 1..floor(min(H, W) / 2)
    std::vector<double> wavelength_km;
    std::vector<double> power;           ///< mean |F|^2 per bin
    std::vector<double> power_db;
    double total_power = 0.0;            ///< sum of |F|^2 over every frequency, DC included
};

/// Radially averaged power spectral density of an unnormalized 2-D DFT.
/// Requires both dims >= 4.
template <typename Tag>
SpectrumResult rapsd(const Field<Tag>& field);

extern template SpectrumResult rapsd(const ReflectivityField&);
extern template SpectrumResult rapsd(const RainRateField&);

struct SalObject {
    int pixels = 0;
    double amount = 0.0;   ///< integrated rain rate
    double peak = 0.0;
    double center_row = 0.0;
    double center_col = 0.0;
};

struct SalScore {
    double S = 0.0;
    double A = 0.0;
    double L = 0.0;
    double L1 = 0.0;
    double L2 = 0.0;
    bool structure_defined = true;   ///< false when either field has no objects
    bool amplitude_defined = true;   ///< false when both fields are dry
    std::vector<SalObject> obs_objects;
    std::vector<SalObject> pred_objects;
};

struct SalParams {
    double object_threshold_factor = 1.0 / 15.0;
    double wet_threshold_mmh = 0.1;  ///< pixels below count as dry (zero)
};

/// Structure / amplitude / location. Objects are 8-connected regions at or
/// above factor x the 95th percentile of the wet pixels.
SalScore sal(const RainRateField& obs, const RainRateField& pred, const SalParams& params = {});

/// mean|X - y| - 0.5 mean|X - X'| over all member pairs.
double crps(std::span<const double> members, double obs);

/// Per-pixel CRPS averaged over the domain; members share the obs shape.
double crps_field(std::span<const ReflectivityField> members, const ReflectivityField& obs);

struct RankHistogramResult {
    std::vector<std::int64_t> counts;  ///< n_members + 1 ranks
    double kl_from_uniform = 0.0;      ///< natural log
    std::int64_t n_samples = 0;
};

/// `ensembles` is n_samples x n_members row-major. Ties between members and
/// the observation are broken uniformly at random with a generator seeded by
/// `seed`. With `wet_threshold` set, samples whose observation and members all
/// fall below it are skipped.
RankHistogramResult rank_histogram(std::span<const double> ensembles, std::span<const double> observations,
                                   int n_members, std::uint64_t seed = 0, double wet_threshold = -1.0);

void accumulate_rank_counts(std::span<const double> ensembles, std::span<const double> observations,
                            int n_members, std::uint64_t seed, std::vector<std::int64_t>& counts,
                            double wet_threshold = -1.0);

double kl_from_uniform(std::span<const std::int64_t> counts);

}  // namespace radarcast
