#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace zkseries {

// One coordinate of a time series element. Nonnegative, bounded by the
// normalization scale K.
using Value = std::int64_t;

// Distance accumulator. Squared-Euclidean sums reach m*T*K^2, and threshold
// arithmetic multiplies that by k, so all distance math runs on 128 bits.
using Dist = __int128;

struct TimeSeries {
    std::size_t m = 0;                       // dimension per element
    std::vector<std::vector<Value>> points;  // length T, each of size m

    std::size_t length() const { return points.size(); }
};

enum class LocalMetric { manhattan, squared_euclidean, chebyshev };
enum class SeriesMetric { diagonal_sum, dtw, frechet, twed };

struct DistanceConfig {
    LocalMetric local = LocalMetric::manhattan;
    SeriesMetric series = SeriesMetric::dtw;
    std::int64_t lambda = 1'000'000;          // TWED time-shift penalty
    std::optional<std::int64_t> band;         // Sakoe-Chiba half-width, DTW only
    std::int64_t K = 1'000'000;               // normalization scale
};

// An alignment path between two series. Pairs are 1-based; edge_values holds
// the per-edge cost committed by the proof layer (one entry per pair).
struct CouplingWitness {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Dist> edge_values;
};

struct SeriesDistance {
    Dist distance = 0;
    CouplingWitness witness;
};

std::string local_metric_name(LocalMetric m);
std::string series_metric_name(SeriesMetric s);
LocalMetric local_metric_from_name(const std::string& name);
SeriesMetric series_metric_from_name(const std::string& name);

// Maps raw per-signal readings into [0, K] with x -> K*(x-min)/(max-min),
// rounded half-up and clamped. Throws if a signal has max <= min.
TimeSeries normalize_series(const std::vector<std::vector<double>>& raw,
                            const std::vector<std::pair<double, double>>& per_signal_min_max,
                            std::int64_t K);

// Moving-average filter: window i (1-based) averages per-coordinate over
// input indices (i-1)*step+1 ... min((i-1)*step+window, T). Output length is
// ceil(T/step); means are rounded half-up.
TimeSeries smooth_moving_average(const TimeSeries& x, std::size_t step, std::size_t window);

Dist local_distance(std::span<const Value> a, std::span<const Value> b, LocalMetric metric);

// Series distances. Each returns both the distance and the witness coupling
// that realizes it (edge-value sum, or max for Frechet, equals the distance).
SeriesDistance diagonal_sum_distance(const TimeSeries& x, const TimeSeries& y,
                                     const DistanceConfig& cfg);
SeriesDistance dtw_distance(const TimeSeries& x, const TimeSeries& y, const DistanceConfig& cfg);
SeriesDistance frechet_distance(const TimeSeries& x, const TimeSeries& y,
                                const DistanceConfig& cfg);
SeriesDistance twed_distance(const TimeSeries& x, const TimeSeries& y, const DistanceConfig& cfg);

SeriesDistance series_distance(const TimeSeries& x, const TimeSeries& y,
                               const DistanceConfig& cfg);

// True iff the pairs satisfy the endpoint, step and band constraints of the
// named series distance over series of lengths tx and ty.
bool validate_coupling(const CouplingWitness& w, std::size_t tx, std::size_t ty,
                       SeriesMetric kind, std::optional<std::int64_t> band);

// Exhaustive-enumeration oracle over all valid couplings. Requires
// |x|*|y| <= 64; kept free of the dynamic programs above.
Dist brute_force_series_distance(const TimeSeries& x, const TimeSeries& y,
                                 const DistanceConfig& cfg);

}  // namespace zkseries
