#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zkseries/circuit.hpp"
#include "zkseries/sharp.hpp"
#include "zkseries/timeseries.hpp"

namespace zkseries {

struct EvalDataset {
    std::vector<std::string> users;
    std::vector<std::vector<TimeSeries>> readings;  // per user
};

// Per user: a random template series, readings = template plus bounded
// integer noise clamped to [0, K]. Deterministic in the seed.
EvalDataset generate_synthetic_dataset(std::size_t users, std::size_t n_per_user, std::size_t T,
                                       std::size_t m, std::int64_t intra_noise,
                                       std::int64_t inter_spread, std::uint64_t seed,
                                       std::int64_t K = 1'000'000);

// Plaintext authentication distance of `probe` against a base set: combine
// the k nearest series distances by sum or max.
Dist auth_distance(const std::vector<TimeSeries>& base, const TimeSeries& probe,
                   const DistanceConfig& cfg, AuthMode mode, std::size_t k);

// Threshold such that at least q of the user's n readings self-authenticate:
// one past the q-th smallest leave-one-out authentication distance.
i128 calibrate_threshold(const std::vector<TimeSeries>& user_readings, const DistanceConfig& cfg,
                         AuthMode mode, std::size_t k, std::size_t q);

struct UserEval {
    std::string user;
    i128 theta = 0;
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
};

struct EvalReport {
    std::size_t q = 0, k = 0;
    std::string local, series, mode;
    std::vector<UserEval> per_user;
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
    std::uint64_t genuine_attempts = 0, impostor_attempts = 0;

    double accuracy() const;
    double fpr() const;
    double precision() const;
    double recall() const;
};

// Per user: calibrate on the user's own readings, then score the user's own
// readings (leave-one-out) as genuine attempts and every other user's
// readings as impostor attempts.
EvalReport evaluate_metrics(const EvalDataset& data, const DistanceConfig& cfg, AuthMode mode,
                            std::size_t k, std::size_t q);

std::string report_to_json(const EvalReport& report);

struct BenchRow {
    std::size_t T = 0;
    double diag_seconds = 0;
    double dtw_seconds = 0;
    double sharp_gen_seconds = 0;
    double sharp_verify_seconds = 0;
};

// Medians over >= 5 repetitions; the range-proof batch holds m*T claims.
std::vector<BenchRow> run_benchmarks(const std::vector<std::size_t>& sizes, std::size_t m,
                                     const DistanceConfig& cfg, unsigned soundness_bits,
                                     const PrimeCache& cache, std::uint64_t seed = 7);

std::string bench_to_csv(const std::vector<BenchRow>& rows);

// median wall-clock seconds of fn() over `reps` samples, each averaged over
// enough inner iterations to be measurable
double median_seconds(const std::function<void()>& fn, int reps = 5);

}  // namespace zkseries
