#include "zkseries/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace zkseries {

namespace {

// Fixed-algorithm generator so datasets are identical across platforms.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::int64_t below(std::int64_t n) {  // uniform enough for data generation
        return n <= 0 ? 0 : static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(n));
    }
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

EvalDataset generate_synthetic_dataset(std::size_t users, std::size_t n_per_user, std::size_t T,
                                       std::size_t m, std::int64_t intra_noise,
                                       std::int64_t inter_spread, std::uint64_t seed,
                                       std::int64_t K) {
    if (users == 0 || n_per_user == 0 || T == 0 || m == 0)
        throw std::invalid_argument("generate_synthetic_dataset: all sizes must be positive");
    EvalDataset data;
    SplitMix64 rng(seed);
    for (std::size_t u = 0; u < users; ++u) {
        data.users.push_back("user" + std::to_string(u));
        std::vector<std::vector<Value>> tmpl(T, std::vector<Value>(m));
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < m; ++j) tmpl[t][j] = rng.below(inter_spread + 1);
        std::vector<TimeSeries> readings;
        for (std::size_t r = 0; r < n_per_user; ++r) {
            TimeSeries ts;
            ts.m = m;
            ts.points.resize(T, std::vector<Value>(m));
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t j = 0; j < m; ++j) {
                    std::int64_t v = tmpl[t][j] + rng.below(2 * intra_noise + 1) - intra_noise;
                    ts.points[t][j] = std::clamp<std::int64_t>(v, 0, K);
                }
            }
            readings.push_back(std::move(ts));
        }
        data.readings.push_back(std::move(readings));
    }
    return data;
}

Dist auth_distance(const std::vector<TimeSeries>& base, const TimeSeries& probe,
                   const DistanceConfig& cfg, AuthMode mode, std::size_t k) {
    if (base.empty()) throw std::invalid_argument("auth_distance: empty base set");
    if (k < 1 || k > base.size()) throw std::invalid_argument("auth_distance: k out of range");
    std::vector<Dist> distances;
    distances.reserve(base.size());
    for (const auto& b : base) distances.push_back(series_distance(b, probe, cfg).distance);
    std::sort(distances.begin(), distances.end());
    if (mode == AuthMode::knn_max) return distances[k - 1];
    Dist acc = 0;
    for (std::size_t i = 0; i < k; ++i) acc += distances[i];
    return acc;
}

i128 calibrate_threshold(const std::vector<TimeSeries>& user_readings, const DistanceConfig& cfg,
                         AuthMode mode, std::size_t k, std::size_t q) {
    const std::size_t n = user_readings.size();
    if (n < 2) throw std::invalid_argument("calibrate_threshold: need >= 2 readings");
    if (q < 1 || q > n) throw std::invalid_argument("calibrate_threshold: q must be in [1, n]");
    if (k > n - 1) throw std::invalid_argument("calibrate_threshold: k must be <= n-1");
    std::vector<Dist> self_distances;
    self_distances.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<TimeSeries> others;
        others.reserve(n - 1);
        for (std::size_t o = 0; o < n; ++o)
            if (o != i) others.push_back(user_readings[o]);
        self_distances.push_back(auth_distance(others, user_readings[i], cfg, mode, k));
    }
    std::sort(self_distances.begin(), self_distances.end());
    // one past the q-th order statistic realizes the strict criterion
    return static_cast<i128>(self_distances[q - 1]) + 1;
}

double EvalReport::accuracy() const {
    std::uint64_t total = tp + fn + fp + tn;
    return total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
}

double EvalReport::fpr() const {
    return impostor_attempts == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(impostor_attempts);
}

double EvalReport::precision() const {
    // no positive predictions at all counts as a clean run
    return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double EvalReport::recall() const {
    return genuine_attempts == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(genuine_attempts);
}

EvalReport evaluate_metrics(const EvalDataset& data, const DistanceConfig& cfg, AuthMode mode,
                            std::size_t k, std::size_t q) {
    if (data.users.size() < 2) throw std::invalid_argument("evaluate_metrics: need >= 2 users");
    EvalReport report;
    report.q = q;
    report.k = k;
    report.local = local_metric_name(cfg.local);
    report.series = series_metric_name(cfg.series);
    report.mode = auth_mode_name(mode);

    for (std::size_t u = 0; u < data.users.size(); ++u) {
        const auto& own = data.readings[u];
        UserEval ue;
        ue.user = data.users[u];
        ue.theta = calibrate_threshold(own, cfg, mode, k, q);

        // genuine attempts: this user's readings, leave-one-out
        for (std::size_t i = 0; i < own.size(); ++i) {
            std::vector<TimeSeries> others;
            others.reserve(own.size() - 1);
            for (std::size_t o = 0; o < own.size(); ++o)
                if (o != i) others.push_back(own[o]);
            Dist d = auth_distance(others, own[i], cfg, mode, k);
            if (static_cast<i128>(d) < ue.theta)
                ++ue.tp;
            else
                ++ue.fn;
        }
        // impostor attempts: every other user's readings against the full base set
        for (std::size_t v = 0; v < data.users.size(); ++v) {
            if (v == u) continue;
            for (const auto& probe : data.readings[v]) {
                Dist d = auth_distance(own, probe, cfg, mode, k);
                if (static_cast<i128>(d) < ue.theta)
                    ++ue.fp;
                else
                    ++ue.tn;
            }
        }
        report.tp += ue.tp;
        report.fn += ue.fn;
        report.fp += ue.fp;
        report.tn += ue.tn;
        report.genuine_attempts += ue.tp + ue.fn;
        report.impostor_attempts += ue.fp + ue.tn;
        report.per_user.push_back(std::move(ue));
    }
    return report;
}

std::string report_to_json(const EvalReport& r) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"local\": \"" << r.local << "\",\n";
    out << "  \"series\": \"" << r.series << "\",\n";
    out << "  \"mode\": \"" << r.mode << "\",\n";
    out << "  \"q\": " << r.q << ",\n";
    out << "  \"k\": " << r.k << ",\n";
    out << "  \"counts\": {\"tp\": " << r.tp << ", \"fn\": " << r.fn << ", \"fp\": " << r.fp
        << ", \"tn\": " << r.tn << "},\n";
    out << "  \"genuine_attempts\": " << r.genuine_attempts << ",\n";
    out << "  \"impostor_attempts\": " << r.impostor_attempts << ",\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", r.accuracy());
    out << "  \"accuracy\": " << buf << ",\n";
    std::snprintf(buf, sizeof(buf), "%.6f", r.fpr());
    out << "  \"fpr\": " << buf << ",\n";
    std::snprintf(buf, sizeof(buf), "%.6f", r.precision());
    out << "  \"precision\": " << buf << ",\n";
    std::snprintf(buf, sizeof(buf), "%.6f", r.recall());
    out << "  \"recall\": " << buf << ",\n";
    out << "  \"per_user\": [\n";
    for (std::size_t i = 0; i < r.per_user.size(); ++i) {
        const auto& u = r.per_user[i];
        out << "    {\"user\": \"" << u.user << "\", \"theta\": \"" << i128_to_string(u.theta)
            << "\", \"tp\": " << u.tp << ", \"fn\": " << u.fn << ", \"fp\": " << u.fp
            << ", \"tn\": " << u.tn << "}" << (i + 1 < r.per_user.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

double median_seconds(const std::function<void()>& fn, int reps) {
    // calibrate an inner iteration count so each sample is measurable
    double t0 = now_seconds();
    fn();
    double once = now_seconds() - t0;
    int inner = once > 0 ? std::max(1, static_cast<int>(0.01 / std::max(once, 1e-9))) : 1;
    inner = std::min(inner, 10000);

    std::vector<double> samples;
    samples.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        double start = now_seconds();
        for (int i = 0; i < inner; ++i) fn();
        samples.push_back((now_seconds() - start) / inner);
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

std::vector<BenchRow> run_benchmarks(const std::vector<std::size_t>& sizes, std::size_t m,
                                     const DistanceConfig& cfg, unsigned soundness_bits,
                                     const PrimeCache& cache, std::uint64_t seed) {
    CommitParams params = setup_params(kDefaultParamsSeed);
    SplitMix64 data_rng(seed);
    std::vector<BenchRow> rows;

    for (std::size_t T : sizes) {
        BenchRow row;
        row.T = T;

        auto make_series = [&]() {
            TimeSeries ts;
            ts.m = m;
            ts.points.resize(T, std::vector<Value>(m));
            for (auto& p : ts.points)
                for (auto& v : p) v = data_rng.below(cfg.K + 1);
            return ts;
        };
        TimeSeries x = make_series();
        TimeSeries y = make_series();

        row.diag_seconds = median_seconds([&]() { diagonal_sum_distance(x, y, cfg); });
        row.dtw_seconds = median_seconds([&]() { dtw_distance(x, y, cfg); });

        // range-proof batch of m*T claims, as produced by a d1 circuit of length T
        const std::size_t n_claims = m * T;
        std::vector<RangeClaim> claims(n_claims);
        std::vector<RangeWitness> wits(n_claims);
        ScalarRng rng;
        for (std::size_t i = 0; i < n_claims; ++i) {
            wits[i].value = static_cast<u128>(data_rng.below(cfg.K + 1));
            wits[i].randomness = rng.next_scalar();
            claims[i].bound = static_cast<u128>(cfg.K);
            claims[i].commitment =
                commit(params, Scalar::from_u128(wits[i].value), wits[i].randomness);
        }
        row.sharp_gen_seconds = median_seconds(
            [&]() {
                Transcript tr("bench.sharp");
                sharp_prove_batch(params, tr, claims, wits, soundness_bits, cache, rng);
            },
            5);
        Transcript tr_gen("bench.sharp");
        SharpBatchProof proof =
            sharp_prove_batch(params, tr_gen, claims, wits, soundness_bits, cache, rng);
        row.sharp_verify_seconds = median_seconds(
            [&]() {
                Transcript tr("bench.sharp");
                if (!sharp_verify_batch(params, tr, claims, proof))
                    throw std::runtime_error("bench: proof rejected");
            },
            5);
        rows.push_back(row);
    }
    return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "T,diag_sum_s,dtw_s,sharp_gen_s,sharp_verify_s\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%zu,%.9f,%.9f,%.9f,%.9f\n", r.T, r.diag_seconds,
                      r.dtw_seconds, r.sharp_gen_seconds, r.sharp_verify_seconds);
        out << buf;
    }
    return out.str();
}

}  // namespace zkseries
