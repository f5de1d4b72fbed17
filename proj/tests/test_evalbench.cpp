#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zkseries/evalbench.hpp"

using namespace zkseries;

namespace {

TimeSeries make_series(const std::vector<Value>& vals) {
    TimeSeries ts;
    ts.m = 1;
    for (Value v : vals) ts.points.push_back({v});
    return ts;
}

DistanceConfig sum_cfg() {
    DistanceConfig cfg;
    cfg.local = LocalMetric::manhattan;
    cfg.series = SeriesMetric::diagonal_sum;
    cfg.K = 1000;
    return cfg;
}

}  // namespace

TEST_CASE("calibrate_threshold is one past the q-th order statistic") {
    // base readings at pairwise distances 1..10 from one another is hard to
    // construct exactly; use singleton series on a line where leave-one-out
    // nearest distance is the gap to the closest neighbor
    std::vector<TimeSeries> readings;
    // points 0, 10, 30, 60: nearest-neighbor distances 10, 10, 20, 30
    for (Value v : {0, 10, 30, 60}) readings.push_back(make_series({v}));
    auto cfg = sum_cfg();
    CHECK(calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 1) == 11);
    CHECK(calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 2) == 11);
    CHECK(calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 3) == 21);
    CHECK(calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 4) == 31);

    CHECK_THROWS_AS(calibrate_threshold({readings[0]}, cfg, AuthMode::nearest, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 5),
                    std::invalid_argument);
}

TEST_CASE("ties at the q-th distance let more than q readings pass") {
    // equally spaced singletons: every leave-one-out nearest distance is 10
    std::vector<TimeSeries> readings;
    for (Value v : {0, 10, 20}) readings.push_back(make_series({v}));
    auto cfg = sum_cfg();
    i128 theta = calibrate_threshold(readings, cfg, AuthMode::nearest, 1, 1);
    CHECK(theta == 11);
    int passing = 0;
    for (std::size_t i = 0; i < readings.size(); ++i) {
        std::vector<TimeSeries> others;
        for (std::size_t o = 0; o < readings.size(); ++o)
            if (o != i) others.push_back(readings[o]);
        if (static_cast<i128>(auth_distance(others, readings[i], cfg, AuthMode::nearest, 1)) <
            theta)
            ++passing;
    }
    CHECK(passing == 3);  // q was 1
}

TEST_CASE("calibration is monotone in q and q = n always self-authenticates") {
    EvalDataset data = generate_synthetic_dataset(1, 8, 6, 2, 5, 60, 99, 1000);
    auto cfg = sum_cfg();
    i128 prev = 0;
    for (std::size_t q = 1; q <= 8; ++q) {
        i128 theta = calibrate_threshold(data.readings[0], cfg, AuthMode::knn_sum, 2, q);
        CHECK(theta >= prev);
        prev = theta;
    }
    // q = n: every reading authenticates on the calibration set
    i128 theta = calibrate_threshold(data.readings[0], cfg, AuthMode::knn_sum, 2, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        std::vector<TimeSeries> others;
        for (std::size_t o = 0; o < 8; ++o)
            if (o != i) others.push_back(data.readings[0][o]);
        CHECK(static_cast<i128>(auth_distance(others, data.readings[0][i], cfg,
                                              AuthMode::knn_sum, 2)) < theta);
    }
}

TEST_CASE("auth_distance combines the k nearest by sum or max") {
    std::vector<TimeSeries> base = {make_series({0}), make_series({5}), make_series({20})};
    TimeSeries probe = make_series({1});
    auto cfg = sum_cfg();
    // distances: 1, 4, 19
    CHECK(auth_distance(base, probe, cfg, AuthMode::knn_sum, 2) == 5);
    CHECK(auth_distance(base, probe, cfg, AuthMode::knn_max, 2) == 4);
    CHECK(auth_distance(base, probe, cfg, AuthMode::nearest, 1) == 1);
}

TEST_CASE("identical users yield FPR 1.0") {
    EvalDataset data;
    data.users = {"a", "b"};
    std::vector<TimeSeries> readings;
    for (int i = 0; i < 3; ++i) readings.push_back(make_series({10, 20, 30}));
    data.readings = {readings, readings};
    auto report = evaluate_metrics(data, sum_cfg(), AuthMode::nearest, 1, 3);
    CHECK(report.fpr() == 1.0);
    CHECK(report.recall() == 1.0);
}

TEST_CASE("well-separated users yield FPR 0 and high recall") {
    EvalDataset data = generate_synthetic_dataset(4, 6, 8, 2, 2, 400, 7, 1000);
    auto report = evaluate_metrics(data, sum_cfg(), AuthMode::knn_sum, 2, 5);
    CHECK(report.fpr() == 0.0);
    CHECK(report.recall() >= 5.0 / 6.0);
    CHECK(report.accuracy() > 0.9);
}

TEST_CASE("metric identities recompute from stored counts") {
    EvalDataset data = generate_synthetic_dataset(3, 5, 6, 1, 10, 100, 13, 1000);
    auto report = evaluate_metrics(data, sum_cfg(), AuthMode::nearest, 1, 4);
    std::uint64_t total = report.tp + report.fn + report.fp + report.tn;
    CHECK(report.genuine_attempts == report.tp + report.fn);
    CHECK(report.impostor_attempts == report.fp + report.tn);
    CHECK(report.accuracy() ==
          doctest::Approx(static_cast<double>(report.tp + report.tn) / total));
    if (report.fp + report.tp > 0)
        CHECK(report.precision() ==
              doctest::Approx(static_cast<double>(report.tp) / (report.tp + report.fp)));
    CHECK(report.recall() ==
          doctest::Approx(static_cast<double>(report.tp) / report.genuine_attempts));
    std::uint64_t per_user_tp = 0;
    for (const auto& u : report.per_user) per_user_tp += u.tp;
    CHECK(per_user_tp == report.tp);
}

TEST_CASE("synthetic dataset determinism and noise model") {
    auto a = generate_synthetic_dataset(3, 4, 5, 2, 3, 50, 42, 1000);
    auto b = generate_synthetic_dataset(3, 4, 5, 2, 3, 50, 42, 1000);
    REQUIRE(a.readings.size() == b.readings.size());
    for (std::size_t u = 0; u < a.readings.size(); ++u)
        for (std::size_t r = 0; r < a.readings[u].size(); ++r)
            CHECK(a.readings[u][r].points == b.readings[u][r].points);

    auto c = generate_synthetic_dataset(3, 4, 5, 2, 3, 50, 43, 1000);
    bool any_diff = false;
    for (std::size_t u = 0; u < a.readings.size() && !any_diff; ++u)
        for (std::size_t r = 0; r < a.readings[u].size() && !any_diff; ++r)
            any_diff = a.readings[u][r].points != c.readings[u][r].points;
    CHECK(any_diff);

    // intra_noise = 0: all readings of a user identical
    auto zero = generate_synthetic_dataset(2, 3, 4, 2, 0, 50, 1, 1000);
    for (const auto& user : zero.readings)
        for (const auto& reading : user) CHECK(reading.points == user[0].points);
}

TEST_CASE("reports are deterministic") {
    EvalDataset data = generate_synthetic_dataset(3, 4, 5, 1, 4, 80, 21, 1000);
    auto r1 = evaluate_metrics(data, sum_cfg(), AuthMode::knn_max, 2, 3);
    auto r2 = evaluate_metrics(data, sum_cfg(), AuthMode::knn_max, 2, 3);
    CHECK(report_to_json(r1) == report_to_json(r2));
}

TEST_CASE("fpr and recall are nondecreasing in q on a noisy dataset") {
    EvalDataset data = generate_synthetic_dataset(4, 6, 6, 1, 30, 60, 5, 1000);
    auto cfg = sum_cfg();
    double prev_fpr = -1.0, prev_recall = -1.0;
    for (std::size_t q = 1; q <= 6; ++q) {
        auto report = evaluate_metrics(data, cfg, AuthMode::nearest, 1, q);
        CHECK(report.fpr() >= prev_fpr);
        CHECK(report.recall() >= prev_recall);
        prev_fpr = report.fpr();
        prev_recall = report.recall();
    }
}

TEST_CASE("benchmark rows have sane shapes") {
    PrimeCache cache = PrimeCache::build(1'000'000);
    DistanceConfig cfg = sum_cfg();
    cfg.K = 1000;
    auto rows = run_benchmarks({8, 16}, 2, cfg, 8, cache);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.diag_seconds > 0);
        CHECK(r.dtw_seconds > 0);
        CHECK(r.sharp_gen_seconds > 0);
        CHECK(r.sharp_verify_seconds > 0);
    }
    auto csv = bench_to_csv(rows);
    CHECK(csv.find("T,diag_sum_s") == 0);
}

TEST_CASE("diagonal sum timing stays far from quadratic growth") {
    PrimeCache cache = PrimeCache::build(100);
    DistanceConfig cfg = sum_cfg();
    auto rows = run_benchmarks({64, 256}, 2, cfg, 8, cache);
    REQUIRE(rows.size() == 2);
    // a single pass scales ~4x here; quadratic growth would be ~16x
    CHECK(rows[1].diag_seconds / rows[0].diag_seconds < 12.0);
}
