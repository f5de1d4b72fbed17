#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "zkseries/timeseries.hpp"

using namespace zkseries;

namespace {

TimeSeries make_series(const std::vector<std::vector<Value>>& rows) {
    TimeSeries ts;
    ts.m = rows.empty() ? 0 : rows[0].size();
    ts.points = rows;
    return ts;
}

TimeSeries random_series(std::mt19937_64& rng, std::size_t max_len, std::size_t max_m,
                         Value max_value, std::size_t m_fixed = 0) {
    std::size_t t = 1 + rng() % max_len;
    std::size_t m = m_fixed ? m_fixed : 1 + rng() % max_m;
    TimeSeries ts;
    ts.m = m;
    ts.points.resize(t, std::vector<Value>(m));
    for (auto& row : ts.points)
        for (auto& v : row) v = static_cast<Value>(rng() % (max_value + 1));
    return ts;
}

DistanceConfig cfg_for(SeriesMetric s, LocalMetric l = LocalMetric::manhattan) {
    DistanceConfig cfg;
    cfg.local = l;
    cfg.series = s;
    cfg.lambda = 3;
    return cfg;
}

Dist witness_cost(const CouplingWitness& w, SeriesMetric kind) {
    Dist acc = 0;
    for (Dist e : w.edge_values) acc = kind == SeriesMetric::frechet ? std::max(acc, e) : acc + e;
    return acc;
}

}  // namespace

TEST_CASE("normalize_series maps boundaries and midpoints") {
    std::vector<std::vector<double>> raw = {{0.0}, {1.0}, {0.5}};
    auto ts = normalize_series(raw, {{0.0, 1.0}}, 1'000'000);
    CHECK(ts.points[0][0] == 0);
    CHECK(ts.points[1][0] == 1'000'000);
    CHECK(ts.points[2][0] == 500'000);
}

TEST_CASE("normalize_series rejects degenerate signals, names the index") {
    std::vector<std::vector<double>> raw = {{1.0, 2.0}};
    CHECK_THROWS_WITH_AS(normalize_series(raw, {{0.0, 1.0}, {3.0, 3.0}}, 10),
                         doctest::Contains("signal 1"), std::invalid_argument);
}

TEST_CASE("normalize_series rounds half up and clamps out-of-range values") {
    std::vector<std::vector<double>> raw = {{0.25}, {0.35}, {-1.0}, {2.0}};
    auto ts = normalize_series(raw, {{0.0, 1.0}}, 10);
    CHECK(ts.points[0][0] == 3);   // 2.5 -> 3
    CHECK(ts.points[1][0] == 4);   // 3.5 -> 4
    CHECK(ts.points[2][0] == 0);   // clamped
    CHECK(ts.points[3][0] == 10);  // clamped
}

TEST_CASE("smooth_moving_average hand example and identity") {
    auto x = make_series({{2}, {4}, {6}, {8}});
    auto s = smooth_moving_average(x, 2, 2);
    REQUIRE(s.length() == 2);
    CHECK(s.points[0][0] == 3);
    CHECK(s.points[1][0] == 7);

    auto id = smooth_moving_average(x, 1, 1);
    CHECK(id.points == x.points);
}

TEST_CASE("smooth_moving_average output length is ceil(T/step)") {
    TimeSeries x;
    x.m = 1;
    x.points.assign(248, {1});
    CHECK(smooth_moving_average(x, 4, 8).length() == 62);

    TimeSeries empty;
    empty.m = 1;
    CHECK_THROWS_AS(smooth_moving_average(empty, 1, 1), std::invalid_argument);
}

TEST_CASE("smooth_moving_average rounds window means half up") {
    auto x = make_series({{1}, {2}});
    auto s = smooth_moving_average(x, 2, 2);  // mean 1.5 -> 2
    CHECK(s.points[0][0] == 2);
}

TEST_CASE("local_distance per-metric examples") {
    std::vector<Value> a = {1, 2}, b = {3, 5};
    CHECK(local_distance(a, b, LocalMetric::manhattan) == 5);
    CHECK(local_distance(a, b, LocalMetric::squared_euclidean) == 13);
    CHECK(local_distance(a, b, LocalMetric::chebyshev) == 3);
    CHECK(local_distance(a, a, LocalMetric::manhattan) == 0);
    CHECK(local_distance(a, a, LocalMetric::squared_euclidean) == 0);
    CHECK(local_distance(a, a, LocalMetric::chebyshev) == 0);

    std::vector<Value> c = {1, 2, 3};
    CHECK_THROWS_AS(local_distance(a, c, LocalMetric::manhattan), std::invalid_argument);
}

TEST_CASE("one-dimensional manhattan and chebyshev coincide") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::vector<Value> a = {static_cast<Value>(rng() % 100)};
        std::vector<Value> b = {static_cast<Value>(rng() % 100)};
        CHECK(local_distance(a, b, LocalMetric::manhattan) ==
              local_distance(a, b, LocalMetric::chebyshev));
    }
}

TEST_CASE("diagonal sum examples") {
    auto cfg = cfg_for(SeriesMetric::diagonal_sum);
    auto x = make_series({{0}, {0}});
    auto y = make_series({{1}, {2}});
    auto sd = diagonal_sum_distance(x, y, cfg);
    CHECK(sd.distance == 3);
    CHECK(sd.witness.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 2}});

    CHECK(diagonal_sum_distance(x, x, cfg).distance == 0);
}

TEST_CASE("diagonal sum truncates to the shorter series") {
    auto cfg = cfg_for(SeriesMetric::diagonal_sum);
    auto x = make_series({{1}, {2}, {9}});
    auto y = make_series({{1}, {2}});
    auto sd = diagonal_sum_distance(x, y, cfg);
    CHECK(sd.distance == 0);
    CHECK(sd.witness.pairs.size() == 2);
}

TEST_CASE("constructed pair with diagonal sum 10 has dtw 2") {
    auto cfg = cfg_for(SeriesMetric::dtw);
    auto x = make_series({{5}, {9}, {6}, {5}, {6}});
    auto y = make_series({{6}, {5}, {9}, {6}, {5}});
    CHECK(diagonal_sum_distance(x, y, cfg).distance == 10);
    auto sd = dtw_distance(x, y, cfg);
    CHECK(sd.distance == 2);
    CHECK(brute_force_series_distance(x, y, cfg) == 2);
}

TEST_CASE("dtw derived example and self distance") {
    auto cfg = cfg_for(SeriesMetric::dtw);
    auto x = make_series({{1}, {2}, {3}});
    auto y = make_series({{1}, {2}, {2}, {3}});
    CHECK(dtw_distance(x, y, cfg).distance == 0);

    auto self = dtw_distance(x, x, cfg);
    CHECK(self.distance == 0);
    for (auto [i, j] : self.witness.pairs) CHECK(i == j);
}

TEST_CASE("dtw band restricts couplings and rejects impossible endpoints") {
    auto cfg = cfg_for(SeriesMetric::dtw);
    cfg.band = 0;
    auto x = make_series({{0}, {10}});
    auto y = make_series({{10}, {0}});
    // band 0 forces the diagonal
    CHECK(dtw_distance(x, y, cfg).distance == 20);
    CHECK(brute_force_series_distance(x, y, cfg) == 20);

    auto z = make_series({{0}, {0}, {0}});
    CHECK_THROWS_AS(dtw_distance(z, y, cfg), std::invalid_argument);
}

TEST_CASE("frechet examples") {
    auto cfg = cfg_for(SeriesMetric::frechet);
    auto x = make_series({{1}, {5}});
    auto y = make_series({{2}, {4}});
    auto sd = frechet_distance(x, y, cfg);
    CHECK(sd.distance == 1);
    CHECK(sd.witness.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {2, 2}});
    CHECK(frechet_distance(x, x, cfg).distance == 0);
}

TEST_CASE("twed examples") {
    auto cfg = cfg_for(SeriesMetric::twed);
    auto x = make_series({{0}});
    auto y = make_series({{5}});
    auto sd = twed_distance(x, y, cfg);
    CHECK(sd.distance == 5);
    CHECK(sd.witness.pairs.size() == 1);

    auto z = make_series({{1}, {7}, {3}});
    CHECK(twed_distance(z, z, cfg).distance == 0);

    DistanceConfig defaults;
    CHECK(defaults.lambda == 1'000'000);
}

TEST_CASE("validate_coupling endpoint and step rules") {
    CouplingWitness w;
    w.pairs = {{1, 1}};
    CHECK(validate_coupling(w, 1, 1, SeriesMetric::dtw, std::nullopt));

    w.pairs = {{1, 1}, {3, 2}};
    CHECK_FALSE(validate_coupling(w, 3, 2, SeriesMetric::dtw, std::nullopt));

    w.pairs = {{1, 1}, {2, 2}, {3, 3}};
    CHECK(validate_coupling(w, 3, 3, SeriesMetric::diagonal_sum, std::nullopt));
    CHECK(validate_coupling(w, 3, 3, SeriesMetric::dtw, std::nullopt));
    // diagonal-sum couplings truncate to the common length
    CHECK(validate_coupling(w, 5, 3, SeriesMetric::diagonal_sum, std::nullopt));
    CHECK_FALSE(validate_coupling(w, 5, 3, SeriesMetric::dtw, std::nullopt));

    w.pairs = {{1, 1}, {1, 2}, {2, 2}};
    CHECK(validate_coupling(w, 2, 2, SeriesMetric::dtw, std::nullopt));
    CHECK(validate_coupling(w, 2, 2, SeriesMetric::twed, std::nullopt));
    CHECK_FALSE(validate_coupling(w, 2, 2, SeriesMetric::dtw, 0));

    w.pairs = {{1, 1}, {2, 2}, {2, 2}};
    CHECK_FALSE(validate_coupling(w, 2, 2, SeriesMetric::dtw, std::nullopt));

    w.pairs.clear();
    CHECK_FALSE(validate_coupling(w, 1, 1, SeriesMetric::dtw, std::nullopt));
}

TEST_CASE("brute force oracle rejects oversized instances") {
    auto cfg = cfg_for(SeriesMetric::dtw);
    TimeSeries x, y;
    x.m = y.m = 1;
    x.points.assign(9, {0});
    y.points.assign(9, {0});
    CHECK_THROWS_AS(brute_force_series_distance(x, y, cfg), std::invalid_argument);
}

TEST_CASE("dtw, frechet and twed match the enumeration oracle on random instances") {
    std::mt19937_64 rng(2024);
    const LocalMetric locals[] = {LocalMetric::manhattan, LocalMetric::squared_euclidean,
                                  LocalMetric::chebyshev};
    for (int iter = 0; iter < 1000; ++iter) {
        auto x = random_series(rng, 6, 2, 20);
        auto y = random_series(rng, 6, 2, 20, x.m);
        DistanceConfig cfg;
        cfg.local = locals[iter % 3];
        cfg.lambda = static_cast<std::int64_t>(rng() % 8);

        cfg.series = SeriesMetric::dtw;
        REQUIRE(dtw_distance(x, y, cfg).distance == brute_force_series_distance(x, y, cfg));
        cfg.series = SeriesMetric::frechet;
        REQUIRE(frechet_distance(x, y, cfg).distance == brute_force_series_distance(x, y, cfg));
        cfg.series = SeriesMetric::twed;
        REQUIRE(twed_distance(x, y, cfg).distance == brute_force_series_distance(x, y, cfg));
    }
}

TEST_CASE("series distances are symmetric for dtw and frechet") {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 300; ++iter) {
        auto x = random_series(rng, 6, 2, 20);
        auto y = random_series(rng, 6, 2, 20, x.m);
        auto cfg = cfg_for(SeriesMetric::dtw);
        CHECK(dtw_distance(x, y, cfg).distance == dtw_distance(y, x, cfg).distance);
        cfg.series = SeriesMetric::frechet;
        CHECK(frechet_distance(x, y, cfg).distance == frechet_distance(y, x, cfg).distance);
    }
}

TEST_CASE("dtw is bounded by the diagonal sum on equal-length pairs") {
    std::mt19937_64 rng(6);
    for (int iter = 0; iter < 500; ++iter) {
        std::size_t t = 1 + rng() % 6;
        TimeSeries x, y;
        x.m = y.m = 2;
        x.points.resize(t, std::vector<Value>(2));
        y.points.resize(t, std::vector<Value>(2));
        for (auto& p : x.points)
            for (auto& v : p) v = static_cast<Value>(rng() % 30);
        for (auto& p : y.points)
            for (auto& v : p) v = static_cast<Value>(rng() % 30);
        auto cfg = cfg_for(SeriesMetric::dtw);
        CHECK(dtw_distance(x, y, cfg).distance <= diagonal_sum_distance(x, y, cfg).distance);
    }
}

TEST_CASE("frechet is bounded by dtw") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 500; ++iter) {
        auto x = random_series(rng, 6, 2, 25);
        auto y = random_series(rng, 6, 2, 25, x.m);
        auto cfg = cfg_for(SeriesMetric::dtw);
        Dist dtw = dtw_distance(x, y, cfg).distance;
        cfg.series = SeriesMetric::frechet;
        CHECK(frechet_distance(x, y, cfg).distance <= dtw);
    }
}

TEST_CASE("returned witnesses validate and their cost equals the distance") {
    std::mt19937_64 rng(8);
    for (int iter = 0; iter < 400; ++iter) {
        auto x = random_series(rng, 6, 2, 20);
        auto y = random_series(rng, 6, 2, 20, x.m);
        for (SeriesMetric kind : {SeriesMetric::diagonal_sum, SeriesMetric::dtw,
                                  SeriesMetric::frechet, SeriesMetric::twed}) {
            auto cfg = cfg_for(kind);
            auto sd = series_distance(x, y, cfg);
            CHECK(validate_coupling(sd.witness, x.length(), y.length(), kind, cfg.band));
            CHECK(witness_cost(sd.witness, kind) == sd.distance);
            CHECK(sd.witness.edge_values.size() == sd.witness.pairs.size());
        }
    }
}

TEST_CASE("twed satisfies the triangle inequality on random small triples") {
    std::mt19937_64 rng(9);
    int violations = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        std::size_t m = 1 + rng() % 2;
        auto x = random_series(rng, 5, 2, 15, m);
        auto y = random_series(rng, 5, 2, 15, m);
        auto z = random_series(rng, 5, 2, 15, m);
        auto cfg = cfg_for(SeriesMetric::twed);
        cfg.lambda = 1 + static_cast<std::int64_t>(rng() % 5);
        Dist xy = twed_distance(x, y, cfg).distance;
        Dist yz = twed_distance(y, z, cfg).distance;
        Dist xz = twed_distance(x, z, cfg).distance;
        if (xy + yz < xz) ++violations;
    }
    CHECK(violations == 0);
}
