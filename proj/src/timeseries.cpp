#include "zkseries/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>

namespace zkseries {

namespace {

constexpr Dist kInf = std::numeric_limits<Dist>::max() / 4;

void check_series(const TimeSeries& s, const char* who) {
    if (s.points.empty()) throw std::invalid_argument(std::string(who) + ": empty series");
    for (const auto& p : s.points) {
        if (p.size() != s.m) throw std::invalid_argument(std::string(who) + ": ragged series");
    }
}

bool in_band(std::size_t i, std::size_t j, std::optional<std::int64_t> band) {
    if (!band) return true;
    auto d = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j);
    return std::llabs(d) <= *band;
}

}  // namespace

std::string local_metric_name(LocalMetric m) {
    switch (m) {
        case LocalMetric::manhattan: return "manhattan";
        case LocalMetric::squared_euclidean: return "squared_euclidean";
        case LocalMetric::chebyshev: return "chebyshev";
    }
    return "?";
}

std::string series_metric_name(SeriesMetric s) {
    switch (s) {
        case SeriesMetric::diagonal_sum: return "diagonal_sum";
        case SeriesMetric::dtw: return "dtw";
        case SeriesMetric::frechet: return "frechet";
        case SeriesMetric::twed: return "twed";
    }
    return "?";
}

LocalMetric local_metric_from_name(const std::string& name) {
    if (name == "manhattan") return LocalMetric::manhattan;
    if (name == "squared_euclidean") return LocalMetric::squared_euclidean;
    if (name == "chebyshev") return LocalMetric::chebyshev;
    throw std::invalid_argument("unknown local metric: " + name);
}

SeriesMetric series_metric_from_name(const std::string& name) {
    if (name == "diagonal_sum") return SeriesMetric::diagonal_sum;
    if (name == "dtw") return SeriesMetric::dtw;
    if (name == "frechet") return SeriesMetric::frechet;
    if (name == "twed") return SeriesMetric::twed;
    throw std::invalid_argument("unknown series metric: " + name);
}

TimeSeries normalize_series(const std::vector<std::vector<double>>& raw,
                            const std::vector<std::pair<double, double>>& per_signal_min_max,
                            std::int64_t K) {
    if (K < 1) throw std::invalid_argument("normalize_series: K must be >= 1");
    if (raw.empty()) throw std::invalid_argument("normalize_series: empty series");
    const std::size_t m = per_signal_min_max.size();
    for (std::size_t j = 0; j < m; ++j) {
        if (!(per_signal_min_max[j].second > per_signal_min_max[j].first)) {
            throw std::invalid_argument("normalize_series: degenerate signal " + std::to_string(j) +
                                        " (max <= min)");
        }
    }
    TimeSeries out;
    out.m = m;
    out.points.reserve(raw.size());
    for (const auto& row : raw) {
        if (row.size() != m) throw std::invalid_argument("normalize_series: ragged input row");
        std::vector<Value> p(m);
        for (std::size_t j = 0; j < m; ++j) {
            const auto [mn, mx] = per_signal_min_max[j];
            double v = static_cast<double>(K) * (row[j] - mn) / (mx - mn);
            // round half up, then clamp to [0, K]
            double r = std::floor(v + 0.5);
            if (r < 0) r = 0;
            if (r > static_cast<double>(K)) r = static_cast<double>(K);
            p[j] = static_cast<Value>(r);
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

TimeSeries smooth_moving_average(const TimeSeries& x, std::size_t step, std::size_t window) {
    check_series(x, "smooth_moving_average");
    if (step < 1 || window < 1)
        throw std::invalid_argument("smooth_moving_average: step and window must be >= 1");
    const std::size_t T = x.length();
    const std::size_t out_len = (T + step - 1) / step;
    TimeSeries out;
    out.m = x.m;
    out.points.reserve(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const std::size_t first = i * step;                       // 0-based
        const std::size_t last = std::min(first + window, T);     // exclusive
        const std::size_t count = last - first;
        std::vector<Value> p(x.m);
        for (std::size_t j = 0; j < x.m; ++j) {
            Dist sum = 0;
            for (std::size_t t = first; t < last; ++t) sum += x.points[t][j];
            // round-half-up of sum/count on nonnegative integers
            p[j] = static_cast<Value>((2 * sum + static_cast<Dist>(count)) /
                                      (2 * static_cast<Dist>(count)));
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

Dist local_distance(std::span<const Value> a, std::span<const Value> b, LocalMetric metric) {
    if (a.size() != b.size())
        throw std::invalid_argument("local_distance: dimension mismatch");
    Dist acc = 0;
    switch (metric) {
        case LocalMetric::manhattan:
            for (std::size_t j = 0; j < a.size(); ++j)
                acc += a[j] >= b[j] ? Dist(a[j]) - b[j] : Dist(b[j]) - a[j];
            return acc;
        case LocalMetric::squared_euclidean:
            for (std::size_t j = 0; j < a.size(); ++j) {
                Dist d = Dist(a[j]) - Dist(b[j]);
                acc += d * d;
            }
            return acc;
        case LocalMetric::chebyshev:
            for (std::size_t j = 0; j < a.size(); ++j) {
                Dist d = a[j] >= b[j] ? Dist(a[j]) - b[j] : Dist(b[j]) - a[j];
                acc = std::max(acc, d);
            }
            return acc;
    }
    throw std::logic_error("unreachable");
}

namespace {

Dist cross(const TimeSeries& x, const TimeSeries& y, std::size_t i, std::size_t j,
           LocalMetric metric) {
    return local_distance(x.points[i], y.points[j], metric);
}

// TWED cost of the step into 1-based pair (i,j) coming from `from`.
// First pair (1,1) costs d(x_1, y_1); time shifts pay lambda plus the
// within-series distance; diagonal steps pay the two cross distances.
Dist twed_edge_cost(const TimeSeries& x, const TimeSeries& y, std::size_t i, std::size_t j,
                    std::optional<std::pair<std::size_t, std::size_t>> from,
                    const DistanceConfig& cfg) {
    if (!from) return cross(x, y, i - 1, j - 1, cfg.local);
    const auto [pi, pj] = *from;
    if (pi + 1 == i && pj + 1 == j) {
        return cross(x, y, i - 1, j - 1, cfg.local) + cross(x, y, i - 2, j - 2, cfg.local);
    }
    if (pi + 1 == i && pj == j) {
        return cfg.lambda + local_distance(x.points[i - 1], x.points[i - 2], cfg.local);
    }
    if (pi == i && pj + 1 == j) {
        return cfg.lambda + local_distance(y.points[j - 1], y.points[j - 2], cfg.local);
    }
    throw std::logic_error("twed_edge_cost: invalid step");
}

}  // namespace

SeriesDistance diagonal_sum_distance(const TimeSeries& x, const TimeSeries& y,
                                     const DistanceConfig& cfg) {
    check_series(x, "diagonal_sum_distance");
    check_series(y, "diagonal_sum_distance");
    const std::size_t t = std::min(x.length(), y.length());
    SeriesDistance out;
    out.witness.pairs.reserve(t);
    out.witness.edge_values.reserve(t);
    for (std::size_t i = 0; i < t; ++i) {
        Dist d = cross(x, y, i, i, cfg.local);
        out.distance += d;
        out.witness.pairs.emplace_back(i + 1, i + 1);
        out.witness.edge_values.push_back(d);
    }
    return out;
}

SeriesDistance dtw_distance(const TimeSeries& x, const TimeSeries& y, const DistanceConfig& cfg) {
    check_series(x, "dtw_distance");
    check_series(y, "dtw_distance");
    const std::size_t tx = x.length(), ty = y.length();
    if (cfg.band) {
        auto gap = static_cast<std::int64_t>(tx) - static_cast<std::int64_t>(ty);
        if (std::llabs(gap) > *cfg.band)
            throw std::invalid_argument("dtw_distance: band too narrow to connect endpoints");
    }
    std::vector<Dist> dp_buf(tx * ty, kInf);
    auto dp = [&](std::size_t i, std::size_t j) -> Dist& { return dp_buf[i * ty + j]; };
    for (std::size_t i = 0; i < tx; ++i) {
        for (std::size_t j = 0; j < ty; ++j) {
            if (!in_band(i, j, cfg.band)) continue;
            Dist d = cross(x, y, i, j, cfg.local);
            if (i == 0 && j == 0) {
                dp(i, j) = d;
                continue;
            }
            Dist best = kInf;
            if (i > 0 && j > 0) best = std::min(best, dp(i - 1, j - 1));
            if (i > 0) best = std::min(best, dp(i - 1, j));
            if (j > 0) best = std::min(best, dp(i, j - 1));
            if (best < kInf) dp(i, j) = best + d;
        }
    }
    SeriesDistance out;
    out.distance = dp(tx - 1, ty - 1);

    // backtrack; ties prefer diagonal, then vertical (i-1,j), then horizontal
    std::vector<std::pair<std::size_t, std::size_t>> rev;
    std::size_t i = tx - 1, j = ty - 1;
    while (true) {
        rev.emplace_back(i + 1, j + 1);
        if (i == 0 && j == 0) break;
        Dist need = dp(i, j) - cross(x, y, i, j, cfg.local);
        if (i > 0 && j > 0 && dp(i - 1, j - 1) == need) {
            --i, --j;
        } else if (i > 0 && dp(i - 1, j) == need) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(rev.begin(), rev.end());
    out.witness.pairs = std::move(rev);
    out.witness.edge_values.reserve(out.witness.pairs.size());
    for (auto [pi, pj] : out.witness.pairs)
        out.witness.edge_values.push_back(cross(x, y, pi - 1, pj - 1, cfg.local));
    return out;
}

SeriesDistance frechet_distance(const TimeSeries& x, const TimeSeries& y,
                                const DistanceConfig& cfg) {
    check_series(x, "frechet_distance");
    check_series(y, "frechet_distance");
    const std::size_t tx = x.length(), ty = y.length();
    std::vector<std::vector<Dist>> dp(tx, std::vector<Dist>(ty, kInf));
    for (std::size_t i = 0; i < tx; ++i) {
        for (std::size_t j = 0; j < ty; ++j) {
            Dist d = cross(x, y, i, j, cfg.local);
            if (i == 0 && j == 0) {
                dp[i][j] = d;
                continue;
            }
            Dist best = kInf;
            if (i > 0 && j > 0) best = std::min(best, dp[i - 1][j - 1]);
            if (i > 0) best = std::min(best, dp[i - 1][j]);
            if (j > 0) best = std::min(best, dp[i][j - 1]);
            dp[i][j] = std::max(d, best);
        }
    }
    SeriesDistance out;
    out.distance = dp[tx - 1][ty - 1];

    std::vector<std::pair<std::size_t, std::size_t>> rev;
    std::size_t i = tx - 1, j = ty - 1;
    while (true) {
        rev.emplace_back(i + 1, j + 1);
        if (i == 0 && j == 0) break;
        Dist best = kInf;
        if (i > 0 && j > 0) best = std::min(best, dp[i - 1][j - 1]);
        if (i > 0) best = std::min(best, dp[i - 1][j]);
        if (j > 0) best = std::min(best, dp[i][j - 1]);
        if (i > 0 && j > 0 && dp[i - 1][j - 1] == best) {
            --i, --j;
        } else if (i > 0 && dp[i - 1][j] == best) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(rev.begin(), rev.end());
    out.witness.pairs = std::move(rev);
    out.witness.edge_values.reserve(out.witness.pairs.size());
    for (auto [pi, pj] : out.witness.pairs)
        out.witness.edge_values.push_back(cross(x, y, pi - 1, pj - 1, cfg.local));
    return out;
}

SeriesDistance twed_distance(const TimeSeries& x, const TimeSeries& y, const DistanceConfig& cfg) {
    check_series(x, "twed_distance");
    check_series(y, "twed_distance");
    if (cfg.lambda < 0) throw std::invalid_argument("twed_distance: lambda must be >= 0");
    const std::size_t tx = x.length(), ty = y.length();
    std::vector<std::vector<Dist>> dp(tx, std::vector<Dist>(ty, kInf));
    for (std::size_t i = 0; i < tx; ++i) {
        for (std::size_t j = 0; j < ty; ++j) {
            if (i == 0 && j == 0) {
                dp[i][j] = twed_edge_cost(x, y, 1, 1, std::nullopt, cfg);
                continue;
            }
            Dist best = kInf;
            if (i > 0 && j > 0) {
                best = std::min(best, dp[i - 1][j - 1] +
                                          twed_edge_cost(x, y, i + 1, j + 1, {{i, j}}, cfg));
            }
            if (i > 0) {
                best = std::min(best,
                                dp[i - 1][j] + twed_edge_cost(x, y, i + 1, j + 1, {{i, j + 1}}, cfg));
            }
            if (j > 0) {
                best = std::min(best,
                                dp[i][j - 1] + twed_edge_cost(x, y, i + 1, j + 1, {{i + 1, j}}, cfg));
            }
            dp[i][j] = best;
        }
    }
    SeriesDistance out;
    out.distance = dp[tx - 1][ty - 1];

    std::vector<std::pair<std::size_t, std::size_t>> rev;
    std::size_t i = tx - 1, j = ty - 1;
    while (!(i == 0 && j == 0)) {
        rev.emplace_back(i + 1, j + 1);
        if (i > 0 && j > 0 &&
            dp[i][j] == dp[i - 1][j - 1] + twed_edge_cost(x, y, i + 1, j + 1, {{i, j}}, cfg)) {
            --i, --j;
        } else if (i > 0 &&
                   dp[i][j] == dp[i - 1][j] + twed_edge_cost(x, y, i + 1, j + 1, {{i, j + 1}}, cfg)) {
            --i;
        } else {
            --j;
        }
    }
    rev.emplace_back(1, 1);
    std::reverse(rev.begin(), rev.end());
    out.witness.pairs = std::move(rev);
    out.witness.edge_values.reserve(out.witness.pairs.size());
    for (std::size_t l = 0; l < out.witness.pairs.size(); ++l) {
        auto [pi, pj] = out.witness.pairs[l];
        if (l == 0) {
            out.witness.edge_values.push_back(twed_edge_cost(x, y, pi, pj, std::nullopt, cfg));
        } else {
            out.witness.edge_values.push_back(
                twed_edge_cost(x, y, pi, pj, {out.witness.pairs[l - 1]}, cfg));
        }
    }
    return out;
}

SeriesDistance series_distance(const TimeSeries& x, const TimeSeries& y,
                               const DistanceConfig& cfg) {
    switch (cfg.series) {
        case SeriesMetric::diagonal_sum: return diagonal_sum_distance(x, y, cfg);
        case SeriesMetric::dtw: return dtw_distance(x, y, cfg);
        case SeriesMetric::frechet: return frechet_distance(x, y, cfg);
        case SeriesMetric::twed: return twed_distance(x, y, cfg);
    }
    throw std::logic_error("unreachable");
}

bool validate_coupling(const CouplingWitness& w, std::size_t tx, std::size_t ty,
                       SeriesMetric kind, std::optional<std::int64_t> band) {
    const auto& p = w.pairs;
    if (p.empty()) return false;
    if (kind == SeriesMetric::diagonal_sum) {
        const std::size_t t = std::min(tx, ty);
        if (p.size() != t) return false;
        for (std::size_t l = 0; l < t; ++l)
            if (p[l].first != l + 1 || p[l].second != l + 1) return false;
        return true;
    }
    if (p.front() != std::make_pair<std::size_t, std::size_t>(1, 1)) return false;
    if (p.back().first != tx || p.back().second != ty) return false;
    for (std::size_t l = 0; l < p.size(); ++l) {
        if (p[l].first < 1 || p[l].first > tx || p[l].second < 1 || p[l].second > ty) return false;
        if (l > 0) {
            std::size_t di = p[l].first - p[l - 1].first;
            std::size_t dj = p[l].second - p[l - 1].second;
            if (p[l].first < p[l - 1].first || p[l].second < p[l - 1].second) return false;
            bool ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
            if (!ok) return false;
        }
        if (kind == SeriesMetric::dtw && band) {
            auto d = static_cast<std::int64_t>(p[l].first) - static_cast<std::int64_t>(p[l].second);
            if (std::llabs(d) > *band) return false;
        }
    }
    return true;
}

Dist brute_force_series_distance(const TimeSeries& x, const TimeSeries& y,
                                 const DistanceConfig& cfg) {
    check_series(x, "brute_force_series_distance");
    check_series(y, "brute_force_series_distance");
    const std::size_t tx = x.length(), ty = y.length();
    if (tx * ty > 64)
        throw std::invalid_argument("brute_force_series_distance: instance too large");

    if (cfg.series == SeriesMetric::diagonal_sum) {
        Dist acc = 0;
        for (std::size_t i = 0; i < std::min(tx, ty); ++i) acc += cross(x, y, i, i, cfg.local);
        return acc;
    }

    Dist best = kInf;
    std::vector<std::pair<std::size_t, std::size_t>> path;
    std::function<void(std::size_t, std::size_t, Dist)> walk = [&](std::size_t i, std::size_t j,
                                                                   Dist acc) {
        if (cfg.series == SeriesMetric::dtw && cfg.band) {
            auto d = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j);
            if (std::llabs(d) > *cfg.band) return;
        }
        Dist edge;
        if (cfg.series == SeriesMetric::twed) {
            std::optional<std::pair<std::size_t, std::size_t>> from;
            if (!path.empty()) from = path.back();
            edge = twed_edge_cost(x, y, i, j, from, cfg);
        } else {
            edge = cross(x, y, i - 1, j - 1, cfg.local);
        }
        Dist next = cfg.series == SeriesMetric::frechet ? std::max(acc, edge) : acc + edge;
        if (i == tx && j == ty) {
            best = std::min(best, next);
            return;
        }
        path.emplace_back(i, j);
        if (i < tx) walk(i + 1, j, next);
        if (j < ty) walk(i, j + 1, next);
        if (i < tx && j < ty) walk(i + 1, j + 1, next);
        path.pop_back();
    };
    walk(1, 1, 0);
    return best;
}

}  // namespace zkseries
