#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace zkseries {

using u128 = unsigned __int128;

u128 isqrt_u128(u128 n);
bool is_perfect_square(u128 n);

// Primes p <= limit with p = 1 (mod 4), each stored with its two-square
// decomposition p = a^2 + b^2 (a <= b), plus the special entry 2 = 1^2 + 1^2.
// Sorted ascending by p.
struct PrimeCache {
    struct Entry {
        std::int64_t p, a, b;
    };

    std::int64_t limit = 0;
    std::vector<Entry> entries;

    static PrimeCache build(std::int64_t limit);

    // CSV rows "p,a,b" ascending, header row naming the limit.
    void save_csv(const std::string& path) const;
    static PrimeCache load_csv(const std::string& path);

    bool lookup(std::int64_t p, std::int64_t& a, std::int64_t& b) const;
};

// Writes y with y[0]^2 + y[1]^2 + y[2]^2 = n for n = 1 (mod 4). Sweeps s from
// floor(sqrt(n)) down: accepts square remainders directly and combines prime
// remainders p = 1 (mod 4) with their two-square decomposition (cached below
// the limit, computed on the fly above it). Deterministic for a given n and
// cache. Throws if n is not 1 mod 4 or the sweep is exhausted.
std::array<u128, 3> decompose_three_squares(u128 n, const PrimeCache& cache);

}  // namespace zkseries
