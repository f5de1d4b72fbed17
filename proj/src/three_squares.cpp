#include "zkseries/three_squares.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zkseries {

namespace {

using u64 = std::uint64_t;

u64 mulmod64(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

u64 powmod64(u64 a, u64 e, u64 m) {
    u64 r = 1;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod64(r, a, m);
        a = mulmod64(a, a, m);
        e >>= 1;
    }
    return r;
}

// deterministic Miller-Rabin for n < 3.3e24 with this base set
bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod64(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

// two-square decomposition of a prime p = 1 (mod 4): find t with t^2 = -1
// (mod p), then run the Euclid descent until the remainder drops below
// sqrt(p).
std::pair<u64, u64> two_squares_prime_u64(u64 p) {
    if (p == 2) return {1, 1};
    u64 t = 0;
    for (u64 a = 2;; ++a) {
        u64 cand = powmod64(a, (p - 1) / 4, p);
        if (mulmod64(cand, cand, p) == p - 1) {
            t = cand;
            break;
        }
        if (a > 1000) throw std::runtime_error("two_squares_prime_u64: no sqrt(-1) found");
    }
    u64 a0 = p, a1 = t;
    while (u128(a1) * a1 > p) {
        u64 r = a0 % a1;
        a0 = a1;
        a1 = r;
    }
    u64 b2 = p - static_cast<u64>(u128(a1) * a1);
    u64 b = static_cast<u64>(isqrt_u128(b2));
    if (u128(b) * b != b2) throw std::runtime_error("two_squares_prime_u64: descent failed");
    return {std::min(a1, b), std::max(a1, b)};
}

void u128_to_mpz(mpz_t out, u128 v) {
    mpz_set_ui(out, static_cast<u64>(v >> 64));
    mpz_mul_2exp(out, out, 64);
    mpz_add_ui(out, out, static_cast<u64>(v));
}

u128 mpz_to_u128(const mpz_t v) {
    mpz_t hi, lo;
    mpz_init(hi);
    mpz_init(lo);
    mpz_fdiv_q_2exp(hi, v, 64);
    mpz_fdiv_r_2exp(lo, v, 64);
    u128 out = (u128(mpz_get_ui(hi)) << 64) | mpz_get_ui(lo);
    mpz_clear(hi);
    mpz_clear(lo);
    return out;
}

bool is_probable_prime_u128(u128 n) {
    if (n <= UINT64_MAX) return is_prime_u64(static_cast<u64>(n));
    mpz_t z;
    mpz_init(z);
    u128_to_mpz(z, n);
    int r = mpz_probab_prime_p(z, 40);
    mpz_clear(z);
    return r > 0;
}

std::pair<u128, u128> two_squares_prime_u128(u128 p) {
    if (p <= UINT64_MAX) {
        auto [a, b] = two_squares_prime_u64(static_cast<u64>(p));
        return {a, b};
    }
    mpz_t zp, e, t, chk, a0, a1, r, b2, b, sq;
    mpz_inits(zp, e, t, chk, a0, a1, r, b2, b, sq, nullptr);
    u128_to_mpz(zp, p);
    mpz_sub_ui(e, zp, 1);
    mpz_fdiv_q_2exp(e, e, 2);  // (p-1)/4
    bool found = false;
    for (unsigned long a = 2; a < 2000 && !found; ++a) {
        mpz_set_ui(t, a);
        mpz_powm(t, t, e, zp);
        mpz_mul(chk, t, t);
        mpz_mod(chk, chk, zp);
        mpz_add_ui(chk, chk, 1);
        if (mpz_cmp(chk, zp) == 0) found = true;
    }
    if (!found) {
        mpz_clears(zp, e, t, chk, a0, a1, r, b2, b, sq, nullptr);
        throw std::runtime_error("two_squares_prime_u128: no sqrt(-1) found");
    }
    mpz_set(a0, zp);
    mpz_set(a1, t);
    while (true) {
        mpz_mul(sq, a1, a1);
        if (mpz_cmp(sq, zp) <= 0) break;
        mpz_mod(r, a0, a1);
        mpz_set(a0, a1);
        mpz_set(a1, r);
    }
    mpz_mul(sq, a1, a1);
    mpz_sub(b2, zp, sq);
    mpz_sqrt(b, b2);
    mpz_mul(sq, b, b);
    if (mpz_cmp(sq, b2) != 0) {
        mpz_clears(zp, e, t, chk, a0, a1, r, b2, b, sq, nullptr);
        throw std::runtime_error("two_squares_prime_u128: descent failed");
    }
    u128 ra = mpz_to_u128(a1), rb = mpz_to_u128(b);
    mpz_clears(zp, e, t, chk, a0, a1, r, b2, b, sq, nullptr);
    return {std::min(ra, rb), std::max(ra, rb)};
}

}  // namespace

u128 isqrt_u128(u128 n) {
    if (n == 0) return 0;
    u128 x = static_cast<u128>(std::sqrt(static_cast<long double>(n)));
    while (x > 0 && x * x > n) --x;
    while ((x + 1) * (x + 1) <= n) ++x;
    return x;
}

bool is_perfect_square(u128 n) {
    u128 r = isqrt_u128(n);
    return r * r == n;
}

PrimeCache PrimeCache::build(std::int64_t limit) {
    if (limit < 5) throw std::invalid_argument("PrimeCache::build: limit must be >= 5");
    PrimeCache cache;
    cache.limit = limit;
    cache.entries.push_back({2, 1, 1});
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    for (std::int64_t i = 2; i * i <= limit; ++i) {
        if (composite[i]) continue;
        for (std::int64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    for (std::int64_t p = 5; p <= limit; p += 4) {
        if (composite[p]) continue;
        auto [a, b] = two_squares_prime_u64(static_cast<u64>(p));
        cache.entries.push_back({p, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)});
    }
    return cache;
}

void PrimeCache::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("PrimeCache::save_csv: cannot open " + path);
    out << "p,a,b,L=" << limit << "\n";
    for (const auto& e : entries) out << e.p << ',' << e.a << ',' << e.b << "\n";
}

PrimeCache PrimeCache::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("PrimeCache::load_csv: cannot open " + path);
    std::string header;
    std::getline(in, header);
    auto pos = header.rfind("L=");
    if (pos == std::string::npos)
        throw std::runtime_error("PrimeCache::load_csv: missing limit in header");
    PrimeCache cache;
    cache.limit = std::stoll(header.substr(pos + 2));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Entry e{};
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        row >> e.p >> c1 >> e.a >> c2 >> e.b;
        if (!row || c1 != ',' || c2 != ',')
            throw std::runtime_error("PrimeCache::load_csv: bad row: " + line);
        cache.entries.push_back(e);
    }
    if (!std::is_sorted(cache.entries.begin(), cache.entries.end(),
                        [](const Entry& x, const Entry& y) { return x.p < y.p; }))
        throw std::runtime_error("PrimeCache::load_csv: rows not ascending");
    return cache;
}

bool PrimeCache::lookup(std::int64_t p, std::int64_t& a, std::int64_t& b) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), p,
                               [](const Entry& e, std::int64_t v) { return e.p < v; });
    if (it == entries.end() || it->p != p) return false;
    a = it->a;
    b = it->b;
    return true;
}

std::array<u128, 3> decompose_three_squares(u128 n, const PrimeCache& cache) {
    if (n == 0 || n % 4 != 1)
        throw std::invalid_argument("decompose_three_squares: n must be positive and 1 mod 4");
    for (u128 s = isqrt_u128(n);; --s) {
        u128 rem = n - s * s;
        if (is_perfect_square(rem)) return {s, isqrt_u128(rem), 0};
        if (rem == 2) return {s, 1, 1};
        if (rem % 4 == 1) {
            if (rem <= static_cast<u128>(cache.limit)) {
                std::int64_t a = 0, b = 0;
                if (cache.lookup(static_cast<std::int64_t>(rem), a, b))
                    return {s, static_cast<u128>(a), static_cast<u128>(b)};
            } else if (is_probable_prime_u128(rem)) {
                auto [a, b] = two_squares_prime_u128(rem);
                return {s, a, b};
            }
        }
        if (s == 0) break;
    }
    throw std::runtime_error("decompose_three_squares: sweep exhausted");
}

}  // namespace zkseries
