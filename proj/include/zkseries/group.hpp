#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zkseries {

using u128 = unsigned __int128;
using i128 = __int128;

// Scalar modulo the ristretto255 group order (~2^252), little-endian reduced.
struct Scalar {
    std::array<std::uint8_t, 32> bytes{};

    static Scalar zero() { return {}; }
    static Scalar one();
    static Scalar from_u64(std::uint64_t v);
    static Scalar from_u128(u128 v);
    static Scalar from_i128(i128 v);
    static Scalar reduce_wide(std::span<const std::uint8_t> wide64);

    bool is_zero() const;
    bool operator==(const Scalar&) const = default;
};

Scalar sc_add(const Scalar& a, const Scalar& b);
Scalar sc_sub(const Scalar& a, const Scalar& b);
Scalar sc_mul(const Scalar& a, const Scalar& b);
Scalar sc_neg(const Scalar& a);

// Prime-order group element in canonical ristretto255 encoding. The identity
// encodes as 32 zero bytes.
struct Point {
    std::array<std::uint8_t, 32> bytes{};

    static Point identity() { return {}; }
    bool is_identity() const;
    bool is_valid() const;
    bool operator==(const Point&) const = default;
};

Point pt_add(const Point& a, const Point& b);
Point pt_sub(const Point& a, const Point& b);
Point pt_mul(const Point& p, const Scalar& s);
Point pt_base_mul(const Scalar& s);
Point pt_from_hash64(std::span<const std::uint8_t> h64);

// Commitment parameters: the standard base g plus an independent generator h
// derived from the seed by hash-to-group, so every installation with the same
// seed agrees on the parameters.
struct CommitParams {
    std::vector<std::uint8_t> seed;
    std::string label;
    Point g;
    Point h;
};

inline constexpr std::string_view kDefaultParamsSeed = "zk-series/commit-params/v1";

CommitParams setup_params(std::span<const std::uint8_t> seed,
                          std::string_view label = "zk-series");
CommitParams setup_params(std::string_view seed, std::string_view label = "zk-series");

// c = g^x * h^r
Point commit(const CommitParams& params, const Scalar& x, const Scalar& r);
bool verify_opening(const CommitParams& params, const Point& c, const Scalar& x, const Scalar& r);
// combine(C(a,ra), C(b,rb)) = C(a+b, ra+rb); scale(C(a,r), k) = C(ka, kr)
Point combine(const Point& c1, const Point& c2);
Point scale(const Point& c, const Scalar& k);

// Deterministic Fiat-Shamir transcript. Identical append sequences yield
// identical challenges; every append and every challenge ratchets the state.
class Transcript {
public:
    explicit Transcript(std::string_view domain);

    void append(std::string_view label, std::span<const std::uint8_t> data);
    void append_point(std::string_view label, const Point& p);
    void append_scalar(std::string_view label, const Scalar& s);
    void append_u64(std::string_view label, std::uint64_t v);
    void append_u128(std::string_view label, u128 v);

    std::array<std::uint8_t, 64> challenge_bytes(std::string_view label);
    Scalar challenge_scalar(std::string_view label);
    // uniform in [0, 2^bits), bits in [1, 56]
    std::uint64_t challenge_bounded(std::string_view label, unsigned bits);

private:
    std::array<std::uint8_t, 64> state_{};
};

// Source of commitment randomness. The default draws from the system RNG; the
// seeded variant is a deterministic XOF stream for reproducible proofs.
class ScalarRng {
public:
    ScalarRng();                                        // system randomness
    explicit ScalarRng(std::span<const std::uint8_t> seed);  // deterministic

    Scalar next_scalar();
    void fill(std::span<std::uint8_t> out);
    u128 next_u128_below_pow2(unsigned bits);

private:
    bool seeded_;
    std::array<std::uint8_t, 32> seed_{};
    std::uint64_t counter_ = 0;
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

std::string to_hex(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> from_hex(const std::string& hex);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

std::string u128_to_string(u128 v);
std::string i128_to_string(i128 v);
u128 u128_from_string(const std::string& s);
i128 i128_from_string(const std::string& s);

}  // namespace zkseries
