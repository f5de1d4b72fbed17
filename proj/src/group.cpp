#include "zkseries/group.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace zkseries {

namespace {

void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

void hash64(std::span<const std::uint8_t> data, std::uint8_t out[64]) {
    crypto_generichash(out, 64, data.data(), data.size(), nullptr, 0);
}

}  // namespace

Scalar Scalar::one() { return from_u64(1); }

Scalar Scalar::from_u64(std::uint64_t v) {
    Scalar s;
    for (int i = 0; i < 8; ++i) s.bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return s;
}

Scalar Scalar::from_u128(u128 v) {
    Scalar s;
    for (int i = 0; i < 16; ++i) s.bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return s;
}

Scalar Scalar::from_i128(i128 v) {
    if (v >= 0) return from_u128(static_cast<u128>(v));
    return sc_neg(from_u128(static_cast<u128>(-v)));
}

Scalar Scalar::reduce_wide(std::span<const std::uint8_t> wide64) {
    ensure_sodium();
    if (wide64.size() != 64) throw std::invalid_argument("reduce_wide: need 64 bytes");
    Scalar s;
    std::uint8_t tmp[64];
    std::memcpy(tmp, wide64.data(), 64);
    crypto_core_ristretto255_scalar_reduce(s.bytes.data(), tmp);
    return s;
}

bool Scalar::is_zero() const {
    std::uint8_t acc = 0;
    for (auto b : bytes) acc |= b;
    return acc == 0;
}

Scalar sc_add(const Scalar& a, const Scalar& b) {
    ensure_sodium();
    Scalar r;
    crypto_core_ristretto255_scalar_add(r.bytes.data(), a.bytes.data(), b.bytes.data());
    return r;
}

Scalar sc_sub(const Scalar& a, const Scalar& b) {
    ensure_sodium();
    Scalar r;
    crypto_core_ristretto255_scalar_sub(r.bytes.data(), a.bytes.data(), b.bytes.data());
    return r;
}

Scalar sc_mul(const Scalar& a, const Scalar& b) {
    ensure_sodium();
    Scalar r;
    crypto_core_ristretto255_scalar_mul(r.bytes.data(), a.bytes.data(), b.bytes.data());
    return r;
}

Scalar sc_neg(const Scalar& a) {
    ensure_sodium();
    Scalar r;
    crypto_core_ristretto255_scalar_negate(r.bytes.data(), a.bytes.data());
    return r;
}

bool Point::is_identity() const {
    std::uint8_t acc = 0;
    for (auto b : bytes) acc |= b;
    return acc == 0;
}

bool Point::is_valid() const {
    ensure_sodium();
    if (is_identity()) return true;
    return crypto_core_ristretto255_is_valid_point(bytes.data()) == 1;
}

Point pt_add(const Point& a, const Point& b) {
    ensure_sodium();
    if (a.is_identity()) return b;
    if (b.is_identity()) return a;
    Point r;
    if (crypto_core_ristretto255_add(r.bytes.data(), a.bytes.data(), b.bytes.data()) != 0)
        throw std::invalid_argument("pt_add: invalid point");
    return r;
}

Point pt_sub(const Point& a, const Point& b) {
    ensure_sodium();
    if (b.is_identity()) return a;
    Point r;
    if (a.is_identity()) {
        // 0 - b: negate by subtracting from the identity via the neutral
        // element trick: sodium rejects the all-zero operand, so compute
        // b * (order-1) instead.
        Scalar minus_one = sc_neg(Scalar::one());
        return pt_mul(b, minus_one);
    }
    if (crypto_core_ristretto255_sub(r.bytes.data(), a.bytes.data(), b.bytes.data()) != 0)
        throw std::invalid_argument("pt_sub: invalid point");
    return r;
}

Point pt_mul(const Point& p, const Scalar& s) {
    ensure_sodium();
    if (s.is_zero() || p.is_identity()) return Point::identity();
    Point r;
    if (crypto_scalarmult_ristretto255(r.bytes.data(), s.bytes.data(), p.bytes.data()) != 0) {
        // sodium only fails here when the result is the identity (s = 0 mod
        // order was excluded above but s may still reduce to it) or p invalid
        if (!p.is_valid()) throw std::invalid_argument("pt_mul: invalid point");
        return Point::identity();
    }
    return r;
}

Point pt_base_mul(const Scalar& s) {
    ensure_sodium();
    if (s.is_zero()) return Point::identity();
    Point r;
    if (crypto_scalarmult_ristretto255_base(r.bytes.data(), s.bytes.data()) != 0)
        return Point::identity();
    return r;
}

Point pt_from_hash64(std::span<const std::uint8_t> h64) {
    ensure_sodium();
    if (h64.size() != 64) throw std::invalid_argument("pt_from_hash64: need 64 bytes");
    Point r;
    crypto_core_ristretto255_from_hash(r.bytes.data(), h64.data());
    return r;
}

CommitParams setup_params(std::span<const std::uint8_t> seed, std::string_view label) {
    ensure_sodium();
    CommitParams p;
    p.seed.assign(seed.begin(), seed.end());
    p.label = std::string(label);
    p.g = pt_base_mul(Scalar::one());

    std::vector<std::uint8_t> material;
    material.insert(material.end(), label.begin(), label.end());
    material.push_back(0);
    material.insert(material.end(), p.g.bytes.begin(), p.g.bytes.end());
    material.insert(material.end(), seed.begin(), seed.end());
    std::uint8_t digest[64];
    hash64(material, digest);
    p.h = pt_from_hash64(std::span<const std::uint8_t>(digest, 64));
    return p;
}

CommitParams setup_params(std::string_view seed, std::string_view label) {
    return setup_params(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(seed.data()),
                                      seed.size()),
        label);
}

Point commit(const CommitParams& params, const Scalar& x, const Scalar& r) {
    return pt_add(pt_base_mul(x), pt_mul(params.h, r));
}

bool verify_opening(const CommitParams& params, const Point& c, const Scalar& x,
                    const Scalar& r) {
    return commit(params, x, r) == c;
}

Point combine(const Point& c1, const Point& c2) { return pt_add(c1, c2); }

Point scale(const Point& c, const Scalar& k) { return pt_mul(c, k); }

Transcript::Transcript(std::string_view domain) {
    ensure_sodium();
    std::vector<std::uint8_t> material;
    const char tag[] = "zkseries.transcript.v1";
    material.insert(material.end(), tag, tag + sizeof(tag) - 1);
    material.insert(material.end(), domain.begin(), domain.end());
    hash64(material, state_.data());
}

void Transcript::append(std::string_view label, std::span<const std::uint8_t> data) {
    std::vector<std::uint8_t> material;
    material.reserve(64 + 12 + label.size() + data.size());
    material.insert(material.end(), state_.begin(), state_.end());
    std::uint32_t ll = static_cast<std::uint32_t>(label.size());
    for (int i = 0; i < 4; ++i) material.push_back(static_cast<std::uint8_t>(ll >> (8 * i)));
    material.insert(material.end(), label.begin(), label.end());
    std::uint64_t dl = data.size();
    for (int i = 0; i < 8; ++i) material.push_back(static_cast<std::uint8_t>(dl >> (8 * i)));
    material.insert(material.end(), data.begin(), data.end());
    hash64(material, state_.data());
}

void Transcript::append_point(std::string_view label, const Point& p) {
    append(label, std::span<const std::uint8_t>(p.bytes.data(), p.bytes.size()));
}

void Transcript::append_scalar(std::string_view label, const Scalar& s) {
    append(label, std::span<const std::uint8_t>(s.bytes.data(), s.bytes.size()));
}

void Transcript::append_u64(std::string_view label, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    append(label, std::span<const std::uint8_t>(b, 8));
}

void Transcript::append_u128(std::string_view label, u128 v) {
    std::uint8_t b[16];
    for (int i = 0; i < 16; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    append(label, std::span<const std::uint8_t>(b, 16));
}

std::array<std::uint8_t, 64> Transcript::challenge_bytes(std::string_view label) {
    std::vector<std::uint8_t> material;
    material.insert(material.end(), state_.begin(), state_.end());
    const char tag[] = "/challenge/";
    material.insert(material.end(), tag, tag + sizeof(tag) - 1);
    material.insert(material.end(), label.begin(), label.end());
    std::array<std::uint8_t, 64> out{};
    hash64(material, out.data());
    // ratchet so repeated challenges differ
    std::vector<std::uint8_t> next;
    next.insert(next.end(), out.begin(), out.end());
    next.insert(next.end(), state_.begin(), state_.end());
    hash64(next, state_.data());
    return out;
}

Scalar Transcript::challenge_scalar(std::string_view label) {
    auto wide = challenge_bytes(label);
    return Scalar::reduce_wide(wide);
}

std::uint64_t Transcript::challenge_bounded(std::string_view label, unsigned bits) {
    if (bits < 1 || bits > 56) throw std::invalid_argument("challenge_bounded: bits in [1,56]");
    auto wide = challenge_bytes(label);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(wide[i]) << (8 * i);
    if (bits == 64) return v;
    return v & ((std::uint64_t(1) << bits) - 1);
}

ScalarRng::ScalarRng() : seeded_(false) { ensure_sodium(); }

ScalarRng::ScalarRng(std::span<const std::uint8_t> seed) : seeded_(true) {
    ensure_sodium();
    std::uint8_t digest[64];
    hash64(seed, digest);
    std::memcpy(seed_.data(), digest, 32);
}

void ScalarRng::fill(std::span<std::uint8_t> out) {
    if (!seeded_) {
        randombytes_buf(out.data(), out.size());
        return;
    }
    std::size_t filled = 0;
    while (filled < out.size()) {
        if (pos_ >= buf_.size()) {
            std::uint8_t block_input[40];
            std::memcpy(block_input, seed_.data(), 32);
            for (int i = 0; i < 8; ++i)
                block_input[32 + i] = static_cast<std::uint8_t>(counter_ >> (8 * i));
            buf_.resize(64);
            crypto_generichash(buf_.data(), 64, block_input, sizeof(block_input), nullptr, 0);
            ++counter_;
            pos_ = 0;
        }
        std::size_t n = std::min(out.size() - filled, buf_.size() - pos_);
        std::memcpy(out.data() + filled, buf_.data() + pos_, n);
        filled += n;
        pos_ += n;
    }
}

Scalar ScalarRng::next_scalar() {
    std::uint8_t wide[64];
    fill(std::span<std::uint8_t>(wide, 64));
    return Scalar::reduce_wide(std::span<const std::uint8_t>(wide, 64));
}

u128 ScalarRng::next_u128_below_pow2(unsigned bits) {
    if (bits < 1 || bits > 127) throw std::invalid_argument("next_u128_below_pow2: bits in [1,127]");
    std::uint8_t raw[16];
    fill(std::span<std::uint8_t>(raw, 16));
    u128 v = 0;
    for (int i = 0; i < 16; ++i) v |= u128(raw[i]) << (8 * i);
    if (bits == 128) return v;
    return v & ((u128(1) << bits) - 1);
}

std::string to_hex(std::span<const std::uint8_t> data) {
    ensure_sodium();
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.resize(data.size() * 2);
    return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    ensure_sodium();
    std::vector<std::uint8_t> out(hex.size() / 2 + 1);
    std::size_t out_len = 0;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &out_len,
                       nullptr) != 0)
        throw std::invalid_argument("from_hex: invalid hex string");
    out.resize(out_len);
    return out;
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    ensure_sodium();
    std::array<std::uint8_t, 32> out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string i128_to_string(i128 v) {
    if (v < 0) return "-" + u128_to_string(static_cast<u128>(-v));
    return u128_to_string(static_cast<u128>(v));
}

u128 u128_from_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("u128_from_string: empty");
    u128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("u128_from_string: bad digit");
        u128 next = v * 10 + static_cast<unsigned>(c - '0');
        if (next < v) throw std::out_of_range("u128_from_string: overflow");
        v = next;
    }
    return v;
}

i128 i128_from_string(const std::string& s) {
    if (!s.empty() && s[0] == '-') return -static_cast<i128>(u128_from_string(s.substr(1)));
    return static_cast<i128>(u128_from_string(s));
}

}  // namespace zkseries
