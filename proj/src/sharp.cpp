#include "zkseries/sharp.hpp"

#include <stdexcept>

namespace zkseries {

namespace {

constexpr unsigned kSlackBits = 16;
constexpr int kMaxRetries = 64;

unsigned bit_width_u128(u128 v) {
    unsigned w = 0;
    while (v) {
        ++w;
        v >>= 1;
    }
    return w == 0 ? 1 : w;
}

struct ClaimWidths {
    unsigned value_bits_x;  // of the claimed value (<= B)
    unsigned value_bits_y;  // of the square roots (<= B+1)
    unsigned mask_bits_x;
    unsigned mask_bits_y;
};

ClaimWidths widths_for(u128 bound, unsigned soundness_bits) {
    ClaimWidths w{};
    w.value_bits_x = bit_width_u128(bound);
    w.value_bits_y = bit_width_u128(bound + 1);
    w.mask_bits_x = w.value_bits_x + soundness_bits + kSlackBits;
    w.mask_bits_y = w.value_bits_y + soundness_bits + kSlackBits;
    return w;
}

void validate_parameters(std::span<const RangeClaim> claims, unsigned soundness_bits) {
    if (claims.empty()) throw std::invalid_argument("sharp: empty claim batch");
    if (soundness_bits < 1 || soundness_bits > 56)
        throw std::invalid_argument("sharp: soundness bits must be in [1, 56]");
    for (const auto& c : claims) {
        if (bit_width_u128(c.bound) > 62)
            throw std::invalid_argument("sharp: claim bound exceeds 62 bits");
        auto w = widths_for(c.bound, soundness_bits);
        if (w.mask_bits_y + 1 > 127)
            throw std::invalid_argument("sharp: response width exceeds 127 bits");
    }
}

void absorb_statement(Transcript& tr, std::span<const RangeClaim> claims,
                      unsigned soundness_bits) {
    tr.append_u64("sharp.n", claims.size());
    tr.append_u64("sharp.R", soundness_bits);
    for (const auto& c : claims) {
        tr.append_point("sharp.claim.c", c.commitment);
        tr.append_u128("sharp.claim.B", c.bound);
    }
}

struct BatchWeights {
    std::vector<Scalar> w;                  // quadratic-relation weights
    std::vector<Scalar> u;                  // opening weights for value commitments
    std::vector<std::array<Scalar, 3>> uy;  // opening weights for square-root commitments
};

BatchWeights derive_weights(Transcript& tr, std::size_t n) {
    BatchWeights bw;
    bw.w.reserve(n);
    bw.u.reserve(n);
    bw.uy.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        bw.w.push_back(tr.challenge_scalar("sharp.w"));
        bw.u.push_back(tr.challenge_scalar("sharp.u"));
        bw.uy.push_back({tr.challenge_scalar("sharp.uy0"), tr.challenge_scalar("sharp.uy1"),
                         tr.challenge_scalar("sharp.uy2")});
    }
    return bw;
}

void absorb_responses(Transcript& tr, const SharpBatchProof& p) {
    for (std::size_t i = 0; i < p.z_x.size(); ++i) {
        tr.append_u128("sharp.z_x", p.z_x[i]);
        for (int j = 0; j < 3; ++j) tr.append_u128("sharp.z_y", p.z_y[i][j]);
    }
    tr.append_scalar("sharp.t_agg", p.t_agg);
    tr.append_scalar("sharp.tau", p.tau);
}

// 4*z*(gamma*B - z) + gamma^2 - sum z_y^2, all modulo the group order; the
// gamma^2 coefficient of the underlying integer polynomial is the three-square
// relation 4v(B-v)+1 - sum y^2.
Scalar relation_poly(const Scalar& gamma, u128 bound, u128 zx, const std::array<u128, 3>& zy) {
    Scalar zxs = Scalar::from_u128(zx);
    Scalar four = Scalar::from_u64(4);
    Scalar inner = sc_sub(sc_mul(gamma, Scalar::from_u128(bound)), zxs);
    Scalar f = sc_mul(four, sc_mul(zxs, inner));
    f = sc_add(f, sc_mul(gamma, gamma));
    for (int j = 0; j < 3; ++j) {
        Scalar zys = Scalar::from_u128(zy[j]);
        f = sc_sub(f, sc_mul(zys, zys));
    }
    return f;
}

}  // namespace

unsigned sharp_value_bits(u128 bound) { return bit_width_u128(bound); }

unsigned sharp_mask_bits(u128 bound, unsigned soundness_bits) {
    return bit_width_u128(bound) + soundness_bits + kSlackBits;
}

SharpBatchProof sharp_prove_batch(const CommitParams& params, Transcript& transcript,
                                  std::span<const RangeClaim> claims,
                                  std::span<const RangeWitness> witnesses,
                                  unsigned soundness_bits, const PrimeCache& cache,
                                  ScalarRng& rng) {
    validate_parameters(claims, soundness_bits);
    if (claims.size() != witnesses.size())
        throw std::invalid_argument("sharp: claim/witness count mismatch");
    const std::size_t n = claims.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (witnesses[i].value > claims[i].bound)
            throw RangeViolation("sharp: value outside [0, bound] for claim " + std::to_string(i));
    }

    SharpBatchProof proof;
    proof.soundness_bits = soundness_bits;
    proof.y_commitments.resize(n);
    proof.z_x.resize(n);
    proof.z_y.resize(n);

    // three-square witnesses and their commitments
    std::vector<std::array<u128, 3>> y_values(n);
    std::vector<std::array<Scalar, 3>> y_rand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const u128 v = witnesses[i].value;
        const u128 target = 4 * v * (claims[i].bound - v) + 1;
        y_values[i] = decompose_three_squares(target, cache);
        for (int j = 0; j < 3; ++j) {
            y_rand[i][j] = rng.next_scalar();
            proof.y_commitments[i][j] =
                commit(params, Scalar::from_u128(y_values[i][j]), y_rand[i][j]);
        }
    }

    absorb_statement(transcript, claims, soundness_bits);
    for (const auto& ys : proof.y_commitments)
        for (const auto& y : ys) transcript.append_point("sharp.Y", y);
    BatchWeights bw = derive_weights(transcript, n);

    // aggregate opening randomness: sum u_i r_i + sum uy_ij s_ij
    Scalar r_agg = Scalar::zero();
    for (std::size_t i = 0; i < n; ++i) {
        r_agg = sc_add(r_agg, sc_mul(bw.u[i], witnesses[i].randomness));
        for (int j = 0; j < 3; ++j) r_agg = sc_add(r_agg, sc_mul(bw.uy[i][j], y_rand[i][j]));
    }

    const Scalar four = Scalar::from_u64(4);
    const Scalar eight = Scalar::from_u64(8);
    const Scalar two = Scalar::from_u64(2);

    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        std::vector<u128> mask_x(n);
        std::vector<std::array<u128, 3>> mask_y(n);
        Scalar mask_agg = Scalar::zero();
        Scalar alpha1 = Scalar::zero();
        Scalar alpha0 = Scalar::zero();
        for (std::size_t i = 0; i < n; ++i) {
            auto w = widths_for(claims[i].bound, soundness_bits);
            mask_x[i] = rng.next_u128_below_pow2(w.mask_bits_x);
            Scalar mx = Scalar::from_u128(mask_x[i]);
            mask_agg = sc_add(mask_agg, sc_mul(bw.u[i], mx));

            // alpha1_i = 4 m B - 8 m v - 2 sum m_y y ; alpha0_i = -(4 m^2 + sum m_y^2)
            Scalar a1 = sc_sub(sc_mul(four, sc_mul(mx, Scalar::from_u128(claims[i].bound))),
                               sc_mul(eight, sc_mul(mx, Scalar::from_u128(witnesses[i].value))));
            Scalar a0 = sc_mul(four, sc_mul(mx, mx));
            for (int j = 0; j < 3; ++j) {
                mask_y[i][j] = rng.next_u128_below_pow2(w.mask_bits_y);
                Scalar my = Scalar::from_u128(mask_y[i][j]);
                mask_agg = sc_add(mask_agg, sc_mul(bw.uy[i][j], my));
                a1 = sc_sub(a1, sc_mul(two, sc_mul(my, Scalar::from_u128(y_values[i][j]))));
                a0 = sc_add(a0, sc_mul(my, my));
            }
            alpha1 = sc_add(alpha1, sc_mul(bw.w[i], a1));
            alpha0 = sc_sub(alpha0, sc_mul(bw.w[i], a0));
        }

        Scalar rho_mask = rng.next_scalar();
        Scalar rho1 = rng.next_scalar();
        Scalar rho0 = rng.next_scalar();
        Point d = commit(params, mask_agg, rho_mask);
        Point a1c = commit(params, alpha1, rho1);
        Point a0c = commit(params, alpha0, rho0);

        Transcript fork = transcript;
        fork.append_point("sharp.D", d);
        fork.append_point("sharp.A1", a1c);
        fork.append_point("sharp.A0", a0c);
        const std::uint64_t gamma = fork.challenge_bounded("sharp.gamma", soundness_bits);

        bool accepted = true;
        for (std::size_t i = 0; i < n && accepted; ++i) {
            auto w = widths_for(claims[i].bound, soundness_bits);
            u128 zx = mask_x[i] + u128(gamma) * witnesses[i].value;
            u128 lo = u128(1) << (w.value_bits_x + soundness_bits);
            if (zx < lo || zx >= (u128(1) << w.mask_bits_x)) {
                accepted = false;
                break;
            }
            proof.z_x[i] = zx;
            for (int j = 0; j < 3; ++j) {
                u128 zy = mask_y[i][j] + u128(gamma) * y_values[i][j];
                u128 lo_y = u128(1) << (w.value_bits_y + soundness_bits);
                if (zy < lo_y || zy >= (u128(1) << w.mask_bits_y)) {
                    accepted = false;
                    break;
                }
                proof.z_y[i][j] = zy;
            }
        }
        if (!accepted) continue;

        Scalar gamma_s = Scalar::from_u64(gamma);
        proof.mask_commitment = d;
        proof.alpha1_commitment = a1c;
        proof.alpha0_commitment = a0c;
        proof.t_agg = sc_add(rho_mask, sc_mul(gamma_s, r_agg));
        proof.tau = sc_add(rho0, sc_mul(gamma_s, rho1));

        transcript = fork;
        absorb_responses(transcript, proof);
        return proof;
    }
    throw std::runtime_error("sharp: rejection sampling exhausted its retry budget");
}

bool sharp_verify_batch(const CommitParams& params, Transcript& transcript,
                        std::span<const RangeClaim> claims, const SharpBatchProof& proof) {
    const std::size_t n = claims.size();
    try {
        validate_parameters(claims, proof.soundness_bits);
    } catch (const std::exception&) {
        return false;
    }
    if (proof.y_commitments.size() != n || proof.z_x.size() != n || proof.z_y.size() != n)
        return false;
    for (const auto& c : claims)
        if (!c.commitment.is_valid()) return false;
    for (const auto& ys : proof.y_commitments)
        for (const auto& y : ys)
            if (!y.is_valid()) return false;
    if (!proof.mask_commitment.is_valid() || !proof.alpha1_commitment.is_valid() ||
        !proof.alpha0_commitment.is_valid())
        return false;

    absorb_statement(transcript, claims, proof.soundness_bits);
    for (const auto& ys : proof.y_commitments)
        for (const auto& y : ys) transcript.append_point("sharp.Y", y);
    BatchWeights bw = derive_weights(transcript, n);

    transcript.append_point("sharp.D", proof.mask_commitment);
    transcript.append_point("sharp.A1", proof.alpha1_commitment);
    transcript.append_point("sharp.A0", proof.alpha0_commitment);
    const std::uint64_t gamma = transcript.challenge_bounded("sharp.gamma", proof.soundness_bits);
    const Scalar gamma_s = Scalar::from_u64(gamma);

    // shortness of every masked response
    for (std::size_t i = 0; i < n; ++i) {
        auto w = widths_for(claims[i].bound, proof.soundness_bits);
        if (proof.z_x[i] >= (u128(1) << w.mask_bits_x)) return false;
        for (int j = 0; j < 3; ++j)
            if (proof.z_y[i][j] >= (u128(1) << w.mask_bits_y)) return false;
    }

    // aggregated masked opening of all value and square-root commitments
    Scalar z_agg = Scalar::zero();
    Point stmt_agg = Point::identity();
    for (std::size_t i = 0; i < n; ++i) {
        z_agg = sc_add(z_agg, sc_mul(bw.u[i], Scalar::from_u128(proof.z_x[i])));
        stmt_agg = pt_add(stmt_agg, pt_mul(claims[i].commitment, bw.u[i]));
        for (int j = 0; j < 3; ++j) {
            z_agg = sc_add(z_agg, sc_mul(bw.uy[i][j], Scalar::from_u128(proof.z_y[i][j])));
            stmt_agg = pt_add(stmt_agg, pt_mul(proof.y_commitments[i][j], bw.uy[i][j]));
        }
    }
    Point lhs = commit(params, z_agg, proof.t_agg);
    Point rhs = pt_add(proof.mask_commitment, pt_mul(stmt_agg, gamma_s));
    if (lhs != rhs) return false;

    // batched quadratic relation: sum_i w_i F_i(gamma) = gamma*alpha1 + alpha0
    Scalar v_total = Scalar::zero();
    for (std::size_t i = 0; i < n; ++i) {
        Scalar f = relation_poly(gamma_s, claims[i].bound, proof.z_x[i], proof.z_y[i]);
        v_total = sc_add(v_total, sc_mul(bw.w[i], f));
    }
    Point quad_lhs = commit(params, v_total, proof.tau);
    Point quad_rhs = pt_add(pt_mul(proof.alpha1_commitment, gamma_s), proof.alpha0_commitment);
    if (quad_lhs != quad_rhs) return false;

    absorb_responses(transcript, proof);
    return true;
}

}  // namespace zkseries
