#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "zkseries/group.hpp"
#include "zkseries/three_squares.hpp"

namespace zkseries {

// Public part of one range claim: commitment c and closed bound [0, B].
struct RangeClaim {
    Point commitment;
    u128 bound = 0;
};

// Prover side: c must open to (value, randomness) with 0 <= value <= bound.
struct RangeWitness {
    u128 value = 0;
    Scalar randomness;
};

// Batched square-decomposition range proof. Per claim, commitments to the
// three square roots of 4v(B-v)+1; mask and alpha-polynomial announcements
// are aggregated across the batch under transcript-derived weights, so the
// only per-claim group elements are the square-root commitments. Responses
// are short masked integer openings; a cheating prover survives with
// probability ~2^-R.
struct SharpBatchProof {
    std::uint32_t soundness_bits = 0;
    std::vector<std::array<Point, 3>> y_commitments;  // per claim
    Point mask_commitment;                            // aggregated masked opening
    Point alpha1_commitment;                          // gamma-coefficient of the batch polynomial
    Point alpha0_commitment;                          // constant coefficient
    std::vector<u128> z_x;                            // per claim, short
    std::vector<std::array<u128, 3>> z_y;             // per claim, short
    Scalar t_agg;                                     // randomness response, masked opening
    Scalar tau;                                       // randomness response, alpha check
};

class RangeViolation : public std::runtime_error {
public:
    explicit RangeViolation(const std::string& what) : std::runtime_error(what) {}
};

// Response width for a claim value bounded by `bound`: value bits + R + 16
// bits of rejection-sampling slack.
unsigned sharp_value_bits(u128 bound);
unsigned sharp_mask_bits(u128 bound, unsigned soundness_bits);

// Throws RangeViolation if some value lies outside [0, B]; retries rejection
// sampling with fresh masks (bounded), then errors. claims[i] must open to
// witnesses[i].
SharpBatchProof sharp_prove_batch(const CommitParams& params, Transcript& transcript,
                                  std::span<const RangeClaim> claims,
                                  std::span<const RangeWitness> witnesses,
                                  unsigned soundness_bits, const PrimeCache& cache,
                                  ScalarRng& rng);

bool sharp_verify_batch(const CommitParams& params, Transcript& transcript,
                        std::span<const RangeClaim> claims, const SharpBatchProof& proof);

}  // namespace zkseries
