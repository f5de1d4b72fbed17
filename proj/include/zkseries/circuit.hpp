#pragma once

#include <stdexcept>

#include "zkseries/group.hpp"
#include "zkseries/sharp.hpp"
#include "zkseries/timeseries.hpp"
#include "zkseries/zkmp.hpp"

namespace zkseries {

enum class AuthMode { nearest, knn_sum, knn_max };

std::string auth_mode_name(AuthMode m);
AuthMode auth_mode_from_name(const std::string& name);

// Range-claim bounds derived from the configuration; recorded in the bundle
// fingerprint so prover and verifier agree on every claim's interval.
struct Bounds {
    i128 coordinate = 0;  // |a_j - b_j| gadgets
    i128 local = 0;       // local-distance comparisons (max trees)
    i128 edge = 0;        // one coupling edge (TWED adds lambda)
    i128 threshold_cap = 0;  // sanity cap for theta - 1
};

Bounds derive_bounds(const DistanceConfig& cfg, std::size_t m, std::size_t t_max, std::size_t k);

// Everything the two parties must agree on before a proof is exchanged.
struct AuthPolicy {
    DistanceConfig distance;
    AuthMode mode = AuthMode::nearest;
    std::size_t k = 1;
    i128 theta = 1;
    std::size_t t_max = 512;      // bound-derivation cap on series length
    unsigned soundness_bits = 40;
};

std::array<std::uint8_t, 32> policy_fingerprint(const AuthPolicy& policy, std::size_t m,
                                                const CommitParams& params);

// A base series together with per-coordinate commitments and their openings
// (prover-side secret store; the commitments are what sits on the board).
struct CommittedSeries {
    TimeSeries values;
    std::vector<std::vector<Scalar>> randomness;
    std::vector<std::vector<Point>> commitments;
};

CommittedSeries commit_series(const CommitParams& params, const TimeSeries& series,
                              ScalarRng& rng);

struct SelectedPair {
    std::size_t base_index = 0;
    Dist distance = 0;
    CouplingWitness witness;
};

// Indices of the k smallest series distances, ties broken by lower index.
std::vector<SelectedPair> select_k_nearest(const std::vector<TimeSeries>& base,
                                           const TimeSeries& fresh, const DistanceConfig& cfg,
                                           std::size_t k);

struct AuthProofBundle {
    std::uint32_t version = 1;
    std::array<std::uint8_t, 32> fingerprint{};
    std::vector<std::size_t> base_indices;  // ascending
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> coupling_pairs;
    std::vector<std::vector<Scalar>> fresh_randomness;  // [t][j]
    std::vector<Point> node_commitments;                // canonical creation order
    std::vector<std::uint8_t> branch_bits;              // max-node decisions
    std::vector<Scalar> zero_openings;                  // square-equality openings
    std::vector<ZkmpProof> zkmps;
    SharpBatchProof range_proof;
};

// Raised when plaintext authentication fails (delta* >= theta); distinct from
// internal errors so callers can emit the bare failure status and nothing
// else.
class AuthenticationFailed : public std::runtime_error {
public:
    AuthenticationFailed() : std::runtime_error("authentication failed") {}
};

// Prover-side record of what was proven; handy for calibration and tests.
struct AuthProveInfo {
    Dist delta_star = 0;
    std::vector<Dist> selected_distances;
};

AuthProofBundle build_auth_proof(const CommitParams& params,
                                 const std::vector<CommittedSeries>& base,
                                 const TimeSeries& fresh, const AuthPolicy& policy,
                                 const PrimeCache& cache, ScalarRng& rng,
                                 AuthProveInfo* info = nullptr);

struct VerifyDiagnostics {
    std::string first_failure;
};

// board_commitments holds, for every base series of the user, the [t][j]
// commitment grid as recorded on the bulletin board.
bool verify_auth_proof(const CommitParams& params,
                       const std::vector<std::vector<std::vector<Point>>>& board_commitments,
                       const TimeSeries& fresh_plain, const AuthProofBundle& bundle,
                       const AuthPolicy& policy, VerifyDiagnostics* diag = nullptr);

}  // namespace zkseries
