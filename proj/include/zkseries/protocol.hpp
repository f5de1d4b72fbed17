#pragma once

#include <optional>

#include "zkseries/circuit.hpp"

namespace zkseries {

// Shared protocol configuration: the distance stack plus the preprocessing
// and proof parameters both parties must agree on. Loaded from a JSON file.
struct ProtocolConfig {
    DistanceConfig distance;
    AuthMode mode = AuthMode::knn_sum;
    std::size_t smooth_step = 1;
    std::size_t smooth_window = 1;
    std::size_t t_max = 512;
    unsigned soundness_bits = 40;
    std::int64_t cache_limit = 1'000'000;
    std::string cache_path;  // optional prime-cache CSV; empty builds in memory
};

ProtocolConfig load_config(const std::string& path);
void save_config(const ProtocolConfig& cfg, const std::string& path);
std::array<std::uint8_t, 32> config_hash(const ProtocolConfig& cfg);

AuthPolicy make_policy(const ProtocolConfig& cfg, i128 theta, std::size_t k);

// One append-only board entry. The genesis entry (seq 0) pins the commitment
// parameter seed and the config hash; registration entries carry the user's
// commitments in canonical order (series, then time, then coordinate) plus
// the public normalization metadata the verifier needs.
struct BoardEntry {
    std::uint64_t seq = 0;
    std::string user;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;  // (T, m) per series
    std::vector<Point> commitments;                               // flat canonical order
    std::vector<std::pair<double, double>> min_max;               // per signal
    std::string genesis_meta;                                     // genesis only
    std::array<std::uint8_t, 32> prev_hash{};
    std::array<std::uint8_t, 32> hash{};
};

std::array<std::uint8_t, 32> board_entry_digest(const BoardEntry& e);

// Raised when the on-disk board advanced since it was loaded (stale prev
// hash); the caller reloads and retries the append.
class BoardConflict : public std::runtime_error {
public:
    explicit BoardConflict(const std::string& what) : std::runtime_error(what) {}
};

class Board {
public:
    static Board create(const CommitParams& params, const ProtocolConfig& cfg);
    static Board load(const std::string& path);
    // Single-writer: takes an advisory lock on the file while writing.
    void save(const std::string& path) const;
    // Like save, but refuses to clobber a board whose chain is not a prefix
    // of this one (throws BoardConflict). Used by registration.
    void save_checked(const std::string& path) const;

    const std::vector<BoardEntry>& entries() const { return entries_; }
    const BoardEntry& append(BoardEntry entry);  // links prev hash, seals hash
    bool verify_chain(std::uint64_t* bad_seq = nullptr) const;

    std::optional<std::size_t> latest_entry_for(const std::string& user) const;
    // Reshapes an entry's flat commitment list into per-series [t][j] grids.
    static std::vector<std::vector<std::vector<Point>>> commitment_grids(const BoardEntry& e);

private:
    std::vector<BoardEntry> entries_;
};

// Prover-side secret store: plaintexts and randomness behind one board entry.
// The threat model assumes the device keeps this encrypted at rest.
struct RegistrationRecord {
    std::string user;
    std::uint64_t board_seq = 0;
    std::vector<std::pair<double, double>> min_max;
    std::vector<CommittedSeries> series;
};

void save_record(const RegistrationRecord& record, const std::string& path);
// Recomputes the per-coordinate commitments from the stored plaintexts and
// randomness while loading.
RegistrationRecord load_record(const std::string& path, const CommitParams& params);
// True iff every board commitment recomputes from the record's plaintexts.
bool record_matches_entry(const CommitParams& params, const RegistrationRecord& record,
                          const BoardEntry& entry);

// Raw reading ingestion: CSV (one row per time step, m numeric columns) or
// JSON (array of arrays).
std::vector<std::vector<double>> read_raw_reading(const std::string& path);
std::vector<std::pair<double, double>> compute_min_max(
    const std::vector<std::vector<std::vector<double>>>& corpus);
// normalize to [0, K] then smooth per the config
TimeSeries prepare_reading(const std::vector<std::vector<double>>& raw,
                           const std::vector<std::pair<double, double>>& min_max,
                           const ProtocolConfig& cfg);

RegistrationRecord register_user(const CommitParams& params, const ProtocolConfig& cfg,
                                 Board& board, const std::string& user,
                                 const std::vector<std::vector<std::vector<double>>>& raw_readings,
                                 const std::vector<std::pair<double, double>>* sidecar_min_max,
                                 ScalarRng& rng);

enum class ProveStatus { ok, auth_failed };

// Envelope written to disk: the circuit bundle plus the board coordinates the
// verifier needs to locate the commitments.
struct BundleEnvelope {
    std::string user;
    std::uint64_t board_seq = 0;
    AuthProofBundle bundle;
};

struct ProveResult {
    ProveStatus status = ProveStatus::auth_failed;
    std::optional<BundleEnvelope> envelope;  // present only on success
    AuthProveInfo info;                      // prover-side only
};

// On auth failure returns the bare status: no bundle, no distances, no
// partial proof material.
ProveResult prove_authentication(const CommitParams& params, const ProtocolConfig& cfg,
                                 const RegistrationRecord& record,
                                 const std::vector<std::vector<double>>& fresh_raw, i128 theta,
                                 std::size_t k, const PrimeCache& cache, ScalarRng& rng);

struct VerifyOutcome {
    bool accepted = false;
    std::string first_failure;
};

VerifyOutcome verify_authentication(const CommitParams& params, const ProtocolConfig& cfg,
                                    const Board& board, const BundleEnvelope& envelope,
                                    const std::vector<std::vector<double>>& fresh_raw, i128 theta,
                                    std::size_t k);

// Canonical JSON forms (byte-exact round trips). The serialized bytes are
// the canonical form; envelope_digest hashes them.
std::string envelope_to_json(const BundleEnvelope& env);
std::array<std::uint8_t, 32> envelope_digest(const BundleEnvelope& env);
BundleEnvelope envelope_from_json(const std::string& text);
void save_envelope(const BundleEnvelope& env, const std::string& path);
BundleEnvelope load_envelope(const std::string& path);

}  // namespace zkseries
