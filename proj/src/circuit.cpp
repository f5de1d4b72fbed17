#include "zkseries/circuit.hpp"

#include <algorithm>
#include <numeric>

namespace zkseries {

namespace {

i128 abs_i128(i128 v) { return v < 0 ? -v : v; }

void append_str(std::vector<std::uint8_t>& buf, std::string_view s) {
    buf.insert(buf.end(), s.begin(), s.end());
    buf.push_back('|');
}

// Circuit node: a committed value. `known` marks values the verifier holds in
// plaintext together with the commitment randomness (fresh-reading leaves and
// public constants). Private nodes carry value/randomness on the prover side
// only.
struct Node {
    bool known = false;
    i128 value = 0;
    Scalar r;
    Point c;
};

class Builder {
public:
    // Prover: `out` collects proof material. Verifier: `in` supplies it.
    Builder(const CommitParams& params, Transcript& tr, AuthProofBundle* out,
            const AuthProofBundle* in, const AuthPolicy& policy, const Bounds& bounds,
            ScalarRng* rng)
        : params_(params),
          tr_(tr),
          proving_(out != nullptr),
          out_(out),
          in_(in),
          policy_(policy),
          bounds_(bounds),
          rng_(rng) {}

    bool ok = true;
    std::string first_failure;
    std::vector<RangeClaim> claims;
    std::vector<RangeWitness> claim_wits;

    void fail(const std::string& what) {
        if (ok) {
            ok = false;
            first_failure = what;
        }
    }

    Node known_const(i128 v) {
        Node n;
        n.known = true;
        n.value = v;
        n.r = Scalar::zero();
        n.c = pt_base_mul(Scalar::from_i128(v));
        return n;
    }

    Node private_node(i128 prover_value) {
        Node n;
        if (proving_) {
            n.value = prover_value;
            n.r = rng_->next_scalar();
            n.c = commit(params_, Scalar::from_i128(prover_value), n.r);
            out_->node_commitments.push_back(n.c);
        } else {
            if (node_pos_ >= in_->node_commitments.size()) {
                fail("node commitment list exhausted");
            } else {
                n.c = in_->node_commitments[node_pos_++];
                if (!n.c.is_valid()) fail("invalid node commitment encoding");
            }
        }
        tr_.append_point("circuit.node", n.c);
        return n;
    }

    Node add(const Node& a, const Node& b) {
        Node n;
        n.known = a.known && b.known;
        n.c = pt_add(a.c, b.c);
        if (proving_ || n.known) {
            n.value = a.value + b.value;
            n.r = sc_add(a.r, b.r);
        }
        return n;
    }

    Node sub(const Node& a, const Node& b) {
        Node n;
        n.known = a.known && b.known;
        n.c = pt_sub(a.c, b.c);
        if (proving_ || n.known) {
            n.value = a.value - b.value;
            n.r = sc_sub(a.r, b.r);
        }
        return n;
    }

    Node zkmp_square(const Node& in) {
        Node out = private_node(proving_ ? in.value * in.value : 0);
        ZkmpStatement stmt{in.c, in.c, out.c};
        if (proving_) {
            Scalar v = Scalar::from_i128(in.value);
            out_->zkmps.push_back(zkmp_prove(params_, tr_, stmt, {v, v, in.r, in.r, out.r}, *rng_));
        } else if (zkmp_pos_ >= in_->zkmps.size()) {
            fail("zkmp list exhausted");
        } else if (!zkmp_verify(params_, tr_, stmt, in_->zkmps[zkmp_pos_++])) {
            fail("zkmp rejected");
        }
        return out;
    }

    void open_zero(const Node& a, const Node& b) {
        if (proving_) {
            out_->zero_openings.push_back(sc_sub(a.r, b.r));
            return;
        }
        if (zero_pos_ >= in_->zero_openings.size()) {
            fail("zero opening list exhausted");
            return;
        }
        Scalar dr = in_->zero_openings[zero_pos_++];
        if (pt_sub(a.c, b.c) != pt_mul(params_.h, dr)) fail("square equality opening rejected");
    }

    void claim_range(const Node& v, i128 bound) {
        if (bound < 0) {
            fail("negative range bound");
            return;
        }
        claims.push_back({v.c, static_cast<u128>(bound)});
        if (proving_) {
            if (v.value < 0 || v.value > bound)
                throw RangeViolation("auth circuit: claim value outside its declared bound");
            claim_wits.push_back({static_cast<u128>(v.value), v.r});
        }
    }

    // |a - b| with nonnegativity from the range claim and magnitude from the
    // pair of square proofs tied together by a zero opening.
    Node abs_diff(const Node& a, const Node& b) {
        Node diff = sub(a, b);
        Node s = private_node(proving_ ? abs_i128(diff.value) : 0);
        claim_range(s, bounds_.coordinate);
        Node sq_s = zkmp_square(s);
        Node sq_diff = zkmp_square(diff);
        open_zero(sq_s, sq_diff);
        return s;
    }

    // 2-child max: branch bit names the winner, one range claim shows
    // winner - loser >= 0. Ties go to the lower-index (left) child.
    Node max2(const Node& a, const Node& b, i128 bound) {
        std::uint8_t bit = 0;
        if (proving_) {
            bit = b.value > a.value ? 1 : 0;
            out_->branch_bits.push_back(bit);
        } else if (bit_pos_ >= in_->branch_bits.size()) {
            fail("branch bit list exhausted");
        } else {
            bit = in_->branch_bits[bit_pos_++];
            if (bit > 1) {
                fail("branch bit out of range");
                bit = 0;
            }
        }
        tr_.append_u64("circuit.branch", bit);
        const Node& winner = bit ? b : a;
        const Node& loser = bit ? a : b;
        claim_range(sub(winner, loser), bound);
        return winner;
    }

    Node max_tree(const std::vector<Node>& xs, i128 bound) {
        Node acc = xs.front();
        for (std::size_t i = 1; i < xs.size(); ++i) acc = max2(acc, xs[i], bound);
        return acc;
    }

    Node local_gadget(std::span<const Node> a, std::span<const Node> b) {
        bool all_known = true;
        for (const auto& n : a) all_known = all_known && n.known;
        for (const auto& n : b) all_known = all_known && n.known;
        if (all_known) {
            std::vector<Value> va(a.size()), vb(b.size());
            for (std::size_t j = 0; j < a.size(); ++j) va[j] = static_cast<Value>(a[j].value);
            for (std::size_t j = 0; j < b.size(); ++j) vb[j] = static_cast<Value>(b[j].value);
            return known_const(local_distance(va, vb, policy_.distance.local));
        }
        switch (policy_.distance.local) {
            case LocalMetric::manhattan: {
                Node acc = abs_diff(a[0], b[0]);
                for (std::size_t j = 1; j < a.size(); ++j) acc = add(acc, abs_diff(a[j], b[j]));
                return acc;
            }
            case LocalMetric::squared_euclidean: {
                Node acc = zkmp_square(sub(a[0], b[0]));
                for (std::size_t j = 1; j < a.size(); ++j)
                    acc = add(acc, zkmp_square(sub(a[j], b[j])));
                return acc;
            }
            case LocalMetric::chebyshev: {
                std::vector<Node> s;
                s.reserve(a.size());
                for (std::size_t j = 0; j < a.size(); ++j) s.push_back(abs_diff(a[j], b[j]));
                return max_tree(s, bounds_.coordinate);
            }
        }
        throw std::logic_error("unreachable");
    }

    Node series_gadget(const std::vector<std::vector<Node>>& x,
                       const std::vector<std::vector<Node>>& y,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
        std::vector<Node> edges;
        edges.reserve(pairs.size());
        const bool twed = policy_.distance.series == SeriesMetric::twed;
        for (std::size_t l = 0; l < pairs.size(); ++l) {
            const auto [i, j] = pairs[l];
            if (!twed || l == 0) {
                edges.push_back(local_gadget(x[i - 1], y[j - 1]));
                continue;
            }
            const auto [pi, pj] = pairs[l - 1];
            Node lambda_node = known_const(policy_.distance.lambda);
            if (pi + 1 == i && pj + 1 == j) {
                edges.push_back(
                    add(local_gadget(x[i - 1], y[j - 1]), local_gadget(x[i - 2], y[j - 2])));
            } else if (pi + 1 == i) {
                edges.push_back(add(lambda_node, local_gadget(x[i - 1], x[i - 2])));
            } else {
                edges.push_back(add(lambda_node, local_gadget(y[j - 1], y[j - 2])));
            }
        }
        if (policy_.distance.series == SeriesMetric::frechet)
            return max_tree(edges, bounds_.local);
        Node acc = edges.front();
        for (std::size_t l = 1; l < edges.size(); ++l) acc = add(acc, edges[l]);
        return acc;
    }

    bool consumed_everything() const {
        return node_pos_ == in_->node_commitments.size() &&
               bit_pos_ == in_->branch_bits.size() &&
               zero_pos_ == in_->zero_openings.size() && zkmp_pos_ == in_->zkmps.size();
    }

private:
    const CommitParams& params_;
    Transcript& tr_;
    bool proving_;
    AuthProofBundle* out_;
    const AuthProofBundle* in_;
    const AuthPolicy& policy_;
    const Bounds& bounds_;
    ScalarRng* rng_;
    std::size_t node_pos_ = 0, bit_pos_ = 0, zero_pos_ = 0, zkmp_pos_ = 0;
};

void validate_policy(const AuthPolicy& policy, const Bounds& bounds) {
    if (policy.k < 1) throw std::invalid_argument("auth policy: k must be >= 1");
    if (policy.mode == AuthMode::nearest && policy.k != 1)
        throw std::invalid_argument("auth policy: nearest mode requires k = 1");
    if (policy.theta < 1) throw std::invalid_argument("auth policy: theta must be >= 1");
    if (policy.theta - 1 > bounds.threshold_cap)
        throw std::invalid_argument("auth policy: theta exceeds the derived threshold cap");
}

// Transcript header shared by prover and verifier: binds the fingerprint,
// the revealed index pairs, and every leaf commitment before any sub-proof
// draws a challenge.
void absorb_header(Transcript& tr, const AuthProofBundle& bundle, const AuthPolicy& policy,
                   const std::vector<std::vector<std::vector<Node>>>& base_leaves,
                   const std::vector<std::vector<Node>>& fresh_leaves) {
    tr.append("bundle.fingerprint", bundle.fingerprint);
    tr.append_u64("bundle.k", policy.k);
    tr.append_u64("bundle.mode", static_cast<std::uint64_t>(policy.mode));
    tr.append_u128("bundle.theta", static_cast<u128>(policy.theta));
    for (std::size_t s = 0; s < bundle.base_indices.size(); ++s) {
        tr.append_u64("bundle.base_index", bundle.base_indices[s]);
        tr.append_u64("bundle.pairs", bundle.coupling_pairs[s].size());
        for (auto [i, j] : bundle.coupling_pairs[s]) {
            tr.append_u64("bundle.pair.i", i);
            tr.append_u64("bundle.pair.j", j);
        }
    }
    for (const auto& series : base_leaves) {
        tr.append_u64("bundle.base_len", series.size());
        for (const auto& row : series)
            for (const auto& n : row) tr.append_point("circuit.base_leaf", n.c);
    }
    tr.append_u64("bundle.fresh_len", fresh_leaves.size());
    for (const auto& row : fresh_leaves)
        for (const auto& n : row) tr.append_point("circuit.fresh_leaf", n.c);
}

// Builds the full circuit over already-constructed leaves; shared between
// proving and verification so the topology and claim order match bit for bit.
void run_topology(Builder& b, const AuthPolicy& policy, const AuthProofBundle& bundle,
                  const std::vector<std::vector<std::vector<Node>>>& base_leaves,
                  const std::vector<std::vector<Node>>& fresh_leaves) {
    std::vector<Node> series_nodes;
    series_nodes.reserve(base_leaves.size());
    for (std::size_t s = 0; s < base_leaves.size(); ++s)
        series_nodes.push_back(
            b.series_gadget(base_leaves[s], fresh_leaves, bundle.coupling_pairs[s]));

    const i128 theta_minus_1 = policy.theta - 1;
    if (policy.mode == AuthMode::knn_max) {
        for (const auto& sn : series_nodes)
            b.claim_range(b.sub(b.known_const(theta_minus_1), sn), theta_minus_1);
    } else {
        Node acc = series_nodes.front();
        for (std::size_t s = 1; s < series_nodes.size(); ++s) acc = b.add(acc, series_nodes[s]);
        b.claim_range(b.sub(b.known_const(theta_minus_1), acc), theta_minus_1);
    }
}

}  // namespace

std::string auth_mode_name(AuthMode m) {
    switch (m) {
        case AuthMode::nearest: return "nearest";
        case AuthMode::knn_sum: return "knn_sum";
        case AuthMode::knn_max: return "knn_max";
    }
    return "?";
}

AuthMode auth_mode_from_name(const std::string& name) {
    if (name == "nearest") return AuthMode::nearest;
    if (name == "knn_sum") return AuthMode::knn_sum;
    if (name == "knn_max") return AuthMode::knn_max;
    throw std::invalid_argument("unknown auth mode: " + name);
}

Bounds derive_bounds(const DistanceConfig& cfg, std::size_t m, std::size_t t_max, std::size_t k) {
    Bounds b;
    const i128 K = cfg.K;
    b.coordinate = K;
    switch (cfg.local) {
        case LocalMetric::manhattan: b.local = static_cast<i128>(m) * K; break;
        case LocalMetric::squared_euclidean: b.local = static_cast<i128>(m) * K * K; break;
        case LocalMetric::chebyshev: b.local = K; break;
    }
    b.edge = b.local;
    if (cfg.series == SeriesMetric::twed)
        b.edge = std::max<i128>(2 * b.local, cfg.lambda + b.local);
    b.threshold_cap = 2 * static_cast<i128>(t_max) * static_cast<i128>(k) * b.edge;
    return b;
}

std::array<std::uint8_t, 32> policy_fingerprint(const AuthPolicy& policy, std::size_t m,
                                                const CommitParams& params) {
    Bounds bounds = derive_bounds(policy.distance, m, policy.t_max, policy.k);
    std::vector<std::uint8_t> buf;
    append_str(buf, "zkseries.policy.v1");
    append_str(buf, local_metric_name(policy.distance.local));
    append_str(buf, series_metric_name(policy.distance.series));
    append_str(buf, i128_to_string(policy.distance.lambda));
    append_str(buf, policy.distance.band ? i128_to_string(*policy.distance.band) : "none");
    append_str(buf, i128_to_string(policy.distance.K));
    append_str(buf, auth_mode_name(policy.mode));
    append_str(buf, std::to_string(policy.k));
    append_str(buf, i128_to_string(policy.theta));
    append_str(buf, std::to_string(policy.t_max));
    append_str(buf, std::to_string(policy.soundness_bits));
    append_str(buf, i128_to_string(bounds.coordinate));
    append_str(buf, i128_to_string(bounds.local));
    append_str(buf, i128_to_string(bounds.edge));
    append_str(buf, i128_to_string(bounds.threshold_cap));
    append_str(buf, std::to_string(m));
    append_str(buf, params.label);
    buf.insert(buf.end(), params.seed.begin(), params.seed.end());
    return sha256(buf);
}

CommittedSeries commit_series(const CommitParams& params, const TimeSeries& series,
                              ScalarRng& rng) {
    CommittedSeries cs;
    cs.values = series;
    cs.randomness.resize(series.length());
    cs.commitments.resize(series.length());
    for (std::size_t t = 0; t < series.length(); ++t) {
        cs.randomness[t].resize(series.m);
        cs.commitments[t].resize(series.m);
        for (std::size_t j = 0; j < series.m; ++j) {
            cs.randomness[t][j] = rng.next_scalar();
            cs.commitments[t][j] =
                commit(params, Scalar::from_i128(series.points[t][j]), cs.randomness[t][j]);
        }
    }
    return cs;
}

std::vector<SelectedPair> select_k_nearest(const std::vector<TimeSeries>& base,
                                           const TimeSeries& fresh, const DistanceConfig& cfg,
                                           std::size_t k) {
    if (base.empty()) throw std::invalid_argument("select_k_nearest: empty base set");
    if (k < 1 || k > base.size())
        throw std::invalid_argument("select_k_nearest: k must be in [1, n]");
    std::vector<SelectedPair> all;
    all.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        SeriesDistance sd = series_distance(base[i], fresh, cfg);
        all.push_back({i, sd.distance, std::move(sd.witness)});
    }
    std::stable_sort(all.begin(), all.end(), [](const SelectedPair& a, const SelectedPair& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.base_index < b.base_index;
    });
    all.resize(k);
    return all;
}

AuthProofBundle build_auth_proof(const CommitParams& params,
                                 const std::vector<CommittedSeries>& base,
                                 const TimeSeries& fresh, const AuthPolicy& policy,
                                 const PrimeCache& cache, ScalarRng& rng, AuthProveInfo* info) {
    if (base.empty()) throw std::invalid_argument("build_auth_proof: empty base set");
    for (const auto& cs : base) {
        if (cs.values.m != fresh.m)
            throw std::invalid_argument("build_auth_proof: dimension mismatch with base series");
    }
    Bounds bounds = derive_bounds(policy.distance, fresh.m, policy.t_max, policy.k);
    validate_policy(policy, bounds);

    std::vector<TimeSeries> base_values;
    base_values.reserve(base.size());
    for (const auto& cs : base) base_values.push_back(cs.values);
    std::vector<SelectedPair> selected = select_k_nearest(base_values, fresh, policy.distance, policy.k);

    Dist delta_star = 0;
    for (std::size_t s = 0; s < selected.size(); ++s) {
        delta_star = policy.mode == AuthMode::knn_max
                         ? std::max(delta_star, selected[s].distance)
                         : delta_star + selected[s].distance;
    }
    // Strict criterion; nothing is emitted on failure.
    if (delta_star >= policy.theta) throw AuthenticationFailed();

    if (info) {
        info->delta_star = delta_star;
        info->selected_distances.clear();
        for (const auto& s : selected) info->selected_distances.push_back(s.distance);
    }

    std::sort(selected.begin(), selected.end(),
              [](const SelectedPair& a, const SelectedPair& b) {
                  return a.base_index < b.base_index;
              });

    AuthProofBundle bundle;
    bundle.fingerprint = policy_fingerprint(policy, fresh.m, params);
    for (const auto& s : selected) {
        if (!validate_coupling(s.witness, base[s.base_index].values.length(), fresh.length(),
                               policy.distance.series, policy.distance.band))
            throw std::logic_error("build_auth_proof: series witness failed coupling validation");
        bundle.base_indices.push_back(s.base_index);
        bundle.coupling_pairs.push_back(s.witness.pairs);
    }

    // leaves
    std::vector<std::vector<std::vector<Node>>> base_leaves(selected.size());
    for (std::size_t s = 0; s < selected.size(); ++s) {
        const CommittedSeries& cs = base[selected[s].base_index];
        base_leaves[s].resize(cs.values.length());
        for (std::size_t t = 0; t < cs.values.length(); ++t) {
            base_leaves[s][t].resize(cs.values.m);
            for (std::size_t j = 0; j < cs.values.m; ++j) {
                Node& n = base_leaves[s][t][j];
                n.known = false;
                n.value = cs.values.points[t][j];
                n.r = cs.randomness[t][j];
                n.c = cs.commitments[t][j];
            }
        }
    }
    std::vector<std::vector<Node>> fresh_leaves(fresh.length());
    bundle.fresh_randomness.resize(fresh.length());
    for (std::size_t t = 0; t < fresh.length(); ++t) {
        fresh_leaves[t].resize(fresh.m);
        bundle.fresh_randomness[t].resize(fresh.m);
        for (std::size_t j = 0; j < fresh.m; ++j) {
            Node& n = fresh_leaves[t][j];
            n.known = true;
            n.value = fresh.points[t][j];
            n.r = rng.next_scalar();
            n.c = commit(params, Scalar::from_i128(n.value), n.r);
            bundle.fresh_randomness[t][j] = n.r;
        }
    }

    Transcript tr("zkseries.auth.v1");
    absorb_header(tr, bundle, policy, base_leaves, fresh_leaves);

    Builder b(params, tr, &bundle, nullptr, policy, bounds, &rng);
    run_topology(b, policy, bundle, base_leaves, fresh_leaves);

    bundle.range_proof = sharp_prove_batch(params, tr, b.claims, b.claim_wits,
                                           policy.soundness_bits, cache, rng);
    return bundle;
}

bool verify_auth_proof(const CommitParams& params,
                       const std::vector<std::vector<std::vector<Point>>>& board_commitments,
                       const TimeSeries& fresh_plain, const AuthProofBundle& bundle,
                       const AuthPolicy& policy, VerifyDiagnostics* diag) {
    auto reject = [&](const std::string& why) {
        if (diag) diag->first_failure = why;
        return false;
    };

    Bounds bounds = derive_bounds(policy.distance, fresh_plain.m, policy.t_max, policy.k);
    try {
        validate_policy(policy, bounds);
    } catch (const std::exception& e) {
        return reject(std::string("policy: ") + e.what());
    }

    if (bundle.version != 1) return reject("unsupported bundle version");
    if (bundle.fingerprint != policy_fingerprint(policy, fresh_plain.m, params))
        return reject("config fingerprint mismatch");
    if (bundle.base_indices.size() != policy.k || bundle.coupling_pairs.size() != policy.k)
        return reject("selected index count does not match k");
    for (std::size_t s = 0; s < bundle.base_indices.size(); ++s) {
        if (bundle.base_indices[s] >= board_commitments.size())
            return reject("selected index out of range");
        if (s > 0 && bundle.base_indices[s] <= bundle.base_indices[s - 1])
            return reject("selected indices not strictly ascending");
    }
    if (bundle.fresh_randomness.size() != fresh_plain.length())
        return reject("fresh randomness length mismatch");
    for (const auto& row : bundle.fresh_randomness)
        if (row.size() != fresh_plain.m) return reject("fresh randomness width mismatch");

    // coupling witnesses
    for (std::size_t s = 0; s < bundle.base_indices.size(); ++s) {
        const auto& grid = board_commitments[bundle.base_indices[s]];
        if (grid.empty()) return reject("board series empty");
        for (const auto& row : grid)
            if (row.size() != fresh_plain.m) return reject("board series dimension mismatch");
        CouplingWitness w;
        w.pairs = bundle.coupling_pairs[s];
        if (!validate_coupling(w, grid.size(), fresh_plain.length(), policy.distance.series,
                               policy.distance.band))
            return reject("invalid coupling witness");
    }

    // leaves from the board and from the shipped fresh-reading openings
    std::vector<std::vector<std::vector<Node>>> base_leaves(bundle.base_indices.size());
    for (std::size_t s = 0; s < bundle.base_indices.size(); ++s) {
        const auto& grid = board_commitments[bundle.base_indices[s]];
        base_leaves[s].resize(grid.size());
        for (std::size_t t = 0; t < grid.size(); ++t) {
            base_leaves[s][t].resize(fresh_plain.m);
            for (std::size_t j = 0; j < fresh_plain.m; ++j) {
                if (!grid[t][j].is_valid()) return reject("invalid board commitment");
                base_leaves[s][t][j].known = false;
                base_leaves[s][t][j].c = grid[t][j];
            }
        }
    }
    std::vector<std::vector<Node>> fresh_leaves(fresh_plain.length());
    for (std::size_t t = 0; t < fresh_plain.length(); ++t) {
        fresh_leaves[t].resize(fresh_plain.m);
        for (std::size_t j = 0; j < fresh_plain.m; ++j) {
            Node& n = fresh_leaves[t][j];
            n.known = true;
            n.value = fresh_plain.points[t][j];
            n.r = bundle.fresh_randomness[t][j];
            n.c = commit(params, Scalar::from_i128(n.value), n.r);
        }
    }

    Transcript tr("zkseries.auth.v1");
    absorb_header(tr, bundle, policy, base_leaves, fresh_leaves);

    Builder b(params, tr, nullptr, &bundle, policy, bounds, nullptr);
    try {
        run_topology(b, policy, bundle, base_leaves, fresh_leaves);
    } catch (const std::exception& e) {
        return reject(std::string("circuit: ") + e.what());
    }
    if (!b.ok) return reject(b.first_failure);
    if (!b.consumed_everything()) return reject("bundle carries trailing proof material");

    if (!sharp_verify_batch(params, tr, b.claims, bundle.range_proof))
        return reject("batched range proof rejected");
    return true;
}

}  // namespace zkseries
