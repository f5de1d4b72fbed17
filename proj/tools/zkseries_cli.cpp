// Command-line front end: registration, proving, verification, evaluation and
// benchmarks over files. Exit codes: 0 success/accept, 1 reject or failed
// authentication, 2 usage and I/O errors.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "zkseries/evalbench.hpp"
#include "zkseries/protocol.hpp"

namespace fs = std::filesystem;
using namespace zkseries;

namespace {

PrimeCache load_or_build_cache(const ProtocolConfig& cfg) {
    if (!cfg.cache_path.empty() && fs::exists(cfg.cache_path))
        return PrimeCache::load_csv(cfg.cache_path);
    PrimeCache cache = PrimeCache::build(cfg.cache_limit);
    if (!cfg.cache_path.empty()) cache.save_csv(cfg.cache_path);
    return cache;
}

ScalarRng make_rng(const std::string& seed_hex) {
    if (seed_hex.empty()) return ScalarRng();
    auto seed = from_hex(seed_hex);
    return ScalarRng(std::span<const std::uint8_t>(seed.data(), seed.size()));
}

std::vector<std::string> sorted_reading_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto name = e.path().filename().string();
        if (name == "minmax.json") continue;
        files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no reading files in " + dir);
    return files;
}

std::optional<std::vector<std::pair<double, double>>> load_minmax_sidecar(
    const std::string& dir) {
    fs::path p = fs::path(dir) / "minmax.json";
    if (!fs::exists(p)) return std::nullopt;
    auto rows = read_raw_reading(p.string());  // array of [min, max] pairs
    std::vector<std::pair<double, double>> mm;
    for (const auto& r : rows) {
        if (r.size() != 2) throw std::runtime_error("minmax.json rows must be [min, max]");
        mm.emplace_back(r[0], r[1]);
    }
    return mm;
}

int cmd_register(const std::string& user, const std::string& readings_dir,
                 const std::string& board_path, const std::string& config_path,
                 const std::string& record_path, const std::string& seed_hex) {
    ProtocolConfig cfg = load_config(config_path);
    CommitParams params = setup_params(kDefaultParamsSeed);
    ScalarRng rng = make_rng(seed_hex);

    std::vector<std::vector<std::vector<double>>> readings;
    for (const auto& f : sorted_reading_files(readings_dir))
        readings.push_back(read_raw_reading(f));
    auto sidecar = load_minmax_sidecar(readings_dir);

    Board board = fs::exists(board_path) ? Board::load(board_path) : Board::create(params, cfg);
    if (!board.verify_chain()) {
        std::cerr << "error: existing board fails chain verification\n";
        return 2;
    }
    RegistrationRecord record = register_user(params, cfg, board, user, readings,
                                              sidecar ? &*sidecar : nullptr, rng);
    board.save_checked(board_path);
    save_record(record, record_path);
    std::cout << "registered " << user << ": " << readings.size() << " base readings, "
              << board.entries()[record.board_seq].commitments.size()
              << " commitments at board seq " << record.board_seq << "\n";
    return 0;
}

int cmd_prove(const std::string& record_path, const std::string& fresh_path,
              const std::string& config_path, const std::string& theta_str, std::size_t k,
              const std::string& out_path, const std::string& seed_hex) {
    ProtocolConfig cfg = load_config(config_path);
    CommitParams params = setup_params(kDefaultParamsSeed);
    ScalarRng rng = make_rng(seed_hex);
    PrimeCache cache = load_or_build_cache(cfg);

    RegistrationRecord record = load_record(record_path, params);
    auto fresh = read_raw_reading(fresh_path);
    i128 theta = i128_from_string(theta_str);

    ProveResult result = prove_authentication(params, cfg, record, fresh, theta, k, cache, rng);
    if (result.status == ProveStatus::auth_failed) {
        // the one and only output for a failed attempt
        std::cout << "authentication failed\n";
        return 1;
    }
    save_envelope(*result.envelope, out_path);
    std::cout << "proof bundle written to " << out_path << "\n";
    return 0;
}

int cmd_verify(const std::string& board_path, const std::string& bundle_path,
               const std::string& fresh_path, const std::string& config_path,
               const std::string& theta_str, std::size_t k) {
    ProtocolConfig cfg = load_config(config_path);
    CommitParams params = setup_params(kDefaultParamsSeed);

    Board board = Board::load(board_path);
    BundleEnvelope env = load_envelope(bundle_path);
    auto fresh = read_raw_reading(fresh_path);
    i128 theta = i128_from_string(theta_str);
    if (k == 0) k = env.bundle.base_indices.size();  // cross-checked by the fingerprint

    VerifyOutcome outcome = verify_authentication(params, cfg, board, env, fresh, theta, k);
    if (outcome.accepted) {
        std::cout << "accept\n";
        return 0;
    }
    std::cout << "reject: " << outcome.first_failure << "\n";
    return 1;
}

int cmd_eval(const std::string& data_dir, const std::string& config_path, std::size_t q,
             std::size_t k, const std::string& out_path) {
    ProtocolConfig cfg = load_config(config_path);
    EvalDataset data;
    std::vector<fs::path> user_dirs;
    for (const auto& e : fs::directory_iterator(data_dir))
        if (e.is_directory()) user_dirs.push_back(e.path());
    std::sort(user_dirs.begin(), user_dirs.end());
    if (user_dirs.empty()) {
        std::cerr << "error: no user directories under " << data_dir << "\n";
        return 2;
    }
    std::vector<std::vector<std::vector<double>>> corpus;
    std::vector<std::vector<std::vector<std::vector<double>>>> per_user_raw;
    for (const auto& ud : user_dirs) {
        std::vector<std::vector<std::vector<double>>> readings;
        for (const auto& f : sorted_reading_files(ud.string())) {
            readings.push_back(read_raw_reading(f));
            corpus.push_back(readings.back());
        }
        per_user_raw.push_back(std::move(readings));
        data.users.push_back(ud.filename().string());
    }
    auto mm = compute_min_max(corpus);
    for (auto& readings : per_user_raw) {
        std::vector<TimeSeries> prepared;
        for (auto& r : readings) prepared.push_back(prepare_reading(r, mm, cfg));
        data.readings.push_back(std::move(prepared));
    }

    EvalReport report = evaluate_metrics(data, cfg.distance, cfg.mode, k, q);
    std::string json = report_to_json(report);
    std::ofstream out(out_path);
    out << json;
    std::cout << json;
    return 0;
}

int cmd_bench(const std::string& sizes_str, std::size_t m, const std::string& config_path,
              const std::string& out_path) {
    ProtocolConfig cfg = load_config(config_path);
    PrimeCache cache = load_or_build_cache(cfg);
    std::vector<std::size_t> sizes;
    std::stringstream ss(sizes_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoul(tok));
    auto rows = run_benchmarks(sizes, m, cfg.distance, cfg.soundness_bits, cache);
    std::string csv = bench_to_csv(rows);
    std::ofstream out(out_path);
    out << csv;
    std::cout << csv;
    return 0;
}

int cmd_synth(const std::string& out_dir, std::size_t users, std::size_t n, std::size_t T,
              std::size_t m, std::int64_t intra, std::int64_t inter, std::uint64_t seed) {
    EvalDataset data = generate_synthetic_dataset(users, n, T, m, intra, inter, seed);
    for (std::size_t u = 0; u < users; ++u) {
        fs::path dir = fs::path(out_dir) / data.users[u];
        fs::create_directories(dir);
        for (std::size_t r = 0; r < n; ++r) {
            char name[32];
            std::snprintf(name, sizeof(name), "reading%03zu.csv", r);
            std::ofstream out(dir / name);
            for (const auto& row : data.readings[u][r].points) {
                for (std::size_t j = 0; j < row.size(); ++j)
                    out << row[j] << (j + 1 < row.size() ? "," : "");
                out << "\n";
            }
        }
    }
    std::cout << "wrote " << users << " users x " << n << " readings to " << out_dir << "\n";
    return 0;
}

int cmd_cache(std::int64_t limit, const std::string& out_path) {
    PrimeCache cache = PrimeCache::build(limit);
    cache.save_csv(out_path);
    std::cout << "prime cache with " << cache.entries.size() << " entries written to "
              << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zk-series: privacy-preserving time-series authentication"};
    app.require_subcommand(1);

    std::string user, readings_dir, board_path, config_path, record_path, fresh_path,
        bundle_path, out_path, theta_str, seed_hex, data_dir;
    std::string sizes_str = "50,100,150,200,250,300";
    std::size_t k = 1, q = 1, m = 3, users = 5, n = 8, T = 20, synth_m = 2, verify_k = 0;
    std::int64_t intra = 5, inter = 100, limit = 1'000'000;
    std::uint64_t seed = 1;

    auto* reg = app.add_subcommand("register", "commit base readings to the bulletin board");
    reg->add_option("--user", user)->required();
    reg->add_option("--readings", readings_dir, "directory of CSV/JSON readings")->required();
    reg->add_option("--board", board_path)->required();
    reg->add_option("--config", config_path)->required();
    reg->add_option("--out", record_path, "registration record output")->required();
    reg->add_option("--seed", seed_hex, "hex seed for deterministic randomness");

    auto* prv = app.add_subcommand("prove", "generate an authentication proof bundle");
    prv->add_option("--record", record_path)->required();
    prv->add_option("--fresh", fresh_path)->required();
    prv->add_option("--config", config_path)->required();
    prv->add_option("--theta", theta_str)->required();
    prv->add_option("--k", k)->required();
    prv->add_option("--out", bundle_path)->required();
    prv->add_option("--seed", seed_hex);

    auto* vfy = app.add_subcommand("verify", "verify a proof bundle against the board");
    vfy->add_option("--board", board_path)->required();
    vfy->add_option("--bundle", bundle_path)->required();
    vfy->add_option("--fresh", fresh_path)->required();
    vfy->add_option("--config", config_path)->required();
    vfy->add_option("--theta", theta_str)->required();
    vfy->add_option("--k", verify_k, "expected k (defaults to the bundle's)");

    auto* evl = app.add_subcommand("eval", "threshold calibration and accuracy metrics");
    evl->add_option("--data", data_dir, "directory with one subdirectory per user")->required();
    evl->add_option("--config", config_path)->required();
    evl->add_option("--q", q)->required();
    evl->add_option("--k", k)->required();
    evl->add_option("--out", out_path)->required();

    auto* bch = app.add_subcommand("bench", "distance and range-proof timing table");
    bch->add_option("--sizes", sizes_str, "comma-separated series lengths");
    bch->add_option("--m", m);
    bch->add_option("--config", config_path)->required();
    bch->add_option("--out", out_path)->required();

    auto* syn = app.add_subcommand("synth", "write a synthetic dataset directory");
    syn->add_option("--out", out_path)->required();
    syn->add_option("--users", users);
    syn->add_option("--n", n);
    syn->add_option("--T", T);
    syn->add_option("--m", synth_m);
    syn->add_option("--intra", intra);
    syn->add_option("--inter", inter);
    syn->add_option("--seed", seed);

    auto* cch = app.add_subcommand("cache", "precompute the two-square prime cache CSV");
    cch->add_option("--limit", limit);
    cch->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (reg->parsed())
            return cmd_register(user, readings_dir, board_path, config_path, record_path,
                                seed_hex);
        if (prv->parsed())
            return cmd_prove(record_path, fresh_path, config_path, theta_str, k, bundle_path,
                             seed_hex);
        if (vfy->parsed())
            return cmd_verify(board_path, bundle_path, fresh_path, config_path, theta_str,
                              verify_k);
        if (evl->parsed()) return cmd_eval(data_dir, config_path, q, k, out_path);
        if (bch->parsed()) return cmd_bench(sizes_str, m, config_path, out_path);
        if (syn->parsed())
            return cmd_synth(out_path, users, n, T, synth_m, intra, inter, seed);
        if (cch->parsed()) return cmd_cache(limit, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
