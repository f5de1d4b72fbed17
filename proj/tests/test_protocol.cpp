#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "zkseries/protocol.hpp"

using namespace zkseries;
namespace fs = std::filesystem;

namespace {

const PrimeCache& cache() {
    static PrimeCache c = PrimeCache::build(1'000'000);
    return c;
}

const CommitParams& params() {
    static CommitParams p = setup_params(kDefaultParamsSeed);
    return p;
}

ProtocolConfig test_config() {
    ProtocolConfig cfg;
    cfg.distance.local = LocalMetric::manhattan;
    cfg.distance.series = SeriesMetric::dtw;
    cfg.distance.lambda = 3;
    cfg.distance.K = 1000;
    cfg.mode = AuthMode::knn_sum;
    cfg.smooth_step = 1;
    cfg.smooth_window = 1;
    return cfg;
}

// raw float readings around a template
std::vector<std::vector<std::vector<double>>> raw_readings(std::mt19937_64& rng, int n, int t,
                                                           int m, double center,
                                                           double jitter) {
    std::vector<std::vector<std::vector<double>>> out;
    for (int r = 0; r < n; ++r) {
        std::vector<std::vector<double>> reading(t, std::vector<double>(m));
        for (auto& row : reading)
            for (auto& v : row)
                v = center + jitter * (static_cast<double>(rng() % 1000) / 1000.0 - 0.5);
        out.push_back(std::move(reading));
    }
    return out;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("zks_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("board chain verifies and localizes tampering") {
    ProtocolConfig cfg = test_config();
    Board board = Board::create(params(), cfg);
    ScalarRng rng;
    std::mt19937_64 data(1);

    for (int u = 0; u < 3; ++u) {
        register_user(params(), cfg, board, "user" + std::to_string(u),
                      raw_readings(data, 2, 4, 2, 10.0 * (u + 1), 3.0), nullptr, rng);
    }
    CHECK(board.verify_chain());
    CHECK(board.entries().size() == 4);  // genesis + 3

    SUBCASE("flipped commitment byte breaks the chain at its entry") {
        Board tampered = board;
        auto& e = const_cast<BoardEntry&>(tampered.entries()[2]);
        e.commitments[0].bytes[5] ^= 1;
        std::uint64_t bad = 0;
        CHECK_FALSE(tampered.verify_chain(&bad));
        CHECK(bad == 2);
    }
    SUBCASE("reordered entries break the chain") {
        Board tampered = board;
        auto& entries = const_cast<std::vector<BoardEntry>&>(tampered.entries());
        std::swap(entries[1], entries[2]);
        CHECK_FALSE(tampered.verify_chain());
    }
    SUBCASE("append-only: re-registration adds an entry, old ones remain") {
        Board extended = board;
        register_user(params(), cfg, extended, "user0", raw_readings(data, 1, 4, 2, 10.0, 3.0),
                      nullptr, rng);
        CHECK(extended.entries().size() == 5);
        CHECK(extended.verify_chain());
        CHECK(*extended.latest_entry_for("user0") == 4);
        CHECK(extended.entries()[1].user == "user0");
    }
}

TEST_CASE("stale boards cannot clobber an advanced chain") {
    TempDir dir;
    ProtocolConfig cfg = test_config();
    ScalarRng rng;
    std::mt19937_64 data(9);

    Board original = Board::create(params(), cfg);
    register_user(params(), cfg, original, "alice", raw_readings(data, 1, 3, 1, 5.0, 1.0),
                  nullptr, rng);
    original.save_checked(dir.file("board.json"));

    // two clients load the same state and both append
    Board first = Board::load(dir.file("board.json"));
    Board second = Board::load(dir.file("board.json"));
    register_user(params(), cfg, first, "bob", raw_readings(data, 1, 3, 1, 6.0, 1.0), nullptr,
                  rng);
    register_user(params(), cfg, second, "carol", raw_readings(data, 1, 3, 1, 7.0, 1.0), nullptr,
                  rng);
    first.save_checked(dir.file("board.json"));
    CHECK_THROWS_AS(second.save_checked(dir.file("board.json")), BoardConflict);

    // after reloading, the retry succeeds
    Board retry = Board::load(dir.file("board.json"));
    register_user(params(), cfg, retry, "carol", raw_readings(data, 1, 3, 1, 7.0, 1.0), nullptr,
                  rng);
    retry.save_checked(dir.file("board.json"));
    CHECK(Board::load(dir.file("board.json")).verify_chain());
}

TEST_CASE("registration commitment count is n * T * m") {
    ProtocolConfig cfg = test_config();
    Board board = Board::create(params(), cfg);
    ScalarRng rng;
    std::mt19937_64 data(2);
    auto record = register_user(params(), cfg, board, "alice",
                                raw_readings(data, 10, 50, 3, 5.0, 2.0), nullptr, rng);
    const BoardEntry& entry = board.entries()[record.board_seq];
    CHECK(entry.commitments.size() == 10 * 50 * 3);
    CHECK(record_matches_entry(params(), record, entry));

    SUBCASE("tampered plaintext fails the recompute check") {
        RegistrationRecord bad = record;
        bad.series[0].values.points[0][0] += 1;
        CHECK_FALSE(record_matches_entry(params(), bad, entry));
    }
}

TEST_CASE("board, record and bundle files round-trip byte-exactly") {
    TempDir dir;
    ProtocolConfig cfg = test_config();
    Board board = Board::create(params(), cfg);
    ScalarRng rng;
    std::mt19937_64 data(3);
    auto record = register_user(params(), cfg, board, "alice",
                                raw_readings(data, 3, 5, 2, 5.0, 2.0), nullptr, rng);

    auto fresh = raw_readings(data, 1, 5, 2, 5.0, 2.0)[0];
    auto result = prove_authentication(params(), cfg, record, fresh, 1'000'000, 2, cache(), rng);
    REQUIRE(result.status == ProveStatus::ok);

    // board
    board.save(dir.file("board.json"));
    Board loaded_board = Board::load(dir.file("board.json"));
    loaded_board.save(dir.file("board2.json"));
    std::ifstream b1(dir.file("board.json")), b2(dir.file("board2.json"));
    std::string s1((std::istreambuf_iterator<char>(b1)), {});
    std::string s2((std::istreambuf_iterator<char>(b2)), {});
    CHECK(s1 == s2);
    CHECK(loaded_board.verify_chain());

    // record
    save_record(record, dir.file("record.json"));
    RegistrationRecord loaded_record = load_record(dir.file("record.json"), params());
    CHECK(record_matches_entry(params(), loaded_record,
                               loaded_board.entries()[record.board_seq]));

    // proving from the reloaded record must work end to end
    auto reloaded_result =
        prove_authentication(params(), cfg, loaded_record, fresh, 1'000'000, 2, cache(), rng);
    REQUIRE(reloaded_result.status == ProveStatus::ok);
    CHECK(verify_authentication(params(), cfg, loaded_board, *reloaded_result.envelope, fresh,
                                1'000'000, 2)
              .accepted);

    // bundle
    std::string json1 = envelope_to_json(*result.envelope);
    BundleEnvelope env = envelope_from_json(json1);
    std::string json2 = envelope_to_json(env);
    CHECK(json1 == json2);
    CHECK(envelope_digest(env) == envelope_digest(*result.envelope));

    // and the loaded artifacts still verify end to end
    auto outcome = verify_authentication(params(), cfg, loaded_board, env, fresh, 1'000'000, 2);
    CHECK(outcome.accepted);
}

TEST_CASE("honest session accepts; tampered inputs are rejected with a named check") {
    ProtocolConfig cfg = test_config();
    Board board = Board::create(params(), cfg);
    ScalarRng rng;
    std::mt19937_64 data(4);
    auto record = register_user(params(), cfg, board, "alice",
                                raw_readings(data, 4, 6, 2, 8.0, 2.0), nullptr, rng);
    auto fresh = raw_readings(data, 1, 6, 2, 8.0, 2.0)[0];
    auto result = prove_authentication(params(), cfg, record, fresh, 2'000'000, 2, cache(), rng);
    REQUIRE(result.status == ProveStatus::ok);
    const BundleEnvelope& env = *result.envelope;

    CHECK(verify_authentication(params(), cfg, board, env, fresh, 2'000'000, 2).accepted);

    SUBCASE("different fresh reading file") {
        auto other = raw_readings(data, 1, 6, 2, 8.0, 2.0)[0];
        auto out = verify_authentication(params(), cfg, board, env, other, 2'000'000, 2);
        CHECK_FALSE(out.accepted);
        CHECK_FALSE(out.first_failure.empty());
    }
    SUBCASE("board truncated") {
        Board truncated = Board::create(params(), cfg);
        auto out = verify_authentication(params(), cfg, truncated, env, fresh, 2'000'000, 2);
        CHECK_FALSE(out.accepted);
    }
    SUBCASE("board chain tampered") {
        Board tampered = board;
        auto& e = const_cast<BoardEntry&>(tampered.entries()[1]);
        e.commitments[3].bytes[0] ^= 4;
        auto out = verify_authentication(params(), cfg, tampered, env, fresh, 2'000'000, 2);
        CHECK_FALSE(out.accepted);
        CHECK(out.first_failure.find("chain") != std::string::npos);
    }
    SUBCASE("verifier demands a lower theta") {
        auto out = verify_authentication(params(), cfg, board, env, fresh, 10, 2);
        CHECK_FALSE(out.accepted);
    }
    SUBCASE("config mismatch is caught by the genesis pin") {
        ProtocolConfig other_cfg = cfg;
        other_cfg.distance.series = SeriesMetric::frechet;
        auto out = verify_authentication(params(), other_cfg, board, env, fresh, 2'000'000, 2);
        CHECK_FALSE(out.accepted);
        CHECK(out.first_failure.find("genesis") != std::string::npos);
    }
    SUBCASE("deleting a board commitment causes rejection") {
        Board shorter = Board::create(params(), cfg);
        BoardEntry copy = board.entries()[1];
        copy.commitments.pop_back();
        copy.shapes.clear();  // shapes no longer match; grid reshape must fail
        shorter.append(copy);
        auto out = verify_authentication(params(), cfg, shorter, env, fresh, 2'000'000, 2);
        CHECK_FALSE(out.accepted);
    }
}

TEST_CASE("failed attempts emit only the failure status") {
    ProtocolConfig cfg = test_config();
    Board board = Board::create(params(), cfg);
    ScalarRng rng;
    std::mt19937_64 data(5);
    auto record = register_user(params(), cfg, board, "alice",
                                raw_readings(data, 3, 5, 2, 5.0, 1.0), nullptr, rng);

    for (int attempt = 0; attempt < 20; ++attempt) {
        // adaptively chosen far-away readings
        auto fresh = raw_readings(data, 1, 5, 2, 5.0 + attempt, 1.0)[0];
        auto result = prove_authentication(params(), cfg, record, fresh, 2, 1, cache(), rng);
        CHECK(result.status == ProveStatus::auth_failed);
        CHECK_FALSE(result.envelope.has_value());
        CHECK(result.info.delta_star == 0);
        CHECK(result.info.selected_distances.empty());
    }
}

TEST_CASE("malformed bundle text is rejected at parse time, not later") {
    CHECK_THROWS(envelope_from_json("{"));
    CHECK_THROWS(envelope_from_json("{\"format\": \"other\"}"));
    // valid JSON, wrong hex width
    CHECK_THROWS(envelope_from_json(
        "{\"format\": \"zkseries.bundle.v1\", \"version\": 1, \"user\": \"a\","
        "\"board_seq\": 1, \"fingerprint\": \"abcd\", \"base_indices\": [],"
        "\"coupling_pairs\": [], \"fresh_randomness\": [], \"node_commitments\": [],"
        "\"branch_bits\": [], \"zero_openings\": [], \"zkmps\": [],"
        "\"range_proof\": {}}"));
}

TEST_CASE("missing record or board files raise configuration errors") {
    TempDir dir;
    CHECK_THROWS(load_record(dir.file("does_not_exist.json"), params()));
    CHECK_THROWS(Board::load(dir.file("missing_board.json")));
    CHECK_THROWS(load_envelope(dir.file("missing_bundle.json")));
}

TEST_CASE("reading ingestion: csv and json") {
    TempDir dir;
    {
        std::ofstream csv(dir.file("r.csv"));
        csv << "1.5,2.0\n3.25,-1.0\n";
    }
    auto rows = read_raw_reading(dir.file("r.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<double>{1.5, 2.0});
    CHECK(rows[1] == std::vector<double>{3.25, -1.0});

    {
        std::ofstream js(dir.file("r.json"));
        js << "[[1.5, 2.0], [3.25, -1.0]]";
    }
    CHECK(read_raw_reading(dir.file("r.json")) == rows);
}

TEST_CASE("config file round trip") {
    TempDir dir;
    ProtocolConfig cfg = test_config();
    cfg.distance.band = 4;
    cfg.smooth_step = 2;
    cfg.smooth_window = 3;
    save_config(cfg, dir.file("cfg.json"));
    ProtocolConfig loaded = load_config(dir.file("cfg.json"));
    CHECK(config_hash(loaded) == config_hash(cfg));
    CHECK(loaded.distance.band == cfg.distance.band);
    CHECK(loaded.smooth_step == 2);
}

TEST_CASE("prepare_reading normalizes with the registration min/max then smooths") {
    ProtocolConfig cfg = test_config();
    cfg.distance.K = 10;
    cfg.smooth_step = 2;
    cfg.smooth_window = 2;
    std::vector<std::vector<double>> raw = {{0.0}, {1.0}, {1.0}, {0.5}};
    auto ts = prepare_reading(raw, {{0.0, 1.0}}, cfg);
    REQUIRE(ts.length() == 2);
    CHECK(ts.points[0][0] == 5);   // mean(0, 10) = 5
    CHECK(ts.points[1][0] == 8);   // mean(10, 5) = 7.5 -> 8
}
