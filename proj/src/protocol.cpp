#include "zkseries/protocol.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace zkseries {

namespace {

std::string point_hex(const Point& p) { return to_hex(p.bytes); }
std::string scalar_hex(const Scalar& s) { return to_hex(s.bytes); }

Point point_from_hex(const std::string& h) {
    auto raw = from_hex(h);
    if (raw.size() != 32) throw std::invalid_argument("point hex must be 32 bytes");
    Point p;
    std::copy(raw.begin(), raw.end(), p.bytes.begin());
    return p;
}

Scalar scalar_from_hex(const std::string& h) {
    auto raw = from_hex(h);
    if (raw.size() != 32) throw std::invalid_argument("scalar hex must be 32 bytes");
    Scalar s;
    std::copy(raw.begin(), raw.end(), s.bytes.begin());
    return s;
}

std::array<std::uint8_t, 32> hash32_from_hex(const std::string& h) {
    auto raw = from_hex(h);
    if (raw.size() != 32) throw std::invalid_argument("hash hex must be 32 bytes");
    std::array<std::uint8_t, 32> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

void append_u64_le(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_double_bits(std::vector<std::uint8_t>& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    append_u64_le(buf, bits);
}

void write_file_locked(const std::string& path, const std::string& content) {
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) throw std::runtime_error("cannot open for writing: " + path);
    if (::flock(fd, LOCK_EX) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot lock: " + path);
    }
    ssize_t n = ::write(fd, content.data(), content.size());
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (n < 0 || static_cast<std::size_t>(n) != content.size())
        throw std::runtime_error("short write: " + path);
}

std::string read_file(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw std::runtime_error("cannot open: " + path);
    if (::flock(fd, LOCK_SH) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot lock: " + path);
    }
    std::string out;
    char buf[1 << 16];
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (n < 0) throw std::runtime_error("read failed: " + path);
    return out;
}

ordered_json zkmp_to_json(const ZkmpProof& p) {
    return ordered_json{{"t_x", point_hex(p.t_x)},   {"t_y", point_hex(p.t_y)},
                        {"t_z", point_hex(p.t_z)},   {"z_x", scalar_hex(p.z_x)},
                        {"z_y", scalar_hex(p.z_y)},  {"s_x", scalar_hex(p.s_x)},
                        {"s_y", scalar_hex(p.s_y)},  {"s_z", scalar_hex(p.s_z)}};
}

ZkmpProof zkmp_from_json(const ordered_json& j) {
    ZkmpProof p;
    p.t_x = point_from_hex(j.at("t_x"));
    p.t_y = point_from_hex(j.at("t_y"));
    p.t_z = point_from_hex(j.at("t_z"));
    p.z_x = scalar_from_hex(j.at("z_x"));
    p.z_y = scalar_from_hex(j.at("z_y"));
    p.s_x = scalar_from_hex(j.at("s_x"));
    p.s_y = scalar_from_hex(j.at("s_y"));
    p.s_z = scalar_from_hex(j.at("s_z"));
    return p;
}

ordered_json sharp_to_json(const SharpBatchProof& p) {
    ordered_json y = ordered_json::array();
    for (const auto& ys : p.y_commitments)
        y.push_back({point_hex(ys[0]), point_hex(ys[1]), point_hex(ys[2])});
    ordered_json zx = ordered_json::array();
    for (const auto& z : p.z_x) zx.push_back(u128_to_string(z));
    ordered_json zy = ordered_json::array();
    for (const auto& z : p.z_y)
        zy.push_back({u128_to_string(z[0]), u128_to_string(z[1]), u128_to_string(z[2])});
    return ordered_json{{"R", p.soundness_bits},
                        {"y_commitments", y},
                        {"D", point_hex(p.mask_commitment)},
                        {"A1", point_hex(p.alpha1_commitment)},
                        {"A0", point_hex(p.alpha0_commitment)},
                        {"z_x", zx},
                        {"z_y", zy},
                        {"t_agg", scalar_hex(p.t_agg)},
                        {"tau", scalar_hex(p.tau)}};
}

SharpBatchProof sharp_from_json(const ordered_json& j) {
    SharpBatchProof p;
    p.soundness_bits = j.at("R").get<std::uint32_t>();
    for (const auto& ys : j.at("y_commitments")) {
        if (ys.size() != 3) throw std::invalid_argument("y_commitments row must have 3 entries");
        p.y_commitments.push_back({point_from_hex(ys[0]), point_from_hex(ys[1]),
                                   point_from_hex(ys[2])});
    }
    p.mask_commitment = point_from_hex(j.at("D"));
    p.alpha1_commitment = point_from_hex(j.at("A1"));
    p.alpha0_commitment = point_from_hex(j.at("A0"));
    for (const auto& z : j.at("z_x")) p.z_x.push_back(u128_from_string(z.get<std::string>()));
    for (const auto& z : j.at("z_y")) {
        if (z.size() != 3) throw std::invalid_argument("z_y row must have 3 entries");
        p.z_y.push_back({u128_from_string(z[0].get<std::string>()),
                         u128_from_string(z[1].get<std::string>()),
                         u128_from_string(z[2].get<std::string>())});
    }
    p.t_agg = scalar_from_hex(j.at("t_agg"));
    p.tau = scalar_from_hex(j.at("tau"));
    return p;
}

}  // namespace

ProtocolConfig load_config(const std::string& path) {
    auto j = ordered_json::parse(read_file(path));
    ProtocolConfig cfg;
    cfg.distance.local = local_metric_from_name(j.at("local").get<std::string>());
    cfg.distance.series = series_metric_from_name(j.at("series").get<std::string>());
    cfg.distance.lambda = j.value("lambda", std::int64_t(1'000'000));
    if (j.contains("band") && !j.at("band").is_null())
        cfg.distance.band = j.at("band").get<std::int64_t>();
    cfg.distance.K = j.value("K", std::int64_t(1'000'000));
    cfg.mode = auth_mode_from_name(j.value("auth_mode", std::string("knn_sum")));
    cfg.smooth_step = j.value("smooth_step", std::size_t(1));
    cfg.smooth_window = j.value("smooth_window", std::size_t(1));
    cfg.t_max = j.value("t_max", std::size_t(512));
    cfg.soundness_bits = j.value("soundness_bits", 40u);
    cfg.cache_limit = j.value("cache_limit", std::int64_t(1'000'000));
    cfg.cache_path = j.value("cache_path", std::string());
    return cfg;
}

void save_config(const ProtocolConfig& cfg, const std::string& path) {
    ordered_json j{{"local", local_metric_name(cfg.distance.local)},
                   {"series", series_metric_name(cfg.distance.series)},
                   {"lambda", cfg.distance.lambda},
                   {"band", cfg.distance.band ? ordered_json(*cfg.distance.band)
                                              : ordered_json(nullptr)},
                   {"K", cfg.distance.K},
                   {"auth_mode", auth_mode_name(cfg.mode)},
                   {"smooth_step", cfg.smooth_step},
                   {"smooth_window", cfg.smooth_window},
                   {"t_max", cfg.t_max},
                   {"soundness_bits", cfg.soundness_bits},
                   {"cache_limit", cfg.cache_limit},
                   {"cache_path", cfg.cache_path}};
    write_file_locked(path, j.dump(2) + "\n");
}

std::array<std::uint8_t, 32> config_hash(const ProtocolConfig& cfg) {
    std::string s = "zkseries.config.v1|" + local_metric_name(cfg.distance.local) + "|" +
                    series_metric_name(cfg.distance.series) + "|" +
                    std::to_string(cfg.distance.lambda) + "|" +
                    (cfg.distance.band ? std::to_string(*cfg.distance.band) : "none") + "|" +
                    std::to_string(cfg.distance.K) + "|" + auth_mode_name(cfg.mode) + "|" +
                    std::to_string(cfg.smooth_step) + "|" + std::to_string(cfg.smooth_window) +
                    "|" + std::to_string(cfg.t_max) + "|" + std::to_string(cfg.soundness_bits);
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

AuthPolicy make_policy(const ProtocolConfig& cfg, i128 theta, std::size_t k) {
    AuthPolicy p;
    p.distance = cfg.distance;
    p.mode = cfg.mode;
    p.k = k;
    p.theta = theta;
    p.t_max = cfg.t_max;
    p.soundness_bits = cfg.soundness_bits;
    return p;
}

std::array<std::uint8_t, 32> board_entry_digest(const BoardEntry& e) {
    std::vector<std::uint8_t> buf;
    append_u64_le(buf, e.seq);
    append_u64_le(buf, e.user.size());
    buf.insert(buf.end(), e.user.begin(), e.user.end());
    append_u64_le(buf, e.shapes.size());
    for (auto [t, m] : e.shapes) {
        append_u64_le(buf, t);
        append_u64_le(buf, m);
    }
    append_u64_le(buf, e.commitments.size());
    for (const auto& c : e.commitments) buf.insert(buf.end(), c.bytes.begin(), c.bytes.end());
    append_u64_le(buf, e.min_max.size());
    for (auto [mn, mx] : e.min_max) {
        append_double_bits(buf, mn);
        append_double_bits(buf, mx);
    }
    append_u64_le(buf, e.genesis_meta.size());
    buf.insert(buf.end(), e.genesis_meta.begin(), e.genesis_meta.end());
    buf.insert(buf.end(), e.prev_hash.begin(), e.prev_hash.end());
    return sha256(buf);
}

Board Board::create(const CommitParams& params, const ProtocolConfig& cfg) {
    Board b;
    BoardEntry genesis;
    genesis.seq = 0;
    genesis.genesis_meta =
        "seed=" + to_hex(params.seed) + ";config=" + to_hex(config_hash(cfg));
    genesis.hash = board_entry_digest(genesis);
    b.entries_.push_back(std::move(genesis));
    return b;
}

const BoardEntry& Board::append(BoardEntry entry) {
    entry.seq = entries_.size();
    entry.prev_hash = entries_.back().hash;
    entry.hash = board_entry_digest(entry);
    entries_.push_back(std::move(entry));
    return entries_.back();
}

bool Board::verify_chain(std::uint64_t* bad_seq) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const BoardEntry& e = entries_[i];
        bool ok = e.seq == i && board_entry_digest(e) == e.hash;
        if (ok && i == 0) {
            std::array<std::uint8_t, 32> zero{};
            ok = e.prev_hash == zero;
        }
        if (ok && i > 0) ok = e.prev_hash == entries_[i - 1].hash;
        if (!ok) {
            if (bad_seq) *bad_seq = i;
            return false;
        }
    }
    return !entries_.empty();
}

std::optional<std::size_t> Board::latest_entry_for(const std::string& user) const {
    for (std::size_t i = entries_.size(); i-- > 1;) {
        if (entries_[i].user == user) return i;
    }
    return std::nullopt;
}

std::vector<std::vector<std::vector<Point>>> Board::commitment_grids(const BoardEntry& e) {
    std::vector<std::vector<std::vector<Point>>> grids;
    std::size_t pos = 0;
    for (auto [t, m] : e.shapes) {
        std::vector<std::vector<Point>> grid(t, std::vector<Point>(m));
        for (std::uint32_t i = 0; i < t; ++i) {
            for (std::uint32_t j = 0; j < m; ++j) {
                if (pos >= e.commitments.size())
                    throw std::invalid_argument("board entry: commitment list shorter than shapes");
                grid[i][j] = e.commitments[pos++];
            }
        }
        grids.push_back(std::move(grid));
    }
    if (pos != e.commitments.size())
        throw std::invalid_argument("board entry: commitment list longer than shapes");
    return grids;
}

void Board::save(const std::string& path) const {
    ordered_json entries = ordered_json::array();
    for (const auto& e : entries_) {
        ordered_json shapes = ordered_json::array();
        for (auto [t, m] : e.shapes) shapes.push_back({t, m});
        ordered_json commitments = ordered_json::array();
        for (const auto& c : e.commitments) commitments.push_back(point_hex(c));
        ordered_json mm = ordered_json::array();
        for (auto [mn, mx] : e.min_max) mm.push_back({mn, mx});
        entries.push_back(ordered_json{{"seq", e.seq},
                                       {"user", e.user},
                                       {"shapes", shapes},
                                       {"commitments", commitments},
                                       {"min_max", mm},
                                       {"genesis_meta", e.genesis_meta},
                                       {"prev_hash", to_hex(e.prev_hash)},
                                       {"hash", to_hex(e.hash)}});
    }
    ordered_json doc{{"format", "zkseries.board.v1"}, {"entries", entries}};
    write_file_locked(path, doc.dump(2) + "\n");
}

void Board::save_checked(const std::string& path) const {
    if (fs::exists(path)) {
        Board current = Board::load(path);
        const auto& cur = current.entries();
        if (cur.size() > entries_.size())
            throw BoardConflict("board advanced to seq " + std::to_string(cur.size() - 1) +
                                " since it was loaded");
        for (std::size_t i = 0; i < cur.size(); ++i) {
            if (cur[i].hash != entries_[i].hash)
                throw BoardConflict("board diverged at seq " + std::to_string(i));
        }
    }
    save(path);
}

Board Board::load(const std::string& path) {
    auto doc = ordered_json::parse(read_file(path));
    if (doc.value("format", std::string()) != "zkseries.board.v1")
        throw std::invalid_argument("board file: unknown format");
    Board b;
    for (const auto& je : doc.at("entries")) {
        BoardEntry e;
        e.seq = je.at("seq").get<std::uint64_t>();
        e.user = je.at("user").get<std::string>();
        for (const auto& s : je.at("shapes"))
            e.shapes.emplace_back(s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>());
        for (const auto& c : je.at("commitments")) e.commitments.push_back(point_from_hex(c));
        for (const auto& mm : je.at("min_max"))
            e.min_max.emplace_back(mm.at(0).get<double>(), mm.at(1).get<double>());
        e.genesis_meta = je.at("genesis_meta").get<std::string>();
        e.prev_hash = hash32_from_hex(je.at("prev_hash"));
        e.hash = hash32_from_hex(je.at("hash"));
        b.entries_.push_back(std::move(e));
    }
    return b;
}

void save_record(const RegistrationRecord& record, const std::string& path) {
    ordered_json series = ordered_json::array();
    for (const auto& cs : record.series) {
        ordered_json values = ordered_json::array();
        ordered_json rand = ordered_json::array();
        for (std::size_t t = 0; t < cs.values.length(); ++t) {
            ordered_json vrow = ordered_json::array();
            ordered_json rrow = ordered_json::array();
            for (std::size_t j = 0; j < cs.values.m; ++j) {
                vrow.push_back(cs.values.points[t][j]);
                rrow.push_back(scalar_hex(cs.randomness[t][j]));
            }
            values.push_back(vrow);
            rand.push_back(rrow);
        }
        series.push_back(ordered_json{{"values", values}, {"randomness", rand}});
    }
    ordered_json mm = ordered_json::array();
    for (auto [mn, mx] : record.min_max) mm.push_back({mn, mx});
    ordered_json doc{{"format", "zkseries.record.v1"},
                     {"user", record.user},
                     {"board_seq", record.board_seq},
                     {"storage_note", "secret store; relies on device encryption at rest"},
                     {"min_max", mm},
                     {"series", series}};
    write_file_locked(path, doc.dump(2) + "\n");
}

RegistrationRecord load_record(const std::string& path, const CommitParams& params) {
    auto doc = ordered_json::parse(read_file(path));
    if (doc.value("format", std::string()) != "zkseries.record.v1")
        throw std::invalid_argument("record file: unknown format");
    RegistrationRecord record;
    record.user = doc.at("user").get<std::string>();
    record.board_seq = doc.at("board_seq").get<std::uint64_t>();
    for (const auto& mm : doc.at("min_max"))
        record.min_max.emplace_back(mm.at(0).get<double>(), mm.at(1).get<double>());
    for (const auto& js : doc.at("series")) {
        CommittedSeries cs;
        const auto& values = js.at("values");
        const auto& rand = js.at("randomness");
        if (values.size() != rand.size())
            throw std::invalid_argument("record: values/randomness length mismatch");
        cs.values.points.resize(values.size());
        cs.randomness.resize(values.size());
        cs.commitments.resize(values.size());
        for (std::size_t t = 0; t < values.size(); ++t) {
            for (const auto& v : values[t]) cs.values.points[t].push_back(v.get<Value>());
            for (const auto& r : rand[t]) cs.randomness[t].push_back(scalar_from_hex(r));
            if (cs.values.points[t].size() != cs.randomness[t].size())
                throw std::invalid_argument("record: ragged randomness row");
            for (std::size_t j = 0; j < cs.values.points[t].size(); ++j)
                cs.commitments[t].push_back(commit(
                    params, Scalar::from_i128(cs.values.points[t][j]), cs.randomness[t][j]));
        }
        cs.values.m = cs.values.points.empty() ? 0 : cs.values.points[0].size();
        record.series.push_back(std::move(cs));
    }
    return record;
}

bool record_matches_entry(const CommitParams& params, const RegistrationRecord& record,
                          const BoardEntry& entry) {
    std::size_t pos = 0;
    if (entry.shapes.size() != record.series.size()) return false;
    for (std::size_t s = 0; s < record.series.size(); ++s) {
        const CommittedSeries& cs = record.series[s];
        if (entry.shapes[s].first != cs.values.length() || entry.shapes[s].second != cs.values.m)
            return false;
        for (std::size_t t = 0; t < cs.values.length(); ++t) {
            for (std::size_t j = 0; j < cs.values.m; ++j) {
                if (pos >= entry.commitments.size()) return false;
                Point expect = commit(params, Scalar::from_i128(cs.values.points[t][j]),
                                      cs.randomness[t][j]);
                if (entry.commitments[pos++] != expect) return false;
            }
        }
    }
    return pos == entry.commitments.size();
}

std::vector<std::vector<double>> read_raw_reading(const std::string& path) {
    std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    // JSON array-of-arrays or CSV
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        auto j = ordered_json::parse(text);
        for (const auto& row : j) {
            std::vector<double> r;
            for (const auto& v : row) r.push_back(v.get<double>());
            rows.push_back(std::move(r));
        }
        return rows;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::pair<double, double>> compute_min_max(
    const std::vector<std::vector<std::vector<double>>>& corpus) {
    if (corpus.empty() || corpus[0].empty())
        throw std::invalid_argument("compute_min_max: empty corpus");
    const std::size_t m = corpus[0][0].size();
    std::vector<std::pair<double, double>> mm(
        m, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& reading : corpus) {
        for (const auto& row : reading) {
            if (row.size() != m) throw std::invalid_argument("compute_min_max: ragged corpus");
            for (std::size_t j = 0; j < m; ++j) {
                mm[j].first = std::min(mm[j].first, row[j]);
                mm[j].second = std::max(mm[j].second, row[j]);
            }
        }
    }
    return mm;
}

TimeSeries prepare_reading(const std::vector<std::vector<double>>& raw,
                           const std::vector<std::pair<double, double>>& min_max,
                           const ProtocolConfig& cfg) {
    TimeSeries normalized = normalize_series(raw, min_max, cfg.distance.K);
    if (cfg.smooth_step == 1 && cfg.smooth_window == 1) return normalized;
    return smooth_moving_average(normalized, cfg.smooth_step, cfg.smooth_window);
}

RegistrationRecord register_user(const CommitParams& params, const ProtocolConfig& cfg,
                                 Board& board, const std::string& user,
                                 const std::vector<std::vector<std::vector<double>>>& raw_readings,
                                 const std::vector<std::pair<double, double>>* sidecar_min_max,
                                 ScalarRng& rng) {
    if (raw_readings.empty()) throw std::invalid_argument("register_user: need >= 1 base reading");
    RegistrationRecord record;
    record.user = user;
    record.min_max = sidecar_min_max ? *sidecar_min_max : compute_min_max(raw_readings);

    BoardEntry entry;
    entry.user = user;
    entry.min_max = record.min_max;
    for (const auto& raw : raw_readings) {
        TimeSeries ts = prepare_reading(raw, record.min_max, cfg);
        CommittedSeries cs = commit_series(params, ts, rng);
        entry.shapes.emplace_back(static_cast<std::uint32_t>(ts.length()),
                                  static_cast<std::uint32_t>(ts.m));
        for (std::size_t t = 0; t < ts.length(); ++t)
            for (std::size_t j = 0; j < ts.m; ++j) entry.commitments.push_back(cs.commitments[t][j]);
        record.series.push_back(std::move(cs));
    }
    const BoardEntry& appended = board.append(std::move(entry));
    record.board_seq = appended.seq;
    return record;
}

ProveResult prove_authentication(const CommitParams& params, const ProtocolConfig& cfg,
                                 const RegistrationRecord& record,
                                 const std::vector<std::vector<double>>& fresh_raw, i128 theta,
                                 std::size_t k, const PrimeCache& cache, ScalarRng& rng) {
    TimeSeries fresh = prepare_reading(fresh_raw, record.min_max, cfg);
    AuthPolicy policy = make_policy(cfg, theta, k);
    ProveResult result;
    try {
        AuthProofBundle bundle = build_auth_proof(params, record.series, fresh, policy, cache,
                                                  rng, &result.info);
        result.status = ProveStatus::ok;
        result.envelope = BundleEnvelope{record.user, record.board_seq, std::move(bundle)};
    } catch (const AuthenticationFailed&) {
        result.status = ProveStatus::auth_failed;
        result.envelope.reset();
        result.info = AuthProveInfo{};
    }
    return result;
}

VerifyOutcome verify_authentication(const CommitParams& params, const ProtocolConfig& cfg,
                                    const Board& board, const BundleEnvelope& envelope,
                                    const std::vector<std::vector<double>>& fresh_raw, i128 theta,
                                    std::size_t k) {
    VerifyOutcome out;
    std::uint64_t bad_seq = 0;
    if (!board.verify_chain(&bad_seq)) {
        out.first_failure = "board chain broken at seq " + std::to_string(bad_seq);
        return out;
    }
    const std::string expect_meta =
        "seed=" + to_hex(params.seed) + ";config=" + to_hex(config_hash(cfg));
    if (board.entries().front().genesis_meta != expect_meta) {
        out.first_failure = "genesis entry does not pin these parameters";
        return out;
    }
    if (envelope.board_seq == 0 || envelope.board_seq >= board.entries().size()) {
        out.first_failure = "bundle references an unknown board entry";
        return out;
    }
    const BoardEntry& entry = board.entries()[envelope.board_seq];
    if (entry.user != envelope.user) {
        out.first_failure = "board entry user mismatch";
        return out;
    }

    std::vector<std::vector<std::vector<Point>>> grids;
    TimeSeries fresh;
    try {
        grids = Board::commitment_grids(entry);
        fresh = prepare_reading(fresh_raw, entry.min_max, cfg);
    } catch (const std::exception& e) {
        out.first_failure = e.what();
        return out;
    }

    AuthPolicy policy = make_policy(cfg, theta, k);
    VerifyDiagnostics diag;
    out.accepted = verify_auth_proof(params, grids, fresh, envelope.bundle, policy, &diag);
    if (!out.accepted) out.first_failure = diag.first_failure;
    return out;
}

std::string envelope_to_json(const BundleEnvelope& env) {
    const AuthProofBundle& b = env.bundle;
    ordered_json pairs = ordered_json::array();
    for (const auto& witness_pairs : b.coupling_pairs) {
        ordered_json seq = ordered_json::array();
        for (auto [i, j] : witness_pairs) seq.push_back({i, j});
        pairs.push_back(seq);
    }
    ordered_json fresh_rand = ordered_json::array();
    for (const auto& row : b.fresh_randomness) {
        ordered_json r = ordered_json::array();
        for (const auto& s : row) r.push_back(scalar_hex(s));
        fresh_rand.push_back(r);
    }
    ordered_json nodes = ordered_json::array();
    for (const auto& c : b.node_commitments) nodes.push_back(point_hex(c));
    ordered_json bits = ordered_json::array();
    for (auto bit : b.branch_bits) bits.push_back(static_cast<int>(bit));
    ordered_json zeros = ordered_json::array();
    for (const auto& z : b.zero_openings) zeros.push_back(scalar_hex(z));
    ordered_json zkmps = ordered_json::array();
    for (const auto& p : b.zkmps) zkmps.push_back(zkmp_to_json(p));

    ordered_json doc{{"format", "zkseries.bundle.v1"},
                     {"version", b.version},
                     {"user", env.user},
                     {"board_seq", env.board_seq},
                     {"fingerprint", to_hex(b.fingerprint)},
                     {"base_indices", b.base_indices},
                     {"coupling_pairs", pairs},
                     {"fresh_randomness", fresh_rand},
                     {"node_commitments", nodes},
                     {"branch_bits", bits},
                     {"zero_openings", zeros},
                     {"zkmps", zkmps},
                     {"range_proof", sharp_to_json(b.range_proof)}};
    return doc.dump(2) + "\n";
}

std::array<std::uint8_t, 32> envelope_digest(const BundleEnvelope& env) {
    std::string canonical = envelope_to_json(env);
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(canonical.data()), canonical.size()));
}

BundleEnvelope envelope_from_json(const std::string& text) {
    auto doc = ordered_json::parse(text);
    if (doc.value("format", std::string()) != "zkseries.bundle.v1")
        throw std::invalid_argument("bundle file: unknown format");
    BundleEnvelope env;
    env.user = doc.at("user").get<std::string>();
    env.board_seq = doc.at("board_seq").get<std::uint64_t>();
    AuthProofBundle& b = env.bundle;
    b.version = doc.at("version").get<std::uint32_t>();
    b.fingerprint = hash32_from_hex(doc.at("fingerprint"));
    for (const auto& i : doc.at("base_indices")) b.base_indices.push_back(i.get<std::size_t>());
    for (const auto& seq : doc.at("coupling_pairs")) {
        std::vector<std::pair<std::size_t, std::size_t>> witness_pairs;
        for (const auto& p : seq)
            witness_pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
        b.coupling_pairs.push_back(std::move(witness_pairs));
    }
    for (const auto& row : doc.at("fresh_randomness")) {
        std::vector<Scalar> r;
        for (const auto& s : row) r.push_back(scalar_from_hex(s));
        b.fresh_randomness.push_back(std::move(r));
    }
    for (const auto& c : doc.at("node_commitments")) b.node_commitments.push_back(point_from_hex(c));
    for (const auto& bit : doc.at("branch_bits"))
        b.branch_bits.push_back(static_cast<std::uint8_t>(bit.get<int>()));
    for (const auto& z : doc.at("zero_openings")) b.zero_openings.push_back(scalar_from_hex(z));
    for (const auto& p : doc.at("zkmps")) b.zkmps.push_back(zkmp_from_json(p));
    b.range_proof = sharp_from_json(doc.at("range_proof"));
    return env;
}

void save_envelope(const BundleEnvelope& env, const std::string& path) {
    write_file_locked(path, envelope_to_json(env));
}

BundleEnvelope load_envelope(const std::string& path) {
    return envelope_from_json(read_file(path));
}

}  // namespace zkseries
