#include "swarmsim/telemetry.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <openssl/evp.h>

namespace swarmsim {

namespace {

constexpr std::array<char, 8> kMagic{'S', 'W', 'A', 'R', 'M', 'L', 'O', 'G'};
constexpr std::array<std::string_view, 6> kKindNames{"snapshot", "command", "delivery",
                                                     "assignment", "detection", "violation"};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    if (pos + 4 > bytes.size()) throw LogFormatError("truncated length prefix at byte " + std::to_string(pos));
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(bytes[pos + k]) << (8 * k);
    pos += 4;
    return v;
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string_view kind_name(EventKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

EventKind kind_from_name(std::string_view name) {
    for (std::size_t k = 0; k < kKindNames.size(); ++k)
        if (kKindNames[k] == name) return static_cast<EventKind>(k);
    throw LogFormatError("unknown event kind '" + std::string(name) + "'");
}

json LogHeader::to_json() const {
    return json{{"format", "swarmsim-log"}, {"version", version},   {"schema_version", schema_version},
                {"scenario_hash", scenario_hash}, {"seed", seed}, {"dt", dt},
                {"snapshot_every", snapshot_every}, {"scenario", scenario}};
}

LogHeader LogHeader::from_json(const json& j) {
    if (j.value("format", "") != "swarmsim-log") throw LogFormatError("not a swarmsim log header");
    LogHeader h;
    h.version = j.at("version").get<int>();
    if (h.version != kLogVersion) throw LogFormatError("unsupported log version " + std::to_string(h.version));
    h.schema_version = j.at("schema_version").get<int>();
    h.scenario_hash = j.at("scenario_hash").get<std::string>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.dt = j.at("dt").get<double>();
    h.snapshot_every = j.at("snapshot_every").get<std::uint64_t>();
    h.scenario = j.at("scenario");
    return h;
}

void TelemetryLog::record(Tick tick, EventKind kind, json data) {
    if (!events_.empty() && tick < events_.back().tick) {
        throw LogOrderError("event at tick " + std::to_string(tick) + " after tick " +
                            std::to_string(events_.back().tick));
    }
    events_.push_back({tick, kind, events_.size(), std::move(data)});
}

std::vector<std::uint8_t> TelemetryLog::serialize() const {
    std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
    const std::string head = header_.to_json().dump();
    put_u32(out, static_cast<std::uint32_t>(head.size()));
    out.insert(out.end(), head.begin(), head.end());
    for (const auto& ev : events_) {
        const json rec{{"tick", ev.tick}, {"kind", kind_name(ev.kind)}, {"seq", ev.seq}, {"data", ev.data}};
        const auto body = json::to_cbor(rec);
        put_u32(out, static_cast<std::uint32_t>(body.size()));
        out.insert(out.end(), body.begin(), body.end());
    }
    return out;
}

TelemetryLog TelemetryLog::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
        throw LogFormatError("missing SWARMLOG magic");
    std::size_t pos = kMagic.size();
    const std::uint32_t head_len = get_u32(bytes, pos);
    if (pos + head_len > bytes.size()) throw LogFormatError("truncated header");
    TelemetryLog log;
    try {
        log.header_ = LogHeader::from_json(json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                                       bytes.begin() + static_cast<std::ptrdiff_t>(pos + head_len)));
    } catch (const json::exception& e) {
        throw LogFormatError(std::string("bad header: ") + e.what());
    }
    pos += head_len;
    while (pos < bytes.size()) {
        const std::uint32_t len = get_u32(bytes, pos);
        if (pos + len > bytes.size()) throw LogFormatError("truncated record at byte " + std::to_string(pos));
        try {
            const json rec = json::from_cbor(bytes.subspan(pos, len));
            log.events_.push_back({rec.at("tick").get<Tick>(), kind_from_name(rec.at("kind").get<std::string>()),
                                   rec.at("seq").get<std::uint64_t>(), rec.at("data")});
        } catch (const json::exception& e) {
            throw LogFormatError("bad record at byte " + std::to_string(pos) + ": " + e.what());
        }
        pos += len;
    }
    return log;
}

void TelemetryLog::save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TelemetryLog TelemetryLog::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json delivery_to_json(const Delivery& d) {
    return json{{"topic", d.topic},
                {"sender", external_id(d.sender)},
                {"receiver", external_id(d.receiver)},
                {"seq", d.seq},
                {"tick_sent", d.tick_sent}};
}

Delivery delivery_from_json(Tick tick, const json& j) {
    return {j.at("topic").get<std::string>(), internal_id(j.at("sender").get<std::uint64_t>()),
            internal_id(j.at("receiver").get<std::uint64_t>()), j.at("seq").get<std::uint64_t>(),
            j.at("tick_sent").get<Tick>(), tick};
}

json assignment_to_json(const AssignmentTable& table) {
    json entries = json::array();
    for (const auto& e : table.entries)
        entries.push_back({{"id", external_id(e.agent)}, {"slot", e.slot + 1}, {"offset", vec_to_json(e.offset)}});
    return json{{"formation", table.formation}, {"total_cost", table.total_cost}, {"table", entries}};
}

AssignmentTable assignment_from_json(const json& j) {
    AssignmentTable table;
    table.formation = j.at("formation").get<std::string>();
    table.total_cost = j.at("total_cost").get<double>();
    for (const auto& e : j.at("table")) {
        table.entries.push_back({internal_id(e.at("id").get<std::uint64_t>()), e.at("slot").get<std::size_t>() - 1,
                                 vec_from_json(e.at("offset"))});
    }
    return table;
}

SnapshotView snapshot_from_json(Tick tick, const json& data) {
    SnapshotView view;
    view.tick = tick;
    for (const auto& a : data.at("agents")) {
        view.agents.push_back({internal_id(a.at("id").get<std::uint64_t>()), vec_from_json(a.at("p")),
                               vec_from_json(a.at("v"))});
    }
    view.formation = data.value("formation", "");
    view.max_error = data.value("max_error", 0.0);
    view.mission = data.value("mission", "");
    return view;
}

Axis axis_from_name(std::string_view name) {
    if (name == "x") return Axis::X;
    if (name == "y") return Axis::Y;
    if (name == "z") return Axis::Z;
    throw std::invalid_argument("axis must be x, y or z");
}

std::vector<double> CurveTable::column(std::size_t agent) const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row.at(agent));
    return out;
}

std::string CurveTable::to_tsv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "\t" : "") + columns[c];
    out += '\n';
    for (std::size_t r = 0; r < ticks.size(); ++r) {
        out += std::to_string(ticks[r]);
        for (double v : values[r]) out += '\t' + format_double(v);
        out += '\n';
    }
    return out;
}

CurveTable export_curves(const TelemetryLog& log, Axis axis) {
    CurveTable table;
    table.columns.push_back("tick");
    const auto k = static_cast<Eigen::Index>(axis);
    for (const auto& ev : log.events()) {
        if (ev.kind != EventKind::Snapshot) continue;
        const auto& agents = ev.data.at("agents");
        if (table.columns.size() == 1) {
            for (const auto& a : agents) table.columns.push_back("uav" + std::to_string(a.at("id").get<std::uint64_t>()));
        }
        std::vector<double> row;
        row.reserve(agents.size());
        for (const auto& a : agents) row.push_back(a.at("p").at(static_cast<std::size_t>(k)).get<double>());
        table.ticks.push_back(ev.tick);
        table.values.push_back(std::move(row));
    }
    return table;
}

ResponseMetrics analyze_response(std::span<const double> series, double target, double band) {
    ResponseMetrics m;
    if (series.empty()) return m;

    std::size_t last_outside = series.size();
    for (std::size_t r = series.size(); r-- > 0;) {
        if (std::abs(series[r] - target) > band) {
            last_outside = r;
            break;
        }
    }
    if (last_outside == series.size()) {
        m.settled = true;
        m.settle_row = 0;
    } else if (last_outside + 1 < series.size()) {
        m.settled = true;
        m.settle_row = last_outside + 1;
    }

    const double initial = series.front() - target;
    if (std::abs(initial) > band) {
        const double sign = initial > 0 ? 1.0 : -1.0;
        double worst = 0.0;
        for (double v : series) worst = std::max(worst, -sign * (v - target));
        m.overshoot_pct = 100.0 * worst / std::abs(initial);
    }
    return m;
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xF];
    }
    return out;
}

std::string scenario_hash(const json& scenario) { return sha256_hex(scenario.dump()); }

}  // namespace swarmsim
