#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarmsim/bus.hpp"
#include "swarmsim/dynamics.hpp"

namespace swarmsim {

using json = nlohmann::json;

/// Declaration order is the within-tick ordering rank.
enum class EventKind : std::uint8_t { Snapshot, Command, Delivery, Assignment, Detection, Violation };

std::string_view kind_name(EventKind kind);
EventKind kind_from_name(std::string_view name);

struct SimEvent {
    Tick tick = 0;
    EventKind kind = EventKind::Snapshot;
    std::uint64_t seq = 0;
    json data;

    friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

inline constexpr int kLogVersion = 1;
inline constexpr int kScenarioSchemaVersion = 1;

struct LogHeader {
    int version = kLogVersion;
    int schema_version = kScenarioSchemaVersion;
    std::string scenario_hash;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::uint64_t snapshot_every = 1;
    json scenario;

    json to_json() const;
    static LogHeader from_json(const json& j);

    friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

class LogOrderError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LogFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered event stream with a header. On disk:
///   "SWARMLOG" | u32 LE header length | header JSON | records...
/// where each record is u32 LE length | CBOR map {tick, kind, seq, data}.
class TelemetryLog {
public:
    TelemetryLog() = default;
    explicit TelemetryLog(LogHeader header) : header_(std::move(header)) {}

    const LogHeader& header() const noexcept { return header_; }
    LogHeader& header() noexcept { return header_; }
    const std::vector<SimEvent>& events() const noexcept { return events_; }
    std::vector<SimEvent>& mutable_events() noexcept { return events_; }
    std::size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }

    /// Appends with the next sequence number. Throws LogOrderError if the
    /// event's tick is earlier than the last recorded tick.
    void record(Tick tick, EventKind kind, json data);

    std::vector<std::uint8_t> serialize() const;
    static TelemetryLog deserialize(std::span<const std::uint8_t> bytes);

    void save(const std::filesystem::path& path) const;
    static TelemetryLog load(const std::filesystem::path& path);

    friend bool operator==(const TelemetryLog&, const TelemetryLog&) = default;

private:
    LogHeader header_;
    std::vector<SimEvent> events_;
};

// Payload encoding shared by the engine, the audit and the gateway stream.
// Vectors are [x, y, z]; agent ids are 1-based, ground station is 0.
json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const json& j);
json delivery_to_json(const Delivery& d);
Delivery delivery_from_json(Tick tick, const json& j);
json assignment_to_json(const AssignmentTable& table);
AssignmentTable assignment_from_json(const json& j);

struct SnapshotView {
    Tick tick = 0;
    std::vector<AgentState> agents;
    std::string formation;
    double max_error = 0.0;
    std::string mission;
};

SnapshotView snapshot_from_json(Tick tick, const json& data);

enum class Axis { X = 0, Y = 1, Z = 2 };
Axis axis_from_name(std::string_view name);

/// Position-response table: one row per logged snapshot, one column per agent.
struct CurveTable {
    std::vector<std::string> columns;  // "tick", "uav1", ...
    std::vector<Tick> ticks;
    std::vector<std::vector<double>> values;  // values[row][agent]

    std::vector<double> column(std::size_t agent) const;
    /// Tab-separated with a header line; values printed round-trip exact.
    std::string to_tsv() const;
};

CurveTable export_curves(const TelemetryLog& log, Axis axis);

struct ResponseMetrics {
    bool settled = false;
    /// First row after which the series stays inside the band.
    std::size_t settle_row = 0;
    /// Largest excursion past the target against the initial error, as a
    /// percentage of the initial error. Zero if the series starts in the band.
    double overshoot_pct = 0.0;
};

ResponseMetrics analyze_response(std::span<const double> series, double target, double band);

std::string sha256_hex(std::string_view data);
/// Hash of the canonical (sorted-key, compact) dump of a scenario document.
std::string scenario_hash(const json& scenario);

}  // namespace swarmsim
