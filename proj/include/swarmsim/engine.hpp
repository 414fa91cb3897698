#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "swarmsim/bus.hpp"
#include "swarmsim/commands.hpp"
#include "swarmsim/rng.hpp"
#include "swarmsim/scenario.hpp"
#include "swarmsim/telemetry.hpp"

namespace swarmsim {

/// Discrete clock. Time is always derived from the integer tick.
struct SimClock {
    Tick tick = 0;
    double dt = 0.02;

    double sim_time() const { return static_cast<double>(tick) * dt; }
};

/// Order in which every tick runs, for all agents, before the next begins.
enum class StepPhase { CommandIntake, BusDelivery, Coordination, HighLevelControl, LowLevelControl, Integrate, Telemetry };

std::string_view phase_name(StepPhase phase);

enum class MissionStatus { None, Searching, Complete };

std::string_view mission_status_name(MissionStatus status);

/// What one agent knows. Only messages delivered over the bus change it.
struct AgentKnowledge {
    std::string formation;
    std::vector<Vec3> offsets;                     // assigned offset per agent id
    std::vector<std::optional<Vec3>> neighbor_at;  // latest reported position per agent id
    Vec3 commanded = Vec3::Zero();                 // leader: operator velocity
    std::optional<std::string> pending_formation;  // leader: command to act on
    std::vector<Vec3> waypoints;
    std::size_t waypoint_index = 0;
};

/// Immutable view of the world at one tick; safe to hand to other threads.
struct WorldSnapshot {
    Tick tick = 0;
    double sim_time = 0.0;
    std::vector<AgentState> agents;
    std::string formation;
    std::vector<Vec3> offsets;
    double max_error = 0.0;
    MissionStatus mission = MissionStatus::None;
    std::optional<DetectionReport> detection;
    bool paused = false;
    double speed_factor = kFreeRun;

    /// Payload of a snapshot event (tick excluded).
    json to_event_json() const;
};

enum class StopReason { TickLimit, MissionComplete, External, Halted };

std::string_view stop_reason_name(StopReason reason);

struct RunResult {
    StopReason reason = StopReason::TickLimit;
    std::string halt_message;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<double> speed_factor;  // kFreeRun or > 0; overrides the scenario
    /// Replaces the scenario's inline command script when set.
    std::optional<std::vector<ScheduledCommand>> script;
    std::optional<Tick> tick_limit;      // overrides the scenario stop limit
};

/// Lockstep engine. step() advances one tick through every StepPhase;
/// run() loops with wall-clock pacing until a stop condition holds.
class Simulation {
public:
    explicit Simulation(ScenarioConfig config, RunOptions options = {});

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Advances exactly one tick. Throws SimHalt on a corrupt state.
    void step();

    /// Called on the engine thread after every tick (and once before the first).
    using TickHook = std::function<void(const Simulation&)>;
    RunResult run(const TickHook& on_tick = {});

    /// Thread-safe; applied at the next tick boundary.
    void submit(SwarmCommand command);
    /// Thread-safe; ends run() at the next tick boundary.
    void request_stop();

    /// Takes effect at the next tick boundary. Rejects NaN and finite
    /// factors <= 0; kFreeRun disables pacing.
    void set_speed_factor(double factor);
    double speed_factor() const { return speed_factor_.load(); }
    bool paused() const { return paused_.load(); }

    const ScenarioConfig& config() const noexcept { return config_; }
    const SimClock& clock() const noexcept { return clock_; }
    Tick tick() const noexcept { return clock_.tick; }
    const std::vector<AgentState>& agents() const noexcept { return agents_; }
    const std::vector<AgentKnowledge>& knowledge() const noexcept { return knowledge_; }
    const TelemetryLog& log() const noexcept { return log_; }
    TelemetryLog take_log() { return std::move(log_); }
    MissionStatus mission_status() const noexcept { return mission_; }
    const std::optional<DetectionReport>& detection() const noexcept { return detection_; }
    const std::optional<Vec3>& mission_target() const noexcept { return target_; }
    const std::vector<SearchCell>& search_plan() const noexcept { return plan_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Debugging hook: overwrite one agent's state between ticks. Nothing
    /// validates it here; a non-finite value halts the next step.
    void set_agent_state(const AgentState& state) { agents_.at(state.id) = state; }

    /// Copy of the current state, built on the engine thread.
    std::shared_ptr<const WorldSnapshot> snapshot() const;
    /// Last snapshot published by the engine thread; safe from any thread.
    std::shared_ptr<const WorldSnapshot> published() const;

private:
    struct PendingEvent {
        Tick tick;
        EventKind kind;
        json data;
    };

    void record_initial();
    void intake(const std::vector<SwarmCommand>& commands);
    void apply_control(const SwarmCommand& command);
    void deliver_messages();
    void coordinate();
    std::vector<Vec3> high_level_control();
    std::vector<Vec3> low_level_control(std::vector<Vec3> desired);
    void integrate_all(const std::vector<Vec3>& velocities);
    void flush_events();
    void monitor_separation();
    void publish_snapshot();

    void emit(Tick tick, EventKind kind, json data) { pending_events_.push_back({tick, kind, std::move(data)}); }

    ScenarioConfig config_;
    std::uint64_t seed_ = 0;
    SimRng rng_;
    SimClock clock_;
    SwarmBus bus_;
    std::vector<AgentState> agents_;
    std::vector<AgentKnowledge> knowledge_;
    std::string formation_;                 // adopted by the swarm
    std::vector<Vec3> offsets_;             // adopted offsets, for the error metric
    MissionStatus mission_ = MissionStatus::None;
    std::optional<Vec3> target_;
    std::optional<DetectionReport> detection_;
    std::vector<SearchCell> plan_;
    std::vector<std::vector<bool>> too_close_;
    std::optional<Tick> tick_limit_;

    TelemetryLog log_;
    std::vector<PendingEvent> pending_events_;

    std::deque<ScheduledCommand> script_;
    mutable std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<SwarmCommand> live_;
    std::vector<SwarmCommand> held_;  // swarm commands drained while paused

    std::atomic<double> speed_factor_{kFreeRun};
    std::atomic<bool> paused_{false};
    std::atomic<bool> stop_requested_{false};

    mutable std::mutex publish_mutex_;
    std::shared_ptr<const WorldSnapshot> published_;
};

/// Runs a scenario to its stop condition at free-run speed unless paced.
struct RunOutcome {
    RunResult result;
    TelemetryLog log;
};

RunOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

struct ReplayDivergence {
    Tick tick;
    std::string detail;
};

struct ReplayReport {
    std::size_t compared = 0;
    std::optional<ReplayDivergence> first_divergence;
    bool ok() const { return !first_divergence; }
};

class ReplayRefused : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Re-executes the logged scenario from the header seed with the logged
/// commands and compares every logged snapshot. Refuses when the header hash
/// does not match its scenario, or `expected_scenario` when given.
ReplayReport replay(const TelemetryLog& log, const json* expected_scenario = nullptr);

}  // namespace swarmsim
