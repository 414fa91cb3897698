#include "swarmsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "swarmsim/assignment.hpp"
#include "swarmsim/avoidance.hpp"
#include "swarmsim/formation.hpp"
#include "swarmsim/mission.hpp"

namespace swarmsim {

namespace {

constexpr std::array<std::string_view, 7> kPhaseNames{"CommandIntake",    "BusDelivery",     "Coordination", "HighLevelControl",
                                                      "LowLevelControl", "Integrate",       "Telemetry"};

double effective_speed(double scenario_factor) { return scenario_factor > 0.0 ? scenario_factor : kFreeRun; }

json violation(std::string type, json fields = json::object()) {
    fields["type"] = std::move(type);
    return fields;
}

}  // namespace

std::string_view phase_name(StepPhase phase) { return kPhaseNames.at(static_cast<std::size_t>(phase)); }

std::string_view mission_status_name(MissionStatus status) {
    switch (status) {
    case MissionStatus::None:
        return "none";
    case MissionStatus::Searching:
        return "searching";
    case MissionStatus::Complete:
        return "complete";
    }
    return "none";
}

std::string_view stop_reason_name(StopReason reason) {
    switch (reason) {
    case StopReason::TickLimit:
        return "tick_limit";
    case StopReason::MissionComplete:
        return "mission_complete";
    case StopReason::External:
        return "external_stop";
    case StopReason::Halted:
        return "halted";
    }
    return "unknown";
}

json WorldSnapshot::to_event_json() const {
    json list = json::array();
    for (const auto& a : agents)
        list.push_back({{"id", external_id(a.id)}, {"p", vec_to_json(a.position)}, {"v", vec_to_json(a.velocity)}});
    return json{{"agents", list}, {"formation", formation}, {"max_error", max_error},
                {"mission", mission_status_name(mission)}};
}

Simulation::Simulation(ScenarioConfig config, RunOptions options)
    : config_(std::move(config)),
      seed_(options.seed.value_or(config_.seed)),
      rng_(seed_),
      clock_{0, config_.dt},
      bus_(config_.topology),
      tick_limit_(options.tick_limit ? options.tick_limit : config_.tick_limit()) {
    const std::size_t n = config_.agent_count;
    if (config_.topology.size() != n) throw ConfigError("topology size does not match agent count");
    speed_factor_ = options.speed_factor ? *options.speed_factor : effective_speed(config_.speed_factor);
    const auto& script = options.script ? *options.script : config_.commands;
    script_.assign(script.begin(), script.end());
    std::stable_sort(script_.begin(), script_.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });

    agents_.resize(n);
    for (AgentId i = 0; i < n; ++i) {
        agents_[i].id = i;
        if (config_.random_start) {
            const auto& box = *config_.random_start;
            constexpr int kMaxDraws = 10000;
            int draws = 0;
            bool clear = false;
            while (!clear) {
                if (++draws > kMaxDraws)
                    throw ConfigError("cannot place " + std::to_string(n) + " agents " +
                                      std::to_string(box.min_spacing) + " m apart in the random start box");
                for (int c = 0; c < 3; ++c)
                    agents_[i].position[c] = box.center[c] + (rng_.uniform01() - 0.5) * box.size;
                clear = std::all_of(agents_.begin(), agents_.begin() + static_cast<std::ptrdiff_t>(i), [&](const AgentState& a) {
                    return (a.position - agents_[i].position).norm() >= box.min_spacing;
                });
            }
        } else {
            agents_[i].position = config_.initial_positions.at(i);
        }
    }

    knowledge_.resize(n);
    for (auto& k : knowledge_) {
        k.offsets.assign(n, Vec3::Zero());
        k.neighbor_at.assign(n, std::nullopt);
    }
    offsets_.assign(n, Vec3::Zero());
    too_close_.assign(n, std::vector<bool>(n, false));

    for (AgentId i = 0; i < n; ++i) bus_.subscribe(i, "/*/state");
    if (n > 0) {
        bus_.subscribe(config_.leader, topics::cmd_vel(config_.leader));
        bus_.subscribe(config_.leader, topics::kFormationCommand);
        for (AgentId i = 0; i < n; ++i)
            if (i != config_.leader) bus_.subscribe(i, topics::kAssignment);
    }
    bus_.subscribe(kGroundStation, topics::kDetection);

    LogHeader header;
    header.scenario = config_.to_json();
    header.scenario_hash = scenario_hash(header.scenario);
    header.seed = seed_;
    header.dt = config_.dt;
    header.snapshot_every = config_.snapshot_every;
    log_ = TelemetryLog(std::move(header));

    if (config_.mission) {
        const auto& m = *config_.mission;
        plan_ = plan_search(m.region, n, m.swath);
        for (AgentId i = 0; i < n; ++i) knowledge_[i].waypoints = plan_[i].waypoints;
        if (m.target) {
            target_ = m.target;
        } else {
            const double x = m.region.x0 + rng_.uniform01() * m.region.width;
            const double y = m.region.y0 + rng_.uniform01() * m.region.height;
            target_ = Vec3{x, y, 0.0};
        }
        mission_ = MissionStatus::Searching;
    } else if (config_.initial_formation && n > 0) {
        const FormationSpec* spec = config_.find_formation(*config_.initial_formation);
        if (!spec) throw ConfigError("unknown initial formation " + *config_.initial_formation);
        std::vector<Vec3> positions;
        for (const auto& a : agents_) positions.push_back(a.position);
        AssignmentTable table = identity_assignment(*spec, n, config_.leader);
        if (config_.assign_initial) {
            auto solved = reconfigure(*spec, positions, config_.leader);
            if (auto* t = std::get_if<AssignmentTable>(&solved)) table = *t;
        }
        formation_ = table.formation;
        offsets_ = table.offsets_by_agent(n);
        for (auto& k : knowledge_) {
            k.formation = formation_;
            k.offsets = offsets_;
        }
        json data = assignment_to_json(table);
        data["initial"] = true;
        emit(0, EventKind::Assignment, std::move(data));
    }

    std::vector<Vec3> start;
    for (const auto& a : agents_) start.push_back(a.position);
    for (const auto& w : initial_separation_warnings(start, config_.min_separation))
        emit(0, EventKind::Violation, violation("initial_separation", {{"detail", w}}));

    record_initial();
}

void Simulation::record_initial() {
    auto snap = snapshot();
    emit(0, EventKind::Snapshot, snap->to_event_json());
    flush_events();
    std::lock_guard lock(publish_mutex_);
    published_ = std::move(snap);
}

std::shared_ptr<const WorldSnapshot> Simulation::snapshot() const {
    auto snap = std::make_shared<WorldSnapshot>();
    snap->tick = clock_.tick;
    snap->sim_time = clock_.sim_time();
    snap->agents = agents_;
    snap->formation = formation_;
    snap->offsets = offsets_;
    if (mission_ == MissionStatus::None && !formation_.empty()) {
        std::vector<Vec3> positions;
        positions.reserve(agents_.size());
        for (const auto& a : agents_) positions.push_back(a.position);
        snap->max_error = max_formation_error(positions, offsets_);
    }
    snap->mission = mission_;
    snap->detection = detection_;
    snap->paused = paused_.load();
    snap->speed_factor = speed_factor_.load();
    return snap;
}

std::shared_ptr<const WorldSnapshot> Simulation::published() const {
    std::lock_guard lock(publish_mutex_);
    return published_;
}

void Simulation::publish_snapshot() {
    auto snap = snapshot();
    std::lock_guard lock(publish_mutex_);
    published_ = std::move(snap);
}

void Simulation::submit(SwarmCommand command) {
    {
        std::lock_guard lock(queue_mutex_);
        live_.push_back(std::move(command));
    }
    queue_cv_.notify_all();
}

void Simulation::request_stop() {
    stop_requested_ = true;
    queue_cv_.notify_all();
}

void Simulation::set_speed_factor(double factor) {
    if (std::isnan(factor) || factor <= 0.0) throw std::invalid_argument("speed factor must be > 0 (or kFreeRun)");
    speed_factor_ = factor;
}

void Simulation::intake(const std::vector<SwarmCommand>& commands) {
    const Tick k = clock_.tick;
    for (const auto& c : commands) {
        emit(k, EventKind::Command, command_to_json(c));
        if (c.is_control()) {
            apply_control(c);
        } else {
            held_.push_back(c);
        }
    }
}

void Simulation::apply_control(const SwarmCommand& command) {
    switch (command.kind) {
    case SwarmCommand::Kind::Pause:
        paused_ = true;
        break;
    case SwarmCommand::Kind::Resume:
        paused_ = false;
        break;
    case SwarmCommand::Kind::SetSpeed:
        set_speed_factor(command.speed_factor);
        break;
    case SwarmCommand::Kind::Stop:
        stop_requested_ = true;
        break;
    default:
        break;
    }
}

void Simulation::step() {
    const Tick k = clock_.tick;

    // CommandIntake
    std::vector<SwarmCommand> drained;
    while (!script_.empty() && script_.front().tick <= k) {
        drained.push_back(script_.front().command);
        script_.pop_front();
    }
    {
        std::lock_guard lock(queue_mutex_);
        drained.insert(drained.end(), live_.begin(), live_.end());
        live_.clear();
    }
    intake(drained);
    std::vector<SwarmCommand> swarm = std::move(held_);
    held_.clear();
    for (const auto& c : swarm) {
        if (c.kind == SwarmCommand::Kind::SetFormation) {
            const FormationSpec* spec = config_.find_formation(c.formation);
            if (!spec || mission_ != MissionStatus::None || agents_.empty()) {
                emit(k, EventKind::Violation,
                     violation("command_rejected",
                               {{"command", command_to_json(c)},
                                {"reason", spec ? "formation commands need a formation-mode scenario"
                                                : "unknown formation '" + c.formation + "'"}}));
                continue;
            }
            bus_.publish(topics::kFormationCommand, kGroundStation, k, FormationCommand{c.formation});
        } else if (c.kind == SwarmCommand::Kind::LeaderVelocity && !agents_.empty()) {
            bus_.publish(topics::cmd_vel(config_.leader), kGroundStation, k, LeaderVelocity{c.velocity});
        }
    }

    deliver_messages();
    coordinate();
    auto desired = high_level_control();
    auto applied = low_level_control(std::move(desired));
    integrate_all(applied);

    // Telemetry
    if (clock_.tick % config_.snapshot_every == 0) emit(clock_.tick, EventKind::Snapshot, snapshot()->to_event_json());
    flush_events();
    publish_snapshot();
}

void Simulation::deliver_messages() {
    const Tick k = clock_.tick;
    for (const auto& d : bus_.deliver(k)) emit(k, EventKind::Delivery, delivery_to_json(d));

    bool adopted = false;
    for (AgentId i = 0; i < agents_.size(); ++i) {
        auto& know = knowledge_[i];
        for (auto& msg : bus_.take_inbox(i)) {
            if (const auto* s = std::get_if<StateReport>(&msg.payload)) {
                know.neighbor_at.at(s->id) = s->position;
            } else if (const auto* t = std::get_if<AssignmentTable>(&msg.payload)) {
                know.formation = t->formation;
                know.offsets = t->offsets_by_agent(agents_.size());
                if (!adopted) {
                    formation_ = t->formation;
                    offsets_ = know.offsets;
                    adopted = true;
                }
            } else if (const auto* v = std::get_if<LeaderVelocity>(&msg.payload)) {
                know.commanded = v->velocity;
            } else if (const auto* f = std::get_if<FormationCommand>(&msg.payload)) {
                know.pending_formation = f->name;
            }
        }
    }
    bus_.take_inbox(kGroundStation);
}

void Simulation::coordinate() {
    if (agents_.empty()) return;
    const Tick k = clock_.tick;
    const AgentId leader = config_.leader;
    auto& know = knowledge_[leader];
    if (!know.pending_formation) return;
    const std::string name = *know.pending_formation;
    know.pending_formation.reset();

    const FormationSpec* spec = config_.find_formation(name);
    if (!spec) return;
    // Leader frame: the leader at the origin, everyone else from the
    // ground-truth relative position service.
    std::vector<Vec3> positions(agents_.size(), Vec3::Zero());
    for (const auto& r : relative_positions(agents_, leader)) positions[r.neighbor] = r.r;

    auto solved = reconfigure(*spec, positions, leader);
    if (const auto* rejected = std::get_if<ReconfigureRejected>(&solved)) {
        emit(k, EventKind::Violation, violation("reconfigure_rejected", {{"reason", rejected->reason}}));
        return;
    }
    const auto& table = std::get<AssignmentTable>(solved);
    emit(k, EventKind::Assignment, assignment_to_json(table));
    know.formation = table.formation;
    know.offsets = table.offsets_by_agent(agents_.size());
    if (agents_.size() == 1) {
        formation_ = table.formation;
        offsets_ = know.offsets;
    }
    bus_.publish(topics::kAssignment, leader, k, table);
}

void Simulation::monitor_separation() {
    const Tick k = clock_.tick;
    for (AgentId i = 0; i < agents_.size(); ++i) {
        for (AgentId j = i + 1; j < agents_.size(); ++j) {
            const double d = (agents_[i].position - agents_[j].position).norm();
            const bool close = d < config_.separation_threshold;
            if (close && !too_close_[i][j]) {
                emit(k, EventKind::Violation,
                     violation("separation", {{"a", external_id(i)}, {"b", external_id(j)}, {"distance", d},
                                              {"threshold", config_.separation_threshold}}));
            }
            too_close_[i][j] = close;
        }
    }
}

std::vector<Vec3> Simulation::high_level_control() {
    const Tick k = clock_.tick;
    const std::size_t n = agents_.size();
    for (AgentId i = 0; i < n; ++i) {
        if (!is_finite(agents_[i].position))
            throw SimHalt(i, std::string(phase_name(StepPhase::HighLevelControl)), "non-finite position in snapshot");
    }
    monitor_separation();

    std::vector<Vec3> desired(n, Vec3::Zero());
    for (AgentId i = 0; i < n; ++i) {
        auto& know = knowledge_[i];
        Vec3 u = Vec3::Zero();
        if (config_.mission) {
            const auto& m = *config_.mission;
            u = track_waypoints(agents_[i], know.waypoints, know.waypoint_index, m.accept_radius, config_.max_speed);
            if (mission_ == MissionStatus::Searching) {
                if (auto hit = detect(agents_[i], *target_, m.footprint_radius, m.p_detect, rng_, k)) {
                    detection_ = hit;
                    mission_ = MissionStatus::Complete;
                    emit(k, EventKind::Detection,
                         {{"detector", external_id(i)}, {"target", vec_to_json(hit->target)}, {"tick", k}});
                    bus_.publish(topics::kDetection, i, k, *hit);
                }
            }
        } else if (i == config_.leader) {
            u = know.commanded;
        } else {
            std::vector<NeighborReport> neighbors;
            for (AgentId j : config_.topology.in_neighbors(i))
                if (know.neighbor_at[j]) neighbors.push_back({j, *know.neighbor_at[j]});
            auto out = consensus_velocity(i, agents_[i].position, neighbors, config_.topology, know.offsets, config_.gain);
            for (AgentId j : out.missing)
                emit(k, EventKind::Violation,
                     violation("missing_neighbor", {{"agent", external_id(i)}, {"neighbor", external_id(j)}}));
            u = out.velocity;
        }

        if (config_.avoidance.enabled && (config_.mission || i != config_.leader)) {
            const auto reports = relative_positions(agents_, i, config_.avoidance.range);
            const auto avoid = avoidance_vector(reports, config_.avoidance);
            if (avoid.degenerate > 0)
                emit(k, EventKind::Violation, violation("coincident_agents", {{"agent", external_id(i)}}));
            u = compose_velocity(u, avoid.a, config_.max_speed);
        }
        desired[i] = u;
    }

    for (AgentId i = 0; i < n; ++i)
        bus_.publish(topics::state(i), i, k, StateReport{i, agents_[i].position, agents_[i].velocity});
    return desired;
}

std::vector<Vec3> Simulation::low_level_control(std::vector<Vec3> desired) {
    for (AgentId i = 0; i < desired.size(); ++i) {
        if (!is_finite(desired[i]))
            throw SimHalt(i, std::string(phase_name(StepPhase::LowLevelControl)), "non-finite velocity command");
        desired[i] = saturate(desired[i], config_.max_speed);
    }
    return desired;
}

void Simulation::integrate_all(const std::vector<Vec3>& velocities) {
    std::vector<AgentState> next;
    next.reserve(agents_.size());
    for (AgentId i = 0; i < agents_.size(); ++i) next.push_back(integrate(agents_[i], velocities[i], config_.dt));
    agents_ = std::move(next);
    ++clock_.tick;
}

void Simulation::flush_events() {
    std::stable_sort(pending_events_.begin(), pending_events_.end(), [](const PendingEvent& a, const PendingEvent& b) {
        return a.tick != b.tick ? a.tick < b.tick : a.kind < b.kind;
    });
    for (auto& ev : pending_events_) log_.record(ev.tick, ev.kind, std::move(ev.data));
    pending_events_.clear();
}

RunResult Simulation::run(const TickHook& on_tick) {
    using Clock = std::chrono::steady_clock;
    RunResult result;
    if (on_tick) on_tick(*this);

    auto base_time = Clock::now();
    Tick base_tick = clock_.tick;
    double base_speed = speed_factor_.load();
    bool was_paused = false;

    try {
        while (true) {
            // Controls drained here take effect before the next tick runs.
            std::vector<SwarmCommand> controls;
            {
                std::lock_guard lock(queue_mutex_);
                for (auto it = live_.begin(); it != live_.end();) {
                    if (it->is_control()) {
                        controls.push_back(*it);
                        it = live_.erase(it);
                    } else {
                        ++it;
                    }
                }
            }
            for (auto it = script_.begin(); it != script_.end() && it->tick <= clock_.tick;) {
                if (it->command.is_control()) {
                    controls.push_back(it->command);
                    it = script_.erase(it);
                } else {
                    ++it;
                }
            }
            intake(controls);

            if (stop_requested_) {
                result.reason = StopReason::External;
                break;
            }
            if (tick_limit_ && clock_.tick >= *tick_limit_) {
                result.reason = StopReason::TickLimit;
                break;
            }
            if (mission_ == MissionStatus::Complete && config_.stop.on_mission_complete) {
                result.reason = StopReason::MissionComplete;
                break;
            }
            if (paused_) {
                if (!was_paused) publish_snapshot();
                was_paused = true;
                std::unique_lock lock(queue_mutex_);
                queue_cv_.wait_for(lock, std::chrono::milliseconds(20),
                                   [this] {
                                       return stop_requested_.load() ||
                                              std::any_of(live_.begin(), live_.end(),
                                                          [](const SwarmCommand& c) { return c.is_control(); });
                                   });
                continue;
            }

            const double speed = speed_factor_.load();
            if (was_paused || speed != base_speed) {
                base_time = Clock::now();
                base_tick = clock_.tick;
                base_speed = speed;
                was_paused = false;
            }

            step();
            if (on_tick) on_tick(*this);

            if (std::isfinite(speed)) {
                const double wall = static_cast<double>(clock_.tick - base_tick) * config_.dt / speed;
                std::this_thread::sleep_until(base_time + std::chrono::duration_cast<Clock::duration>(
                                                              std::chrono::duration<double>(wall)));
            }
        }
    } catch (const SimHalt& halt) {
        result.reason = StopReason::Halted;
        result.halt_message = halt.what();
        pending_events_.push_back({clock_.tick, EventKind::Violation,
                                   violation("halt", {{"agent", external_id(halt.agent())}, {"phase", halt.phase()},
                                                      {"detail", halt.what()}})});
    }
    flush_events();
    publish_snapshot();
    return result;
}

RunOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    const bool bounded = options.tick_limit || config.tick_limit() ||
                         (config.mission && config.stop.on_mission_complete);
    if (!bounded) throw ConfigError("scenario has no stop condition (set stop.max_ticks or stop.max_time)");
    Simulation sim(config, options);
    RunOutcome out;
    out.result = sim.run();
    out.log = sim.take_log();
    return out;
}

ReplayReport replay(const TelemetryLog& log, const json* expected_scenario) {
    ReplayReport report;
    if (log.empty()) return report;

    const auto& header = log.header();
    if (scenario_hash(header.scenario) != header.scenario_hash)
        throw ReplayRefused("log header hash does not match its embedded scenario");
    if (expected_scenario && scenario_hash(*expected_scenario) != header.scenario_hash)
        throw ReplayRefused("log was produced by a different scenario (hash " + header.scenario_hash + ")");

    ScenarioConfig config;
    try {
        config = parse_scenario(header.scenario).config;
    } catch (const ConfigError& e) {
        throw ReplayRefused(std::string("embedded scenario no longer validates: ") + e.what());
    }

    std::vector<ScheduledCommand> script;
    Tick last_snapshot = 0;
    for (const auto& ev : log.events()) {
        if (ev.kind == EventKind::Snapshot) last_snapshot = ev.tick;
        if (ev.kind != EventKind::Command) continue;
        auto cmd = command_from_json(ev.data);
        // Pacing never changes state.
        if (cmd.kind == SwarmCommand::Kind::Pause || cmd.kind == SwarmCommand::Kind::Resume ||
            cmd.kind == SwarmCommand::Kind::SetSpeed)
            continue;
        script.push_back({ev.tick, cmd});
    }

    RunOptions options;
    options.seed = header.seed;
    options.speed_factor = kFreeRun;
    options.script = std::move(script);
    options.tick_limit = last_snapshot;
    Simulation sim(config, options);
    sim.run();

    std::vector<const SimEvent*> regenerated;
    for (const auto& ev : sim.log().events())
        if (ev.kind == EventKind::Snapshot) regenerated.push_back(&ev);

    std::size_t cursor = 0;
    for (const auto& ev : log.events()) {
        if (ev.kind != EventKind::Snapshot) continue;
        while (cursor < regenerated.size() && regenerated[cursor]->tick < ev.tick) ++cursor;
        ++report.compared;
        if (cursor == regenerated.size() || regenerated[cursor]->tick != ev.tick) {
            report.first_divergence = ReplayDivergence{ev.tick, "no regenerated snapshot at this tick"};
            return report;
        }
        const json& want = ev.data;
        const json& got = regenerated[cursor]->data;
        if (want != got) {
            std::string detail = "snapshot differs";
            const auto& wa = want.at("agents");
            const auto& ga = got.at("agents");
            for (std::size_t a = 0; a < std::min(wa.size(), ga.size()); ++a) {
                if (wa[a] != ga[a]) {
                    detail = "uav" + std::to_string(a + 1) + ": logged " + wa[a].dump() + ", replayed " + ga[a].dump();
                    break;
                }
            }
            report.first_divergence = ReplayDivergence{ev.tick, detail};
            return report;
        }
    }
    return report;
}

}  // namespace swarmsim
