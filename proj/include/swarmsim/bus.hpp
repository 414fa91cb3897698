#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swarmsim/assignment.hpp"
#include "swarmsim/dynamics.hpp"
#include "swarmsim/relative_position.hpp"
#include "swarmsim/topology.hpp"

namespace swarmsim {

class TelemetryLog;

// Topic names. Agent ids in topics are 1-based.
namespace topics {
std::string state(AgentId agent);    // /uav<k>/state
std::string cmd_vel(AgentId agent);  // /uav<k>/cmd_vel
inline constexpr const char* kFormationCommand = "/leader/formation_cmd";
inline constexpr const char* kAssignment = "/leader/assignment";
inline constexpr const char* kDetection = "/mission/detection";
}  // namespace topics

struct StateReport {
    AgentId id;
    Vec3 position;
    Vec3 velocity;
};

struct FormationCommand {
    std::string name;
};

struct LeaderVelocity {
    Vec3 velocity;
};

struct DetectionReport {
    AgentId detector;
    Vec3 target;
    Tick tick;
};

using Payload = std::variant<StateReport, FormationCommand, LeaderVelocity, AssignmentTable, DetectionReport>;

struct TopicMessage {
    std::string topic;
    AgentId sender;
    std::uint64_t seq = 0;
    Tick tick_sent = 0;
    Payload payload;
};

struct Delivery {
    std::string topic;
    AgentId sender;
    AgentId receiver;
    std::uint64_t seq;
    Tick tick_sent;
    Tick tick_delivered;
};

bool is_well_formed_topic(const std::string& topic);
/// Pattern segments may be `*` to match exactly one topic segment.
bool topic_matches(const std::string& pattern, const std::string& topic);

/// Inter-agent traffic on the per-UAV namespace is subject to the topology
/// gate. The /leader and /mission namespaces are swarm-wide coordination
/// channels and are exempt, like ground-station traffic.
bool is_gated_topic(const std::string& topic);

/// True iff receiver listens to sender: w[receiver][sender] > 0. Traffic to
/// or from the ground station always passes; an agent never talks to itself.
bool gate(AgentId sender, AgentId receiver, const TopologyMatrix& topology);

class UnknownSender : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// In-process topic bus. Messages published during tick t are delivered in
/// the BusDelivery phase of tick t+1, sorted by (topic, sender, seq).
class SwarmBus {
public:
    explicit SwarmBus(TopologyMatrix topology);

    void subscribe(AgentId subscriber, std::string pattern);

    /// Queues a message; throws UnknownSender or std::invalid_argument for a
    /// malformed topic. Returns the assigned sequence number.
    std::uint64_t publish(std::string topic, AgentId sender, Tick tick, Payload payload);

    /// Moves every message sent before `now` into subscriber inboxes and
    /// returns the deliveries made, in delivery order.
    std::vector<Delivery> deliver(Tick now);

    /// Drains the inbox of one subscriber.
    std::vector<TopicMessage> take_inbox(AgentId subscriber);

    std::size_t pending() const noexcept { return pending_.size(); }
    const TopologyMatrix& topology() const noexcept { return topology_; }

private:
    bool known(AgentId id) const { return id == kGroundStation || id < topology_.size(); }

    TopologyMatrix topology_;
    std::map<AgentId, std::vector<std::string>> subscriptions_;
    std::map<AgentId, std::vector<TopicMessage>> inboxes_;
    std::vector<TopicMessage> pending_;
    std::uint64_t next_seq_ = 0;
};

/// Ground-truth relative positions from `observer` to every other agent
/// within `range_limit` (inclusive), ascending by neighbor id.
std::vector<RelativePositionReport> relative_positions(std::span<const AgentState> agents, AgentId observer,
                                                       std::optional<double> range_limit = std::nullopt);

struct BusViolation {
    Delivery delivery;
    std::string message;
};

/// Every gated delivery must cross an edge of the topology and arrive exactly
/// one tick after it was sent.
std::vector<BusViolation> audit(std::span<const Delivery> deliveries, const TopologyMatrix& topology);
std::vector<BusViolation> audit(const TelemetryLog& log, const TopologyMatrix& topology);

}  // namespace swarmsim
