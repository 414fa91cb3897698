#include "swarmsim/bus.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include "swarmsim/telemetry.hpp"

namespace swarmsim {

namespace topics {
std::string state(AgentId agent) { return "/uav" + std::to_string(agent + 1) + "/state"; }
std::string cmd_vel(AgentId agent) { return "/uav" + std::to_string(agent + 1) + "/cmd_vel"; }
}  // namespace topics

namespace {

std::vector<std::string_view> split_segments(std::string_view topic) {
    std::vector<std::string_view> out;
    topic.remove_prefix(1);
    while (true) {
        const auto slash = topic.find('/');
        out.push_back(topic.substr(0, slash));
        if (slash == std::string_view::npos) break;
        topic.remove_prefix(slash + 1);
    }
    return out;
}

bool valid_segment(std::string_view seg, bool allow_wildcard) {
    if (seg.empty()) return false;
    if (allow_wildcard && seg == "*") return true;
    return std::all_of(seg.begin(), seg.end(),
                       [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

}  // namespace

bool is_well_formed_topic(const std::string& topic) {
    if (topic.size() < 2 || topic.front() != '/') return false;
    for (auto seg : split_segments(topic))
        if (!valid_segment(seg, false)) return false;
    return true;
}

bool topic_matches(const std::string& pattern, const std::string& topic) {
    if (pattern.empty() || topic.empty() || pattern.front() != '/' || topic.front() != '/') return false;
    const auto p = split_segments(pattern);
    const auto t = split_segments(topic);
    if (p.size() != t.size()) return false;
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] != "*" && p[k] != t[k]) return false;
    return true;
}

bool is_gated_topic(const std::string& topic) { return topic.rfind("/uav", 0) == 0; }

bool gate(AgentId sender, AgentId receiver, const TopologyMatrix& topology) {
    if (sender == kGroundStation || receiver == kGroundStation) return true;
    if (sender == receiver) return false;
    return topology.communicates(receiver, sender);
}

SwarmBus::SwarmBus(TopologyMatrix topology) : topology_(std::move(topology)) {}

void SwarmBus::subscribe(AgentId subscriber, std::string pattern) {
    if (!known(subscriber)) throw UnknownSender("unknown subscriber " + std::to_string(external_id(subscriber)));
    bool ok = pattern.size() >= 2 && pattern.front() == '/';
    if (ok)
        for (auto seg : split_segments(pattern)) ok = ok && valid_segment(seg, true);
    if (!ok) throw std::invalid_argument("malformed topic pattern '" + pattern + "'");
    subscriptions_[subscriber].push_back(std::move(pattern));
}

std::uint64_t SwarmBus::publish(std::string topic, AgentId sender, Tick tick, Payload payload) {
    if (!known(sender)) throw UnknownSender("unknown sender " + std::to_string(external_id(sender)));
    if (!is_well_formed_topic(topic)) throw std::invalid_argument("malformed topic '" + topic + "'");
    const std::uint64_t seq = next_seq_++;
    pending_.push_back({std::move(topic), sender, seq, tick, std::move(payload)});
    return seq;
}

std::vector<Delivery> SwarmBus::deliver(Tick now) {
    std::vector<TopicMessage> ready;
    std::vector<TopicMessage> later;
    for (auto& msg : pending_) (msg.tick_sent < now ? ready : later).push_back(std::move(msg));
    pending_ = std::move(later);

    // Ground station (max id) sorts after all agents as a sender.
    std::stable_sort(ready.begin(), ready.end(), [](const TopicMessage& a, const TopicMessage& b) {
        return std::tie(a.topic, a.sender, a.seq) < std::tie(b.topic, b.sender, b.seq);
    });

    std::vector<Delivery> out;
    for (const auto& msg : ready) {
        for (const auto& [subscriber, patterns] : subscriptions_) {
            if (subscriber == msg.sender) continue;
            const bool wants = std::any_of(patterns.begin(), patterns.end(),
                                           [&](const std::string& p) { return topic_matches(p, msg.topic); });
            if (!wants) continue;
            if (is_gated_topic(msg.topic) && !gate(msg.sender, subscriber, topology_)) continue;
            inboxes_[subscriber].push_back(msg);
            out.push_back({msg.topic, msg.sender, subscriber, msg.seq, msg.tick_sent, now});
        }
    }
    return out;
}

std::vector<TopicMessage> SwarmBus::take_inbox(AgentId subscriber) {
    auto it = inboxes_.find(subscriber);
    if (it == inboxes_.end()) return {};
    std::vector<TopicMessage> out = std::move(it->second);
    it->second.clear();
    return out;
}

std::vector<RelativePositionReport> relative_positions(std::span<const AgentState> agents, AgentId observer,
                                                       std::optional<double> range_limit) {
    std::vector<RelativePositionReport> out;
    if (observer >= agents.size()) return out;
    const Vec3& origin = agents[observer].position;
    for (AgentId j = 0; j < agents.size(); ++j) {
        if (j == observer) continue;
        const Vec3 r = agents[j].position - origin;
        if (range_limit && r.norm() > *range_limit) continue;
        out.push_back({observer, j, r});
    }
    return out;
}

std::vector<BusViolation> audit(std::span<const Delivery> deliveries, const TopologyMatrix& topology) {
    std::vector<BusViolation> out;
    auto name = [](AgentId id) { return id == kGroundStation ? std::string("ground") : "uav" + std::to_string(id + 1); };
    for (const auto& d : deliveries) {
        const std::string where = d.topic + " #" + std::to_string(d.seq) + " " + name(d.sender) + "->" + name(d.receiver);
        if (d.tick_delivered != d.tick_sent + 1) {
            out.push_back({d, where + ": sent at tick " + std::to_string(d.tick_sent) + ", delivered at " +
                                  std::to_string(d.tick_delivered)});
        }
        if (!is_gated_topic(d.topic)) continue;
        const bool in_range = (d.sender == kGroundStation || d.sender < topology.size()) &&
                              (d.receiver == kGroundStation || d.receiver < topology.size());
        if (!in_range || !gate(d.sender, d.receiver, topology)) {
            out.push_back({d, where + ": no edge " + name(d.sender) + "->" + name(d.receiver) + " in the topology"});
        }
    }
    return out;
}

std::vector<BusViolation> audit(const TelemetryLog& log, const TopologyMatrix& topology) {
    std::vector<Delivery> deliveries;
    for (const auto& ev : log.events()) {
        if (ev.kind == EventKind::Delivery) deliveries.push_back(delivery_from_json(ev.tick, ev.data));
    }
    return audit(deliveries, topology);
}

}  // namespace swarmsim
