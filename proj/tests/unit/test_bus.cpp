#include <gtest/gtest.h>

#include "swarmsim/bus.hpp"
#include "swarmsim/telemetry.hpp"

using namespace swarmsim;

namespace {

StateReport report(AgentId id) { return {id, Vec3(id, 0, 0), Vec3::Zero()}; }

}  // namespace

TEST(Gate, PrintedTopologyCases) {
    const auto w = six_uav_example();
    EXPECT_TRUE(gate(0, 1, w));    // uav1 -> uav2
    EXPECT_FALSE(gate(5, 0, w));   // uav6 -> uav1, leader row zero
    for (AgentId i = 0; i < 6; ++i) EXPECT_FALSE(gate(i, i, w));
    EXPECT_TRUE(gate(kGroundStation, 0, w));
    EXPECT_TRUE(gate(3, kGroundStation, w));
}

TEST(Topics, NamesAndPatterns) {
    EXPECT_EQ(topics::state(0), "/uav1/state");
    EXPECT_EQ(topics::cmd_vel(8), "/uav9/cmd_vel");
    EXPECT_TRUE(topic_matches("/*/state", "/uav3/state"));
    EXPECT_FALSE(topic_matches("/*/state", "/uav3/cmd_vel"));
    EXPECT_FALSE(topic_matches("/*", "/uav3/state"));
    EXPECT_TRUE(topic_matches("/leader/assignment", "/leader/assignment"));
    EXPECT_TRUE(is_well_formed_topic("/a/b"));
    EXPECT_FALSE(is_well_formed_topic("a/b"));
    EXPECT_FALSE(is_well_formed_topic("/a//b"));
    EXPECT_FALSE(is_well_formed_topic("/a/"));
    EXPECT_TRUE(is_gated_topic("/uav2/state"));
    EXPECT_FALSE(is_gated_topic(topics::kAssignment));
    EXPECT_FALSE(is_gated_topic(topics::kDetection));
}

TEST(Bus, OneTickLatency) {
    SwarmBus bus(chain_topology(2, 1));
    bus.subscribe(1, "/*/state");
    bus.publish(topics::state(0), 0, 5, report(0));
    EXPECT_TRUE(bus.deliver(5).empty());
    EXPECT_TRUE(bus.take_inbox(1).empty());
    const auto d = bus.deliver(6);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].tick_sent, 5u);
    EXPECT_EQ(d[0].tick_delivered, 6u);
    const auto inbox = bus.take_inbox(1);
    ASSERT_EQ(inbox.size(), 1u);
    EXPECT_EQ(std::get<StateReport>(inbox[0].payload).position, Vec3(0, 0, 0));
    EXPECT_EQ(bus.pending(), 0u);
}

TEST(Bus, GatedByTopology) {
    SwarmBus bus(six_uav_example());
    for (AgentId i = 0; i < 6; ++i) bus.subscribe(i, "/*/state");
    for (AgentId i = 0; i < 6; ++i) bus.publish(topics::state(i), i, 0, report(i));
    const auto d = bus.deliver(1);
    // One delivery per edge of the printed matrix: 1 + 2 + 2 + 2 + 2.
    EXPECT_EQ(d.size(), 9u);
    for (const auto& x : d) EXPECT_TRUE(six_uav_example().communicates(x.receiver, x.sender));
    EXPECT_TRUE(bus.take_inbox(0).empty());
    EXPECT_EQ(bus.take_inbox(5).size(), 2u);
}

TEST(Bus, LeaderBroadcastReachesAllFollowers) {
    SwarmBus bus(chain_topology(6, 2));
    for (AgentId i = 1; i < 6; ++i) bus.subscribe(i, topics::kAssignment);
    bus.publish(topics::kAssignment, 0, 3, AssignmentTable{});
    EXPECT_EQ(bus.deliver(4).size(), 5u);
}

TEST(Bus, GroundStationReachesEveryone) {
    SwarmBus bus(six_uav_example());
    for (AgentId i = 0; i < 6; ++i) bus.subscribe(i, "/*/cmd_vel");
    for (AgentId i = 0; i < 6; ++i) bus.publish(topics::cmd_vel(i), kGroundStation, 0, LeaderVelocity{Vec3(1, 0, 0)});
    // Each agent also matches the others' cmd_vel topics: 6 x 6.
    EXPECT_EQ(bus.deliver(1).size(), 36u);
}

TEST(Bus, DeliveryOrderIsTopicSenderSeq) {
    SwarmBus bus(chain_topology(4, 3));
    bus.subscribe(3, "/*/state");
    bus.publish(topics::state(2), 2, 0, report(2));
    bus.publish(topics::state(0), 0, 0, report(0));
    bus.publish(topics::state(1), 1, 0, report(1));
    bus.publish(topics::state(0), 0, 0, report(0));
    const auto d = bus.deliver(1);
    ASSERT_EQ(d.size(), 4u);
    EXPECT_EQ(d[0].topic, "/uav1/state");
    EXPECT_EQ(d[1].topic, "/uav1/state");
    EXPECT_LT(d[0].seq, d[1].seq);
    EXPECT_EQ(d[2].topic, "/uav2/state");
    EXPECT_EQ(d[3].topic, "/uav3/state");
}

TEST(Bus, RejectsUnknownSenderAndBadTopic) {
    SwarmBus bus(chain_topology(2, 1));
    EXPECT_THROW(bus.publish("/uav9/state", 8, 0, report(8)), UnknownSender);
    EXPECT_THROW(bus.publish("no-slash", 0, 0, report(0)), std::invalid_argument);
}

TEST(RelativePositions, Cases) {
    std::vector<AgentState> two{{0, {0, 0, 0}, {}}, {1, {3, 0, 0}, {}}};
    const auto r = relative_positions(two, 0);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].observer, 0u);
    EXPECT_EQ(r[0].neighbor, 1u);
    EXPECT_EQ(r[0].r, Vec3(3, 0, 0));
    EXPECT_TRUE(relative_positions(two, 0, 2.0).empty());
    EXPECT_EQ(relative_positions(two, 0, 3.0).size(), 1u);  // inclusive
    std::vector<AgentState> alone{{0, {1, 1, 1}, {}}};
    EXPECT_TRUE(relative_positions(alone, 0).empty());
}

TEST(Audit, ForgedDeliveryIsFlagged) {
    const std::vector<Delivery> forged{{topics::state(5), 5, 0, 0, 3, 4}};
    const auto v = audit(forged, six_uav_example());
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].message.find("uav6"), std::string::npos);
    EXPECT_NE(v[0].message.find("uav1"), std::string::npos);
}

TEST(Audit, LatencyAndExemptions) {
    const std::vector<Delivery> ok{{topics::state(0), 0, 1, 0, 3, 4},
                                   {topics::kAssignment, 0, 5, 1, 3, 4},
                                   {topics::cmd_vel(0), kGroundStation, 0, 2, 3, 4}};
    EXPECT_TRUE(audit(ok, six_uav_example()).empty());
    const std::vector<Delivery> late{{topics::state(0), 0, 1, 0, 3, 5}};
    EXPECT_EQ(audit(late, six_uav_example()).size(), 1u);
}

TEST(Audit, EmptyLogIsClean) { EXPECT_TRUE(audit(TelemetryLog{}, six_uav_example()).empty()); }
