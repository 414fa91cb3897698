#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "support.hpp"
#include "swarmsim/gateway.hpp"

using namespace swarmsim;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Clock = std::chrono::steady_clock;

class WsClient {
public:
    explicit WsClient(std::uint16_t port) {
        tcp::resolver resolver(ioc_);
        net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
        ws_.handshake("127.0.0.1:" + std::to_string(port), "/ws");
    }
    ~WsClient() {
        beast::error_code ec;
        ws_.close(websocket::close_code::normal, ec);
    }

    json read() {
        beast::flat_buffer buf;
        ws_.read(buf);
        last_text_ = beast::buffers_to_string(buf.data());
        return json::parse(last_text_);
    }
    void send(const json& msg) { ws_.write(net::buffer(msg.dump())); }
    void send_raw(const std::string& text) { ws_.write(net::buffer(text)); }
    const std::string& last_text() const { return last_text_; }

    /// Reads until pred holds; the engine streams often enough that this
    /// never blocks for long while it is running.
    json read_until(const std::function<bool(const json&)>& pred, double seconds = 5.0) {
        const auto deadline = Clock::now() + std::chrono::duration<double>(seconds);
        while (Clock::now() < deadline) {
            json msg = read();
            if (pred(msg)) return msg;
        }
        ADD_FAILURE() << "timed out waiting for message";
        return nullptr;
    }

private:
    net::io_context ioc_;
    websocket::stream<tcp::socket> ws_{ioc_};
    std::string last_text_;
};

http::response<http::string_body> http_request(std::uint16_t port, http::verb verb, const std::string& target,
                                               const std::string& body = {}) {
    net::io_context ioc;
    tcp::resolver resolver(ioc);
    beast::tcp_stream stream(ioc);
    stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
    http::request<http::string_body> req{verb, target, 11};
    req.set(http::field::host, "127.0.0.1");
    req.body() = body;
    req.prepare_payload();
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    http::read(stream, buf, res);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return res;
}

bool is_state(const json& m) { return m.value("type", "") == "state_snapshot"; }

/// A scenario served on an ephemeral port with the engine on its own thread.
struct Served {
    explicit Served(ScenarioConfig cfg, double speed = 2.0, std::filesystem::path static_dir = {})
        : sim(std::move(cfg), options(speed)), server(sim, server_options(std::move(static_dir))) {
        server.start();
        engine = std::thread([this] { result = sim.run([this](const Simulation& s) { server.on_tick(s); }); });
        // Wait for the first published state.
        const auto deadline = Clock::now() + std::chrono::seconds(5);
        while (!sim.published() && Clock::now() < deadline) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ~Served() {
        sim.request_stop();
        if (engine.joinable()) engine.join();
        server.stop();
    }

    static RunOptions options(double speed) {
        RunOptions o;
        o.speed_factor = speed;
        o.tick_limit = 1000000;
        return o;
    }
    static gateway::ServerOptions server_options(std::filesystem::path static_dir) {
        gateway::ServerOptions o;
        o.port = 0;
        o.static_dir = std::move(static_dir);
        return o;
    }

    Simulation sim;
    gateway::Server server;
    std::thread engine;
    RunResult result;
};

}  // namespace

TEST(Wire, StateMessageShape) {
    Simulation sim(testing_support::scenario("six_uav_t_diamond"));
    const auto msg = gateway::state_message(*sim.snapshot(), sim.config().leader, gateway::AssignmentNote{0, "T"});
    EXPECT_EQ(msg["type"], "state_snapshot");
    EXPECT_EQ(msg["tick"], 0);
    EXPECT_EQ(msg["time"], 0.0);
    EXPECT_EQ(msg["leader"], 1);
    ASSERT_EQ(msg["agents"].size(), 6u);
    EXPECT_EQ(msg["agents"][1]["id"], 2);
    EXPECT_EQ(msg["agents"][1]["position"], json::array({-2.0, 0.0, 0.0}));
    EXPECT_EQ(msg["agents"][1]["velocity"], json::array({0.0, 0.0, 0.0}));
    EXPECT_EQ(msg["formation"], "T");
    EXPECT_EQ(msg["mission"]["status"], "none");
    EXPECT_TRUE(msg["mission"]["detection"].is_null());
    EXPECT_EQ(msg["paused"], false);
    EXPECT_EQ(msg["speed_factor"], "free");
    EXPECT_EQ(msg["last_assignment"]["formation"], "T");
}

TEST(Wire, CommandMessage) {
    const auto msg = gateway::command_message(SwarmCommand::leader_velocity({1, 0, 0}), 7);
    EXPECT_EQ(msg, json::parse(R"({"type":"command","id":7,"kind":"leader_velocity","velocity":[1.0,0.0,0.0]})"));
}

TEST(Wire, EndpointRepliesAndQueues) {
    Simulation sim(testing_support::scenario("six_uav_t_diamond"));
    gateway::CommandEndpoint ep(sim);
    auto ack = ep.handle(R"({"type":"command","id":"a1","kind":"set_formation","name":"diamond"})");
    EXPECT_EQ(ack["type"], "ack");
    EXPECT_EQ(ack["id"], "a1");
    EXPECT_EQ(ack["kind"], "set_formation");

    for (const char* bad : {"not json", "[1]", R"({"type":"state_snapshot"})", R"({"type":"command","kind":"warp"})",
                            R"({"type":"command","kind":"set_formation","name":"hexagon"})",
                            R"({"type":"command","kind":"set_speed","factor":0})"}) {
        const auto err = ep.handle(bad);
        EXPECT_EQ(err["type"], "error") << bad;
        EXPECT_TRUE(err["message"].is_string());
    }
    EXPECT_EQ(ep.handle(R"({"type":"command","id":4,"kind":"warp"})")["id"], 4);

    sim.step();
    std::size_t commands = 0;
    for (const auto& e : sim.log().events()) commands += e.kind == EventKind::Command;
    EXPECT_EQ(commands, 1u);
}

TEST(Wire, DefaultPortFromEnvironment) {
    ::unsetenv(gateway::kPortEnv);
    EXPECT_EQ(gateway::default_port(), 8765);
    ::setenv(gateway::kPortEnv, "9123", 1);
    EXPECT_EQ(gateway::default_port(), 9123);
    ::setenv(gateway::kPortEnv, "banana", 1);
    EXPECT_THROW(gateway::default_port(), ConfigError);
    ::unsetenv(gateway::kPortEnv);
}

TEST(Gateway, StreamsStateSnapshots) {
    Served s(testing_support::scenario("six_uav_t_diamond"));
    WsClient ws(s.server.port());
    const auto first = ws.read_until(is_state);
    EXPECT_EQ(ws.last_text().back(), '\n');
    const auto second = ws.read_until(is_state);
    EXPECT_GT(second["tick"].get<Tick>(), first["tick"].get<Tick>());
    EXPECT_EQ(second["agents"].size(), 6u);
}

TEST(Gateway, PauseFreezesResumeContinues) {
    Served s(testing_support::scenario("six_uav_t_diamond"));
    WsClient ws(s.server.port());
    ws.read_until(is_state);

    ws.send(gateway::command_message(SwarmCommand::pause(), 1));
    const auto ack = ws.read_until([](const json& m) { return m["type"] == "ack"; });
    EXPECT_EQ(ack["id"], 1);
    const auto paused = ws.read_until([](const json& m) { return is_state(m) && m["paused"] == true; });
    const Tick frozen = paused["tick"];
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    const auto still = json::parse(http_request(s.server.port(), http::verb::get, "/api/state").body());
    EXPECT_EQ(still["tick"].get<Tick>(), frozen);
    EXPECT_EQ(still["paused"], true);

    ws.send(gateway::command_message(SwarmCommand::resume(), 2));
    const auto moving =
        ws.read_until([frozen](const json& m) { return is_state(m) && m["paused"] == false && m["tick"] > frozen; });
    EXPECT_FALSE(moving.is_null());
}

TEST(Gateway, FormationSwitchVisibleWithinTwoTicks) {
    Served s(testing_support::scenario("six_uav_t_diamond"), 1.0);
    WsClient ws(s.server.port());
    ws.read_until(is_state);
    ws.send(gateway::command_message(SwarmCommand::set_formation("diamond"), "f"));
    const auto ack = ws.read_until([](const json& m) { return m["type"] == "ack"; });
    const Tick at = ack["tick"];
    const auto seen = ws.read_until([](const json& m) {
        return is_state(m) && !m["last_assignment"].is_null() && m["last_assignment"]["formation"] == "diamond";
    });
    // Queued after tick `at` was published: taken at at, assigned at at + 1.
    EXPECT_LE(seen["last_assignment"]["tick"].get<Tick>(), at + 2);
    EXPECT_LE(seen["tick"].get<Tick>(), seen["last_assignment"]["tick"].get<Tick>() + 1);
}

TEST(Gateway, LeaderVelocityMovesLeader) {
    Served s(testing_support::scenario("six_uav_t_diamond"), 4.0);
    WsClient ws(s.server.port());
    const auto before = ws.read_until(is_state);
    const double x0 = before["agents"][0]["position"][0];
    ws.send(gateway::command_message(SwarmCommand::leader_velocity({1, 0, 0})));
    const auto after = ws.read_until([x0](const json& m) {
        return is_state(m) && m["agents"][0]["position"][0].get<double>() > x0 + 0.1;
    });
    EXPECT_FALSE(after.is_null());
}

TEST(Gateway, MalformedMessagesGetErrors) {
    Served s(testing_support::scenario("six_uav_t_diamond"));
    WsClient ws(s.server.port());
    ws.send_raw("{oops");
    const auto err = ws.read_until([](const json& m) { return m["type"] == "error"; });
    EXPECT_TRUE(err["message"].is_string());
    ws.send(json{{"type", "command"}, {"id", 9}, {"kind", "set_formation"}, {"name", "hexagon"}});
    const auto err2 = ws.read_until([](const json& m) { return m["type"] == "error"; });
    EXPECT_EQ(err2["id"], 9);
    // The connection survives.
    EXPECT_FALSE(ws.read_until(is_state).is_null());
}

TEST(Gateway, SpeedChangeReflected) {
    Served s(testing_support::scenario("six_uav_t_diamond"));
    WsClient ws(s.server.port());
    ws.send(gateway::command_message(SwarmCommand::set_speed(3.0)));
    EXPECT_FALSE(ws.read_until([](const json& m) { return is_state(m) && m["speed_factor"] == 3.0; }).is_null());
}

TEST(Gateway, BusyPortRefused) {
    Simulation sim(testing_support::scenario("six_uav_t_diamond"));
    gateway::ServerOptions opts;
    opts.port = 0;
    gateway::Server first(sim, opts);
    opts.port = first.port();
    EXPECT_THROW(gateway::Server(sim, opts), gateway::GatewayError);
}

TEST(Gateway, HttpStateAndCommand) {
    Served s(testing_support::scenario("six_uav_t_diamond"));
    const auto state = http_request(s.server.port(), http::verb::get, "/api/state");
    EXPECT_EQ(state.result(), http::status::ok);
    EXPECT_EQ(json::parse(state.body())["type"], "state_snapshot");

    const auto ok = http_request(s.server.port(), http::verb::post, "/api/command",
                                 R"({"type":"command","kind":"leader_velocity","velocity":[0,1,0]})");
    EXPECT_EQ(ok.result(), http::status::ok);
    EXPECT_EQ(json::parse(ok.body())["type"], "ack");

    const auto bad = http_request(s.server.port(), http::verb::post, "/api/command", "nope");
    EXPECT_EQ(bad.result(), http::status::bad_request);
    EXPECT_EQ(json::parse(bad.body())["type"], "error");

    EXPECT_EQ(http_request(s.server.port(), http::verb::get, "/api/command").result(), http::status::method_not_allowed);
}

TEST(Gateway, NoBundleIsA404) {
    Served s(testing_support::scenario("six_uav_t_diamond"), 2.0, "/nonexistent/console-ui/dist");
    const auto res = http_request(s.server.port(), http::verb::get, "/");
    EXPECT_EQ(res.result(), http::status::not_found);
    EXPECT_NE(res.body().find("console-ui bundle not present"), std::string::npos);
}

TEST(Gateway, ServesStaticBundle) {
    const auto dir = std::filesystem::temp_directory_path() / "swarmsim_static_test";
    std::filesystem::create_directories(dir / "assets");
    std::ofstream(dir / "index.html") << "<!doctype html><title>console</title>";
    std::ofstream(dir / "assets" / "app.js") << "console.log(1);";

    Served s(testing_support::scenario("six_uav_t_diamond"), 2.0, dir);
    const auto index = http_request(s.server.port(), http::verb::get, "/");
    EXPECT_EQ(index.result(), http::status::ok);
    EXPECT_EQ(index[http::field::content_type], "text/html");
    EXPECT_NE(index.body().find("console"), std::string::npos);

    const auto js = http_request(s.server.port(), http::verb::get, "/assets/app.js");
    EXPECT_EQ(js[http::field::content_type], "application/javascript");
    EXPECT_EQ(js.body(), "console.log(1);");

    EXPECT_EQ(http_request(s.server.port(), http::verb::get, "/missing.css").result(), http::status::not_found);
    EXPECT_EQ(http_request(s.server.port(), http::verb::get, "/../secret").result(), http::status::bad_request);
    std::filesystem::remove_all(dir);
}

TEST(Gateway, ScriptThroughEndpointMatchesHeadless) {
    auto cfg = testing_support::scenario("six_uav_t_diamond");
    const auto script = cfg.commands;  // set_formation at 50
    std::vector<ScheduledCommand> extra = script;
    extra.push_back({80, SwarmCommand::leader_velocity({0.5, 0, 0})});
    extra.push_back({90, SwarmCommand::pause()});
    extra.push_back({90, SwarmCommand::resume()});
    cfg.commands.clear();

    RunOptions opts;
    opts.tick_limit = 150;
    opts.script = extra;
    const auto headless = run_scenario(cfg, opts).log;

    RunOptions served_opts;
    served_opts.tick_limit = 150;
    Simulation sim(cfg, served_opts);
    gateway::CommandEndpoint endpoint(sim);
    gateway::ScriptDriver driver(endpoint, extra);
    gateway::ServerOptions sopts;
    sopts.port = 0;
    gateway::Server server(sim, sopts);
    server.start();
    sim.run([&](const Simulation& s) {
        driver.on_tick(s);
        server.on_tick(s);
    });
    server.stop();

    for (const auto& r : driver.replies()) EXPECT_EQ(r["type"], "ack") << r.dump();
    EXPECT_EQ(driver.replies().size(), extra.size());
    EXPECT_EQ(sim.log().serialize(), headless.serialize());
}
