#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmsim/engine.hpp"

namespace swarmsim::gateway {

inline constexpr std::uint16_t kDefaultPort = 8765;
inline constexpr const char* kPortEnv = "SWARMSIM_PORT";

/// SWARMSIM_PORT when set, else kDefaultPort. Throws ConfigError on junk.
std::uint16_t default_port();

struct AssignmentNote {
    Tick tick = 0;
    std::string formation;
};

/// {"type": "state_snapshot", ...}; see docs/wire-protocol.md.
json state_message(const WorldSnapshot& snap, AgentId leader, const std::optional<AssignmentNote>& last_assignment);

/// Client-side encoding of a command, as sent over the socket.
json command_message(const SwarmCommand& command, const json& id = nullptr);

/// Parses one client message and, when valid, queues it on the engine.
/// Returns the ack or error reply. Never touches engine state directly, so
/// it may run on any thread.
class CommandEndpoint {
public:
    explicit CommandEndpoint(Simulation& sim) : sim_(sim) {}
    json handle(std::string_view text);

private:
    Simulation& sim_;
};

/// Feeds a command script through a CommandEndpoint from the tick hook, so
/// commands take the same wire path a live client would use.
class ScriptDriver {
public:
    ScriptDriver(CommandEndpoint& endpoint, std::vector<ScheduledCommand> script);
    void on_tick(const Simulation& sim);
    const std::vector<json>& replies() const noexcept { return replies_; }

private:
    CommandEndpoint& endpoint_;
    std::vector<ScheduledCommand> script_;
    std::size_t next_ = 0;
    std::vector<json> replies_;
};

class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = kDefaultPort;  // 0 picks a free port
    std::filesystem::path static_dir;   // console-ui bundle; optional
    bool handle_signals = false;        // SIGINT/SIGTERM request a stop
};

/// HTTP + WebSocket front end on one port. The engine thread calls on_tick;
/// all socket work happens on the server's own thread.
class Server {
public:
    /// Binds immediately; throws GatewayError when the port is taken.
    Server(Simulation& sim, ServerOptions options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const;
    void start();
    void stop();

    void on_tick(const Simulation& sim);

    struct Impl;

private:
    std::shared_ptr<Impl> impl_;
};

}  // namespace swarmsim::gateway
