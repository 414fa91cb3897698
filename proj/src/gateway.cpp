#include "swarmsim/gateway.hpp"

#include <charconv>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace swarmsim::gateway {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

std::uint16_t default_port() {
    const char* env = std::getenv(kPortEnv);
    if (!env || !*env) return kDefaultPort;
    std::string_view s(env);
    unsigned value = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end != s.data() + s.size() || value == 0 || value > 65535)
        throw ConfigError(std::string(kPortEnv) + " must be a port number, got '" + env + "'");
    return static_cast<std::uint16_t>(value);
}

json state_message(const WorldSnapshot& snap, AgentId leader, const std::optional<AssignmentNote>& last_assignment) {
    json agents = json::array();
    for (const auto& a : snap.agents)
        agents.push_back({{"id", external_id(a.id)}, {"position", vec_to_json(a.position)},
                          {"velocity", vec_to_json(a.velocity)}});
    json detection = nullptr;
    if (snap.detection)
        detection = {{"agent", external_id(snap.detection->detector)},
                     {"tick", snap.detection->tick},
                     {"target", vec_to_json(snap.detection->target)}};
    json speed = std::isfinite(snap.speed_factor) ? json(snap.speed_factor) : json("free");
    json assignment = nullptr;
    if (last_assignment) assignment = {{"tick", last_assignment->tick}, {"formation", last_assignment->formation}};
    return {{"type", "state_snapshot"},
            {"tick", snap.tick},
            {"time", snap.sim_time},
            {"leader", external_id(leader)},
            {"agents", agents},
            {"formation", snap.formation},
            {"max_error", snap.max_error},
            {"mission", {{"status", mission_status_name(snap.mission)}, {"detection", detection}}},
            {"paused", snap.paused},
            {"speed_factor", speed},
            {"last_assignment", assignment}};
}

json command_message(const SwarmCommand& command, const json& id) {
    json msg = command_to_json(command);
    msg["type"] = "command";
    if (!id.is_null()) msg["id"] = id;
    return msg;
}

json CommandEndpoint::handle(std::string_view text) {
    json id = nullptr;
    auto error = [&id](std::string message) { return json{{"type", "error"}, {"id", id}, {"message", std::move(message)}}; };

    json msg = json::parse(text.begin(), text.end(), nullptr, false);
    if (msg.is_discarded()) return error("malformed JSON");
    if (!msg.is_object()) return error("message must be a JSON object");
    if (msg.contains("id")) id = msg["id"];
    if (msg.value("type", "") != "command") return error("unsupported message type; clients send only \"command\"");

    json body = msg;
    body.erase("type");
    body.erase("id");
    SwarmCommand command;
    try {
        command = command_from_json(body);
    } catch (const CommandError& e) {
        return error(e.what());
    }
    if (command.kind == SwarmCommand::Kind::SetFormation && !sim_.config().find_formation(command.formation))
        return error("unknown formation '" + command.formation + "'");

    sim_.submit(command);
    auto snap = sim_.published();
    return {{"type", "ack"}, {"id", id}, {"kind", body["kind"]}, {"tick", snap ? snap->tick : 0}};
}

ScriptDriver::ScriptDriver(CommandEndpoint& endpoint, std::vector<ScheduledCommand> script)
    : endpoint_(endpoint), script_(std::move(script)) {
    std::stable_sort(script_.begin(), script_.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
}

void ScriptDriver::on_tick(const Simulation& sim) {
    while (next_ < script_.size() && script_[next_].tick <= sim.tick()) {
        const json msg = command_message(script_[next_].command, next_);
        replies_.push_back(endpoint_.handle(msg.dump()));
        ++next_;
    }
}

namespace {

std::string_view mime_type(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".map") return "application/json";
    return "application/octet-stream";
}

class WsSession;

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
    Impl(Simulation& s, ServerOptions o) : sim(s), options(std::move(o)), endpoint(s), acceptor(ioc), heartbeat(ioc) {}

    Simulation& sim;
    ServerOptions options;
    CommandEndpoint endpoint;
    net::io_context ioc;
    tcp::acceptor acceptor;
    net::steady_timer heartbeat;
    std::unique_ptr<net::signal_set> signals;
    std::thread thread;

    // io thread only
    std::vector<std::weak_ptr<WsSession>> sessions;
    std::optional<AssignmentNote> last_assignment_io;
    std::shared_ptr<const std::string> last_sent;
    std::optional<bool> last_paused;

    // engine thread only
    std::size_t event_cursor = 0;
    std::optional<AssignmentNote> last_assignment;

    void accept();
    void tick_heartbeat();
    void broadcast(std::shared_ptr<const std::string> text);
    std::shared_ptr<const std::string> encode(const WorldSnapshot& snap, const std::optional<AssignmentNote>& note) const {
        return std::make_shared<const std::string>(state_message(snap, sim.config().leader, note).dump() + "\n");
    }
    http::response<http::string_body> handle_http(const http::request<http::string_body>& req);
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, std::shared_ptr<Server::Impl> owner)
        : ws_(std::move(socket)), owner_(std::move(owner)) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

    void send(std::shared_ptr<const std::string> text) {
        if (closed_) return;
        if (outbox_.size() >= kMaxQueued) return;  // slow client: drop rather than grow without bound
        outbox_.push_back(std::move(text));
        if (outbox_.size() == 1) do_write();
    }

private:
    static constexpr std::size_t kMaxQueued = 512;

    void on_accept(beast::error_code ec) {
        if (ec) return;
        owner_->sessions.push_back(weak_from_this());
        if (auto snap = owner_->sim.published()) send(owner_->encode(*snap, owner_->last_assignment_io));
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            closed_ = true;
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const json reply = owner_->endpoint.handle(line);
            send(std::make_shared<const std::string>(reply.dump() + "\n"));
        }
        do_read();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(net::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_write(ec);
        });
    }

    void on_write(beast::error_code ec) {
        if (ec) {
            closed_ = true;
            outbox_.clear();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<Server::Impl> owner_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> outbox_;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, std::shared_ptr<Server::Impl> owner)
        : stream_(std::move(socket)), owner_(std::move(owner)) {}

    void run() { do_read(); }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (websocket::is_upgrade(req_)) {
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), owner_)->run(std::move(req_));
            return;
        }
        res_ = std::make_shared<http::response<http::string_body>>(owner_->handle_http(req_));
        http::async_write(stream_, *res_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec || self->res_->need_eof()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    std::shared_ptr<Server::Impl> owner_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<http::response<http::string_body>> res_;
};

}  // namespace

http::response<http::string_body> Server::Impl::handle_http(const http::request<http::string_body>& req) {
    auto reply = [&req](http::status status, std::string body, std::string_view type) {
        http::response<http::string_body> res{status, req.version()};
        res.set(http::field::server, "swarmsim");
        res.set(http::field::content_type, std::string(type));
        res.keep_alive(req.keep_alive());
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));

    if (path == "/api/state" && req.method() == http::verb::get) {
        auto snap = sim.published();
        if (!snap) return reply(http::status::service_unavailable, "{}", "application/json");
        return reply(http::status::ok, state_message(*snap, sim.config().leader, last_assignment_io).dump(), "application/json");
    }
    if (path == "/api/command") {
        if (req.method() != http::verb::post)
            return reply(http::status::method_not_allowed, R"({"type":"error","message":"use POST"})", "application/json");
        const json out = endpoint.handle(req.body());
        const auto status = out["type"] == "ack" ? http::status::ok : http::status::bad_request;
        return reply(status, out.dump(), "application/json");
    }
    if (req.method() != http::verb::get && req.method() != http::verb::head)
        return reply(http::status::method_not_allowed, "method not allowed\n", "text/plain");

    if (options.static_dir.empty() || !std::filesystem::is_directory(options.static_dir))
        return reply(http::status::not_found, "console-ui bundle not present\n", "text/plain");
    if (path.empty() || path[0] != '/' || path.find("..") != std::string::npos)
        return reply(http::status::bad_request, "bad path\n", "text/plain");
    std::filesystem::path file = options.static_dir / path.substr(1);
    if (std::filesystem::is_directory(file)) file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) return reply(http::status::not_found, "not found\n", "text/plain");
    std::ostringstream body;
    body << in.rdbuf();
    auto res = reply(http::status::ok, body.str(), mime_type(file));
    if (req.method() == http::verb::head) res.body().clear();
    return res;
}

void Server::Impl::accept() {
    acceptor.async_accept(ioc, [self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
        if (!self->acceptor.is_open()) return;
        if (!ec) std::make_shared<HttpSession>(std::move(socket), self)->run();
        self->accept();
    });
}

void Server::Impl::broadcast(std::shared_ptr<const std::string> text) {
    last_sent = text;
    std::erase_if(sessions, [](const auto& w) { return w.expired(); });
    for (auto& w : sessions)
        if (auto s = w.lock()) s->send(text);
}

// Ticks stop while paused, so pause/resume changes reach clients from here.
void Server::Impl::tick_heartbeat() {
    heartbeat.expires_after(std::chrono::milliseconds(100));
    heartbeat.async_wait([self = shared_from_this()](beast::error_code ec) {
        if (ec) return;
        if (auto snap = self->sim.published()) {
            const bool paused = self->sim.paused();
            if (!self->last_paused || *self->last_paused != paused) {
                self->last_paused = paused;
                auto copy = std::make_shared<WorldSnapshot>(*snap);
                copy->paused = paused;
                self->broadcast(self->encode(*copy, self->last_assignment_io));
            }
        }
        self->tick_heartbeat();
    });
}

Server::Server(Simulation& sim, ServerOptions options) : impl_(std::make_shared<Impl>(sim, std::move(options))) {
    beast::error_code ec;
    const auto address = net::ip::make_address(impl_->options.address, ec);
    if (ec) throw GatewayError("bad bind address '" + impl_->options.address + "': " + ec.message());
    const tcp::endpoint where{address, impl_->options.port};
    impl_->acceptor.open(where.protocol(), ec);
    if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) impl_->acceptor.bind(where, ec);
    if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec)
        throw GatewayError("cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) +
                           ": " + ec.message());
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
    if (impl_->thread.joinable()) return;
    if (impl_->options.handle_signals) {
        impl_->signals = std::make_unique<net::signal_set>(impl_->ioc, SIGINT, SIGTERM);
        impl_->signals->async_wait([impl = impl_](beast::error_code ec, int) {
            if (!ec) impl->sim.request_stop();
        });
    }
    impl_->accept();
    impl_->tick_heartbeat();
    impl_->thread = std::thread([impl = impl_] { impl->ioc.run(); });
}

void Server::stop() {
    if (!impl_ || !impl_->thread.joinable()) return;
    // Let queued writes go out before tearing the loop down.
    std::promise<void> flushed;
    auto done = flushed.get_future();
    net::post(impl_->ioc, [&flushed] { flushed.set_value(); });
    done.wait_for(std::chrono::seconds(1));
    impl_->ioc.stop();
    impl_->thread.join();
}

void Server::on_tick(const Simulation& sim) {
    const auto& events = sim.log().events();
    for (; impl_->event_cursor < events.size(); ++impl_->event_cursor) {
        const auto& ev = events[impl_->event_cursor];
        if (ev.kind == EventKind::Assignment)
            impl_->last_assignment = AssignmentNote{ev.tick, ev.data.value("formation", "")};
    }
    const bool due = sim.tick() % sim.config().stream_every == 0;
    const bool fresh_assignment = impl_->last_assignment && impl_->last_assignment->tick + 1 == sim.tick();
    if (!due && !fresh_assignment) return;
    auto snap = sim.snapshot();
    auto note = impl_->last_assignment;
    net::post(impl_->ioc, [impl = impl_, snap, note] {
        impl->last_assignment_io = note;
        impl->broadcast(impl->encode(*snap, note));
    });
}

}  // namespace swarmsim::gateway
