// swarmsim: run, serve, replay and export swarm scenarios.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "swarmsim/engine.hpp"
#include "swarmsim/gateway.hpp"

using namespace swarmsim;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kSeparation = 2, kMissionIncomplete = 3 };

double parse_speed(const std::string& text) {
    if (text == "free") return kFreeRun;
    std::size_t used = 0;
    double f = 0.0;
    try {
        f = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(f > 0.0) || !std::isfinite(f))
        throw ConfigError("--speed must be a positive number or 'free', got '" + text + "'");
    return f;
}

struct RunArgs {
    std::string scenario;
    std::string log_path;
    std::optional<std::uint64_t> seed;
    std::string speed;
    std::string script;
    std::optional<Tick> max_ticks;
};

LoadedScenario load_or_report(const std::string& path) {
    auto loaded = load_scenario(path);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    return loaded;
}

RunOptions options_from(const RunArgs& args) {
    RunOptions opts;
    opts.seed = args.seed;
    if (!args.speed.empty()) opts.speed_factor = parse_speed(args.speed);
    if (!args.script.empty()) opts.script = load_command_script(args.script);
    opts.tick_limit = args.max_ticks;
    return opts;
}

std::size_t count_violations(const TelemetryLog& log, std::string_view type) {
    std::size_t n = 0;
    for (const auto& ev : log.events())
        if (ev.kind == EventKind::Violation && ev.data.value("type", "") == type) ++n;
    return n;
}

int summarize(const ScenarioConfig& config, const RunResult& result, const TelemetryLog& log) {
    const SimEvent* last = nullptr;
    const SimEvent* detection = nullptr;
    for (const auto& ev : log.events()) {
        if (ev.kind == EventKind::Snapshot) last = &ev;
        if (ev.kind == EventKind::Detection && !detection) detection = &ev;
    }
    std::cout << "stop: " << stop_reason_name(result.reason) << "\n";
    if (last) {
        std::cout << "ticks: " << last->tick << " (t=" << static_cast<double>(last->tick) * config.dt << " s)\n";
        if (!last->data.value("formation", "").empty())
            std::cout << "formation: " << last->data["formation"].get<std::string>()
                      << "  max error: " << last->data["max_error"].get<double>() << " m\n";
    }
    if (detection)
        std::cout << "detection: uav" << detection->data["detector"] << " at tick " << detection->tick << "\n";
    const auto separations = count_violations(log, "separation");
    std::cout << "separation violations: " << separations << "\n";

    if (result.reason == StopReason::Halted) {
        std::cerr << "error: engine halted: " << result.halt_message << "\n";
        return kFailure;
    }
    if (separations > 0) return kSeparation;
    if (config.mission && !detection) return kMissionIncomplete;
    return kOk;
}

int cmd_run(const RunArgs& args) {
    const auto loaded = load_or_report(args.scenario);
    auto outcome = run_scenario(loaded.config, options_from(args));
    if (!args.log_path.empty()) {
        outcome.log.save(args.log_path);
        std::cout << "log: " << args.log_path << " (" << outcome.log.size() << " events)\n";
    }
    return summarize(loaded.config, outcome.result, outcome.log);
}

int cmd_serve(const RunArgs& args, std::optional<std::uint16_t> port, const std::string& static_dir,
              const std::string& bind) {
    const auto loaded = load_or_report(args.scenario);
    RunOptions opts = options_from(args);
    // A console needs wall-clock pacing; free-run only when asked for.
    if (!opts.speed_factor && loaded.config.speed_factor <= 0.0) opts.speed_factor = 1.0;

    Simulation sim(loaded.config, opts);
    gateway::ServerOptions sopts;
    sopts.address = bind;
    sopts.port = port ? *port : gateway::default_port();
    sopts.static_dir = static_dir;
    sopts.handle_signals = true;
    gateway::Server server(sim, sopts);
    server.start();
    std::cout << "serving " << loaded.config.name << " on http://" << bind << ":" << server.port()
              << "/ (WebSocket on any path)" << std::endl;

    const auto result = sim.run([&server](const Simulation& s) { server.on_tick(s); });
    server.stop();
    auto log = sim.take_log();
    if (!args.log_path.empty()) log.save(args.log_path);
    return summarize(loaded.config, result, log);
}

int cmd_replay(const std::string& log_path, const std::string& scenario_path) {
    const auto log = TelemetryLog::load(log_path);
    std::optional<json> expected;
    if (!scenario_path.empty()) expected = load_scenario(scenario_path).config.to_json();
    try {
        const auto report = replay(log, expected ? &*expected : nullptr);
        std::cout << "compared " << report.compared << " snapshots\n";
        if (report.ok()) {
            std::cout << "replay: identical\n";
            return kOk;
        }
        std::cout << "replay: diverged at tick " << report.first_divergence->tick << ": "
                  << report.first_divergence->detail << "\n";
        return kFailure;
    } catch (const ReplayRefused& e) {
        std::cerr << "error: replay refused: " << e.what() << "\n";
        return kFailure;
    }
}

int cmd_export(const std::string& log_path, const std::string& axis, const std::string& out_path) {
    const auto table = export_curves(TelemetryLog::load(log_path), axis_from_name(axis));
    if (out_path.empty() || out_path == "-") {
        std::cout << table.to_tsv();
    } else {
        std::ofstream(out_path) << table.to_tsv();
    }
    return kOk;
}

int cmd_validate(const std::string& path) {
    const auto loaded = load_or_report(path);
    std::cout << path << ": ok (" << loaded.config.agent_count << " agents, hash "
              << scenario_hash(loaded.config.to_json()).substr(0, 12) << ")\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic lockstep UAV swarm simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto add_run_flags = [&run_args](CLI::App* sub) {
        sub->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
        sub->add_option("--log", run_args.log_path, "Write the telemetry log here");
        sub->add_option("--seed", run_args.seed, "Override the scenario seed");
        sub->add_option("--speed", run_args.speed, "Pacing factor (> 0) or 'free'");
        sub->add_option("--script", run_args.script, "Command script (JSON array of {tick, kind, ...})");
        sub->add_option("--max-ticks", run_args.max_ticks, "Override the tick limit");
    };

    auto* run = app.add_subcommand("run", "Run a scenario headless to its stop condition");
    add_run_flags(run);

    auto* serve = app.add_subcommand("serve", "Run paced and expose the WebSocket gateway");
    add_run_flags(serve);
    std::optional<std::uint16_t> port;
    std::string static_dir = "console-ui/dist";
    std::string bind = "127.0.0.1";
    serve->add_option("--port", port, std::string("Listen port (default $") + gateway::kPortEnv + " or 8765)");
    serve->add_option("--static", static_dir, "console-ui bundle directory")->capture_default_str();
    serve->add_option("--bind", bind, "Bind address")->capture_default_str();

    auto* rep = app.add_subcommand("replay", "Re-run a log and compare every snapshot");
    std::string log_path, scenario_path;
    rep->add_option("log", log_path, "Telemetry log")->required();
    rep->add_option("--scenario", scenario_path, "Refuse unless the log came from this scenario");

    auto* exp = app.add_subcommand("export", "Export per-agent position curves as TSV");
    std::string axis = "z", out_path;
    exp->add_option("log", log_path, "Telemetry log")->required();
    exp->add_option("--axis", axis, "x, y or z")->capture_default_str();
    exp->add_option("--out", out_path, "Output file (default stdout)");

    auto* val = app.add_subcommand("validate", "Check a scenario file against the schema");
    std::string validate_path;
    val->add_option("scenario", validate_path, "Scenario JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_args);
        if (*serve) return cmd_serve(run_args, port, static_dir, bind);
        if (*rep) return cmd_replay(log_path, scenario_path);
        if (*exp) return cmd_export(log_path, axis, out_path);
        if (*val) return cmd_validate(validate_path);
    } catch (const ScenarioError& e) {
        std::cerr << "error: invalid scenario\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
