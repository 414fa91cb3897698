// Python bindings. Structured values cross the boundary as plain dicts and
// lists, round-tripped through the stdlib json module.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swarmsim/assignment.hpp"
#include "swarmsim/avoidance.hpp"
#include "swarmsim/engine.hpp"

namespace py = pybind11;
using namespace swarmsim;

namespace {

json to_json(const py::handle& obj) {
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return json::parse(text);
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ScenarioConfig config_from(const py::object& source) {
    if (py::isinstance<py::dict>(source)) return parse_scenario(to_json(source)).config;
    return load_scenario(py::str(source).cast<std::string>()).config;
}

py::dict summarize(const RunResult& result, const TelemetryLog& log) {
    py::dict out;
    out["stop_reason"] = std::string(stop_reason_name(result.reason));
    out["halt_message"] = result.halt_message;
    json last_snapshot = nullptr;
    json detection = nullptr;
    Tick last_tick = 0;
    std::map<std::string, std::size_t> violations;
    for (const auto& ev : log.events()) {
        if (ev.kind == EventKind::Snapshot) {
            last_snapshot = ev.data;
            last_tick = ev.tick;
        } else if (ev.kind == EventKind::Detection && detection.is_null()) {
            detection = ev.data;
        } else if (ev.kind == EventKind::Violation) {
            ++violations[ev.data.value("type", "")];
        }
    }
    out["ticks"] = last_tick;
    out["final"] = to_py(last_snapshot);
    out["detection"] = to_py(detection);
    out["violations"] = violations;
    out["events"] = log.size();
    return out;
}

py::dict run(const py::object& source, std::optional<std::uint64_t> seed, std::optional<Tick> max_ticks,
             std::optional<std::string> log_path, std::optional<py::list> script) {
    const auto config = config_from(source);
    RunOptions opts;
    opts.seed = seed;
    opts.tick_limit = max_ticks;
    if (script) opts.script = commands_from_json(to_json(*script));
    RunOutcome outcome;
    {
        py::gil_scoped_release release;
        outcome = run_scenario(config, opts);
    }
    if (log_path) outcome.log.save(*log_path);
    auto out = summarize(outcome.result, outcome.log);
    out["scenario_hash"] = outcome.log.header().scenario_hash;
    return out;
}

py::dict replay_log(const std::string& path) {
    const auto log = TelemetryLog::load(path);
    ReplayReport report;
    {
        py::gil_scoped_release release;
        report = replay(log);
    }
    py::dict out;
    out["compared"] = report.compared;
    out["ok"] = report.ok();
    if (report.first_divergence) {
        out["tick"] = report.first_divergence->tick;
        out["detail"] = report.first_divergence->detail;
    }
    return out;
}

py::dict curves(const std::string& path, const std::string& axis) {
    const auto table = export_curves(TelemetryLog::load(path), axis_from_name(axis));
    py::dict out;
    out["tick"] = table.ticks;
    for (std::size_t a = 0; a + 1 < table.columns.size(); ++a) out[py::str(table.columns[a + 1])] = table.column(a);
    return out;
}

py::tuple solve_matrix(const std::vector<std::vector<double>>& rows) {
    const auto a = solve(CostMatrix::from_rows(rows));
    return py::make_tuple(a.permutation, a.total_cost);
}

std::vector<double> avoid(const std::vector<double>& r, double b, double kp) {
    if (r.size() != 3) throw py::value_error("r must have 3 components");
    AvoidanceConfig cfg;
    cfg.range = b;
    cfg.kp = kp;
    const Vec3 a = avoidance_term({r[0], r[1], r[2]}, cfg);
    return {a.x(), a.y(), a.z()};
}

}  // namespace

PYBIND11_MODULE(_swarmsim, m) {
    m.doc() = "Deterministic lockstep UAV swarm simulator";

    // Translators run newest first, so the ScenarioError mapping goes last.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const CommandError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const ReplayRefused& e) {
            py::set_error(PyExc_ValueError, e.what());
        }
    });
    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);

    m.def("load_scenario", [](const py::object& source) { return to_py(config_from(source).to_json()); },
          py::arg("source"), "Validate a scenario (path or dict) and return it fully resolved.");
    m.def("scenario_hash", [](const py::object& doc) { return scenario_hash(to_json(doc)); }, py::arg("scenario"));
    m.def("run", &run, py::arg("source"), py::kw_only(), py::arg("seed") = py::none(),
          py::arg("max_ticks") = py::none(), py::arg("log_path") = py::none(), py::arg("script") = py::none(),
          "Run headless at free-run speed and summarize.");
    m.def("replay", &replay_log, py::arg("log_path"));
    m.def("export_curves", &curves, py::arg("log_path"), py::arg("axis") = "z");
    m.def("solve_assignment", &solve_matrix, py::arg("cost"), "Min-cost assignment: (permutation, total).");
    m.def("chain_topology", [](std::size_t n, std::size_t fan_in) { return chain_topology(n, fan_in).rows(); },
          py::arg("n"), py::arg("fan_in"));
    m.def("six_uav_example", [] { return six_uav_example().rows(); });
    m.def("avoidance_term", &avoid, py::arg("r"), py::arg("b") = 3.0, py::arg("kp") = 1.0);
}
