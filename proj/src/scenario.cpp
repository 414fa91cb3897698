#include "swarmsim/scenario.hpp"
#include "swarmsim/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace swarmsim {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string out = "invalid scenario:";
    for (const auto& p : problems) out += "\n  " + p;
    return out;
}

/// Collects problems keyed by JSON pointer instead of stopping at the first.
class Reader {
public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    void fail(const std::string& ptr, const std::string& msg) { problems_.push_back((ptr.empty() ? "/" : ptr) + ": " + msg); }

    bool object(const json& j, const std::string& ptr) {
        if (j.is_object()) return true;
        fail(ptr, "expected an object");
        return false;
    }

    void allow_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : obj.items()) {
            if (!key.empty() && key.front() == '_') continue;  // "_comment" and friends
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
                fail(ptr + "/" + key, "unknown field");
        }
    }

    double number(const json& obj, const std::string& ptr, const char* key, double fallback, double lo, bool lo_open,
                  std::optional<double> hi = std::nullopt) {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj[key];
        const std::string at = ptr + "/" + key;
        if (!v.is_number()) {
            fail(at, "expected a number");
            return fallback;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x) || (lo_open ? x <= lo : x < lo) || (hi && x > *hi)) {
            std::ostringstream msg;
            msg << "value " << x << " must be " << (lo_open ? "> " : ">= ") << lo;
            if (hi) msg << " and <= " << *hi;
            fail(at, msg.str());
            return fallback;
        }
        return x;
    }

    std::uint64_t count(const json& obj, const std::string& ptr, const char* key, std::uint64_t fallback,
                        std::uint64_t lo) {
        if (!obj.contains(key)) return fallback;
        const auto& v = obj[key];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::uint64_t>() < lo) {
            fail(ptr + "/" + key, "expected an integer >= " + std::to_string(lo));
            return fallback;
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const json& obj, const std::string& ptr, const char* key, bool fallback) {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) {
            fail(ptr + "/" + key, "expected true or false");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    std::optional<Vec3> vec3(const json& v, const std::string& ptr) {
        if (!v.is_array() || v.size() != 3 ||
            !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
            fail(ptr, "expected [x, y, z]");
            return std::nullopt;
        }
        Vec3 out{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        if (!is_finite(out)) {
            fail(ptr, "coordinates must be finite");
            return std::nullopt;
        }
        return out;
    }

    std::optional<FormationSpec> formation(const json& j, const std::string& ptr) {
        if (!object(j, ptr)) return std::nullopt;
        allow_keys(j, ptr, {"name", "offsets"});
        FormationSpec spec;
        if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty()) {
            fail(ptr + "/name", "expected a non-empty string");
            return std::nullopt;
        }
        spec.name = j["name"].get<std::string>();
        if (!j.contains("offsets") || !j["offsets"].is_array()) {
            fail(ptr + "/offsets", "expected an array of [x, y, z]");
            return std::nullopt;
        }
        for (std::size_t k = 0; k < j["offsets"].size(); ++k) {
            auto v = vec3(j["offsets"][k], ptr + "/offsets/" + std::to_string(k));
            if (!v) return std::nullopt;
            spec.offsets.push_back(*v);
        }
        return spec;
    }

private:
    std::vector<std::string>& problems_;
};

void read_agents(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    const std::string ptr = "/agents";
    if (!doc.contains("agents")) {
        rd.fail(ptr, "required");
        return;
    }
    const auto& a = doc["agents"];
    if (!rd.object(a, ptr)) return;
    rd.allow_keys(a, ptr, {"count", "v_max", "leader", "initial_positions"});
    if (!a.contains("count")) rd.fail(ptr + "/count", "required");
    cfg.agent_count = rd.count(a, ptr, "count", 0, 1);
    cfg.max_speed = rd.number(a, ptr, "v_max", kDefaultMaxSpeed, 0.0, true);
    const auto leader = rd.count(a, ptr, "leader", 1, 1);
    if (cfg.agent_count > 0 && leader > cfg.agent_count)
        rd.fail(ptr + "/leader", "leader " + std::to_string(leader) + " is not one of the " +
                                     std::to_string(cfg.agent_count) + " agents");
    cfg.leader = static_cast<AgentId>(leader - 1);

    if (!a.contains("initial_positions")) {
        rd.fail(ptr + "/initial_positions", "required: a list of [x, y, z] or {\"random\": {...}}");
        return;
    }
    const auto& init = a["initial_positions"];
    const std::string iptr = ptr + "/initial_positions";
    if (init.is_array()) {
        for (std::size_t k = 0; k < init.size(); ++k)
            if (auto v = rd.vec3(init[k], iptr + "/" + std::to_string(k))) cfg.initial_positions.push_back(*v);
        if (cfg.agent_count > 0 && init.size() != cfg.agent_count)
            rd.fail(iptr, std::to_string(init.size()) + " positions for " + std::to_string(cfg.agent_count) + " agents");
    } else if (init.is_object() && init.contains("random")) {
        rd.allow_keys(init, iptr, {"random"});
        const auto& r = init["random"];
        if (!rd.object(r, iptr + "/random")) return;
        rd.allow_keys(r, iptr + "/random", {"center", "size", "min_spacing"});
        RandomPlacement place;
        if (r.contains("center"))
            if (auto c = rd.vec3(r["center"], iptr + "/random/center")) place.center = *c;
        place.size = rd.number(r, iptr + "/random", "size", 20.0, 0.0, true);
        place.min_spacing = rd.number(r, iptr + "/random", "min_spacing", 0.0, 0.0, false);
        cfg.random_start = place;
    } else {
        rd.fail(iptr, "expected a list of [x, y, z] or {\"random\": {\"center\": [...], \"size\": s}}");
    }
}

void read_topology(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    const std::string ptr = "/topology";
    json block = doc.contains("topology") ? doc["topology"] : json{{"preset", "chain"}, {"fan_in", 2}};
    if (!rd.object(block, ptr)) return;
    rd.allow_keys(block, ptr, {"preset", "fan_in", "matrix"});
    json source;
    if (block.contains("matrix")) {
        if (block.contains("preset")) rd.fail(ptr, "give either 'preset' or 'matrix', not both");
        const auto& m = block["matrix"];
        std::vector<std::vector<double>> rows;
        bool ok = m.is_array();
        for (std::size_t i = 0; ok && i < m.size(); ++i) {
            ok = m[i].is_array() && std::all_of(m[i].begin(), m[i].end(), [](const json& x) { return x.is_number(); });
            if (ok) rows.push_back(m[i].get<std::vector<double>>());
        }
        if (!ok) {
            rd.fail(ptr + "/matrix", "expected a row-major array of number rows");
            return;
        }
        try {
            cfg.topology = TopologyMatrix::from_rows(rows);
        } catch (const ConfigError& e) {
            rd.fail(ptr + "/matrix", e.what());
            return;
        }
        source = {{"matrix", m}};
    } else {
        const std::string preset = block.value("preset", "chain");
        if (preset == "chain") {
            const auto fan_in = rd.count(block, ptr, "fan_in", 2, 1);
            cfg.topology = chain_topology(cfg.agent_count, fan_in);
            source = {{"preset", "chain"}, {"fan_in", fan_in}};
        } else if (preset == "six_uav_example") {
            cfg.topology = six_uav_example();
            source = {{"preset", "six_uav_example"}};
        } else {
            rd.fail(ptr + "/preset", "unknown preset '" + preset + "' (chain, six_uav_example)");
            return;
        }
    }
    cfg.topology_source = source;
    if (cfg.agent_count > 0 && cfg.topology.size() != cfg.agent_count) {
        rd.fail(ptr, "topology is " + std::to_string(cfg.topology.size()) + "x" + std::to_string(cfg.topology.size()) +
                         " but there are " + std::to_string(cfg.agent_count) + " agents");
        return;
    }
    if (cfg.leader < cfg.topology.size()) {
        for (const auto& v : validate(cfg.topology, cfg.leader)) rd.fail(ptr, v.message);
    }
}

void read_formations(Reader& rd, const json& doc, ScenarioConfig& cfg, const std::filesystem::path& base_dir) {
    const std::string ptr = "/formation";
    const json block = doc.contains("formation") ? doc["formation"] : json::object();
    if (!rd.object(block, ptr)) return;
    rd.allow_keys(block, ptr, {"gain", "d_min", "builtin", "files", "inline", "initial", "assign_initial"});
    cfg.gain = rd.number(block, ptr, "gain", 1.0, 0.0, true);
    cfg.min_separation = rd.number(block, ptr, "d_min", kDefaultMinSeparation, 0.0, false);
    cfg.assign_initial = rd.boolean(block, ptr, "assign_initial", true);

    if (rd.boolean(block, ptr, "builtin", true)) {
        for (auto& f : builtin_formations(cfg.agent_count)) cfg.formations.push_back(std::move(f));
    }
    if (block.contains("files")) {
        if (!block["files"].is_array()) {
            rd.fail(ptr + "/files", "expected an array of paths");
        } else {
            for (std::size_t k = 0; k < block["files"].size(); ++k) {
                const auto& f = block["files"][k];
                const std::string at = ptr + "/files/" + std::to_string(k);
                if (!f.is_string()) {
                    rd.fail(at, "expected a path string");
                    continue;
                }
                std::filesystem::path path = f.get<std::string>();
                if (path.is_relative()) path = base_dir / path;
                try {
                    cfg.formations.push_back(load_formation_file(path));
                } catch (const ConfigError& e) {
                    rd.fail(at, e.what());
                }
            }
        }
    }
    if (block.contains("inline")) {
        if (!block["inline"].is_array()) {
            rd.fail(ptr + "/inline", "expected an array of {name, offsets}");
        } else {
            for (std::size_t k = 0; k < block["inline"].size(); ++k)
                if (auto f = rd.formation(block["inline"][k], ptr + "/inline/" + std::to_string(k)))
                    cfg.formations.push_back(std::move(*f));
        }
    }

    std::set<std::string> names;
    for (std::size_t k = 0; k < cfg.formations.size(); ++k) {
        const auto& f = cfg.formations[k];
        const std::string at = ptr + " '" + f.name + "'";
        if (!names.insert(f.name).second) rd.fail(at, "defined more than once");
        if (cfg.agent_count > 0 && f.size() != cfg.agent_count)
            rd.fail(at, "has " + std::to_string(f.size()) + " offsets but there are " +
                            std::to_string(cfg.agent_count) + " agents");
        for (const auto& p : check_formation(f, cfg.min_separation)) rd.fail(at, p);
    }

    if (block.contains("initial") && !block["initial"].is_null()) {
        if (!block["initial"].is_string()) {
            rd.fail(ptr + "/initial", "expected a formation name");
        } else {
            cfg.initial_formation = block["initial"].get<std::string>();
            if (!names.count(*cfg.initial_formation))
                rd.fail(ptr + "/initial", "no formation named '" + *cfg.initial_formation + "'");
        }
    }
}

void read_avoidance(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    const std::string ptr = "/avoidance";
    const json block = doc.contains("avoidance") ? doc["avoidance"] : json::object();
    if (!rd.object(block, ptr)) return;
    rd.allow_keys(block, ptr, {"enabled", "b", "kp", "literal_branch", "separation_threshold"});
    cfg.avoidance.enabled = rd.boolean(block, ptr, "enabled", true);
    cfg.avoidance.range = rd.number(block, ptr, "b", 3.0, 0.0, true);
    cfg.avoidance.kp = rd.number(block, ptr, "kp", 1.0, 0.0, true);
    cfg.avoidance.literal_branch = rd.boolean(block, ptr, "literal_branch", false);
    cfg.separation_threshold = rd.number(block, ptr, "separation_threshold", 0.5 * cfg.avoidance.range, 0.0, false);
}

void read_mission(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    if (!doc.contains("mission") || doc["mission"].is_null()) return;
    const std::string ptr = "/mission";
    const auto& m = doc["mission"];
    if (!rd.object(m, ptr)) return;
    rd.allow_keys(m, ptr, {"region", "swath", "target", "p_detect", "footprint_radius", "accept_radius"});
    MissionConfig mc;
    if (!m.contains("region") || !rd.object(m["region"], ptr + "/region")) {
        if (!m.contains("region")) rd.fail(ptr + "/region", "required");
        return;
    }
    const auto& r = m["region"];
    const std::string rptr = ptr + "/region";
    rd.allow_keys(r, rptr, {"origin", "width", "height", "altitude"});
    if (r.contains("origin")) {
        const auto& o = r["origin"];
        if (o.is_array() && o.size() == 2 && o[0].is_number() && o[1].is_number()) {
            mc.region.x0 = o[0].get<double>();
            mc.region.y0 = o[1].get<double>();
        } else {
            rd.fail(rptr + "/origin", "expected [x, y]");
        }
    }
    for (const char* key : {"width", "height"})
        if (!r.contains(key)) rd.fail(rptr + "/" + key, "required");
    mc.region.width = rd.number(r, rptr, "width", 1.0, 0.0, true);
    mc.region.height = rd.number(r, rptr, "height", 1.0, 0.0, true);
    mc.region.altitude = rd.number(r, rptr, "altitude", 5.0, 0.0, true);
    mc.swath = rd.number(m, ptr, "swath", 5.0, 0.0, true);
    mc.p_detect = rd.number(m, ptr, "p_detect", 0.9, 0.0, true, 1.0);
    mc.footprint_radius = rd.number(m, ptr, "footprint_radius", 5.0, 0.0, true);
    mc.accept_radius = rd.number(m, ptr, "accept_radius", kDefaultAcceptRadius, 0.0, true);
    if (m.contains("target") && m["target"] != "random") {
        const auto& t = m["target"];
        if (t.is_array() && t.size() == 2 && t[0].is_number() && t[1].is_number()) {
            mc.target = Vec3{t[0].get<double>(), t[1].get<double>(), 0.0};
        } else {
            rd.fail(ptr + "/target", "expected [x, y] or \"random\"");
        }
    }
    cfg.mission = mc;
}

void read_stop_and_telemetry(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    const json stop = doc.contains("stop") ? doc["stop"] : json::object();
    if (rd.object(stop, "/stop")) {
        rd.allow_keys(stop, "/stop", {"max_ticks", "max_time", "on_mission_complete"});
        if (stop.contains("max_ticks")) cfg.stop.max_ticks = rd.count(stop, "/stop", "max_ticks", 0, 0);
        if (stop.contains("max_time")) cfg.stop.max_time = rd.number(stop, "/stop", "max_time", 0.0, 0.0, false);
        cfg.stop.on_mission_complete = rd.boolean(stop, "/stop", "on_mission_complete", true);
    }
    const json tel = doc.contains("telemetry") ? doc["telemetry"] : json::object();
    if (rd.object(tel, "/telemetry")) {
        rd.allow_keys(tel, "/telemetry", {"snapshot_every", "stream_every"});
        cfg.snapshot_every = rd.count(tel, "/telemetry", "snapshot_every", 1, 1);
        cfg.stream_every = rd.count(tel, "/telemetry", "stream_every", 5, 1);
    }
}

void read_commands(Reader& rd, const json& doc, ScenarioConfig& cfg) {
    if (!doc.contains("commands")) return;
    try {
        cfg.commands = commands_from_json(doc["commands"]);
    } catch (const CommandError& e) {
        rd.fail("/commands", e.what());
        return;
    }
    for (std::size_t k = 0; k < cfg.commands.size(); ++k) {
        const auto& c = cfg.commands[k].command;
        if (c.kind == SwarmCommand::Kind::SetFormation && !cfg.find_formation(c.formation))
            rd.fail("/commands", "set_formation refers to unknown formation '" + c.formation + "'");
    }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

const FormationSpec* ScenarioConfig::find_formation(const std::string& formation) const {
    for (const auto& f : formations)
        if (f.name == formation) return &f;
    return nullptr;
}

std::optional<Tick> ScenarioConfig::tick_limit() const {
    std::optional<Tick> limit = stop.max_ticks;
    if (stop.max_time) {
        const auto by_time = static_cast<Tick>(std::llround(*stop.max_time / dt));
        limit = limit ? std::min(*limit, by_time) : by_time;
    }
    return limit;
}

json ScenarioConfig::to_json() const {
    json agents{{"count", agent_count}, {"v_max", max_speed}, {"leader", leader + 1}};
    if (random_start) {
        json center = json::array({random_start->center.x(), random_start->center.y(), random_start->center.z()});
        agents["initial_positions"] = json{{"random", json{{"center", center}, {"size", random_start->size},
                                                          {"min_spacing", random_start->min_spacing}}}};
    } else {
        json pos = json::array();
        for (const auto& p : initial_positions) pos.push_back(json::array({p.x(), p.y(), p.z()}));
        agents["initial_positions"] = pos;
    }

    json inline_formations = json::array();
    for (const auto& f : formations) {
        json offs = json::array();
        for (const auto& o : f.offsets) offs.push_back(json::array({o.x(), o.y(), o.z()}));
        inline_formations.push_back({{"name", f.name}, {"offsets", offs}});
    }
    json formation{{"gain", gain},
                   {"d_min", min_separation},
                   {"builtin", false},
                   {"inline", inline_formations},
                   {"assign_initial", assign_initial},
                   {"initial", initial_formation ? json(*initial_formation) : json(nullptr)}};

    json avoid{{"enabled", avoidance.enabled},
               {"b", avoidance.range},
               {"kp", avoidance.kp},
               {"literal_branch", avoidance.literal_branch},
               {"separation_threshold", separation_threshold}};

    json stop_block{{"on_mission_complete", stop.on_mission_complete}};
    if (stop.max_ticks) stop_block["max_ticks"] = *stop.max_ticks;
    if (stop.max_time) stop_block["max_time"] = *stop.max_time;

    json cmds = json::array();
    for (const auto& c : commands) {
        json entry = command_to_json(c.command);
        entry["tick"] = c.tick;
        cmds.push_back(entry);
    }

    json doc{{"schema_version", kScenarioSchemaVersion},
             {"name", name},
             {"dt", dt},
             {"seed", seed},
             {"speed_factor", speed_factor},
             {"agents", agents},
             {"topology", topology_source},
             {"formation", formation},
             {"avoidance", avoid},
             {"stop", stop_block},
             {"telemetry", {{"snapshot_every", snapshot_every}, {"stream_every", stream_every}}},
             {"commands", cmds}};
    if (mission) {
        const auto& m = *mission;
        doc["mission"] = {{"region",
                           {{"origin", json::array({m.region.x0, m.region.y0})},
                            {"width", m.region.width},
                            {"height", m.region.height},
                            {"altitude", m.region.altitude}}},
                          {"swath", m.swath},
                          {"target", m.target ? json::array({m.target->x(), m.target->y()}) : json("random")},
                          {"p_detect", m.p_detect},
                          {"footprint_radius", m.footprint_radius},
                          {"accept_radius", m.accept_radius}};
    }
    return doc;
}

std::vector<std::string> initial_separation_warnings(const std::vector<Vec3>& positions, double min_separation) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            const double d = (positions[i] - positions[j]).norm();
            if (d < min_separation) {
                out.push_back("uav" + std::to_string(i + 1) + " and uav" + std::to_string(j + 1) + " start " +
                              std::to_string(d) + " m apart, closer than d_min " + std::to_string(min_separation));
            }
        }
    }
    return out;
}

LoadedScenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> problems;
    Reader rd(problems);
    LoadedScenario out;
    auto& cfg = out.config;
    if (!rd.object(doc, "")) throw ScenarioError(problems);

    rd.allow_keys(doc, "", {"schema_version", "name", "dt", "seed", "speed_factor", "agents", "topology", "formation",
                            "avoidance", "mission", "stop", "telemetry", "commands"});
    if (!doc.contains("schema_version")) {
        rd.fail("/schema_version", "required");
    } else if (doc["schema_version"] != kScenarioSchemaVersion) {
        rd.fail("/schema_version", "unsupported version, expected " + std::to_string(kScenarioSchemaVersion));
    }
    if (doc.contains("name")) {
        if (doc["name"].is_string()) cfg.name = doc["name"].get<std::string>();
        else rd.fail("/name", "expected a string");
    }
    cfg.dt = rd.number(doc, "", "dt", 0.02, 0.0, true);
    cfg.seed = rd.count(doc, "", "seed", 0, 0);
    cfg.speed_factor = rd.number(doc, "", "speed_factor", 0.0, 0.0, false);

    read_agents(rd, doc, cfg);
    read_topology(rd, doc, cfg);
    read_formations(rd, doc, cfg, base_dir);
    read_avoidance(rd, doc, cfg);
    read_mission(rd, doc, cfg);
    read_stop_and_telemetry(rd, doc, cfg);
    read_commands(rd, doc, cfg);

    // Euler on the consensus law is stable only while gain * dt * in-degree < 1.
    const double step_gain = cfg.gain * cfg.dt * cfg.topology.max_weighted_in_degree();
    if (step_gain >= 1.0) {
        rd.fail("/formation/gain", "gain * dt * max in-degree = " + std::to_string(step_gain) +
                                       " must stay below 1 for a stable discrete step");
    }

    if (!problems.empty()) throw ScenarioError(problems);
    out.warnings = initial_separation_warnings(cfg.initial_positions, cfg.min_separation);
    return out;
}

LoadedScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError({path.string() + ": cannot read file"});
    json doc;
    try {
        doc = json::parse(in, nullptr, true, false);
    } catch (const json::parse_error& e) {
        // Byte offset -> line:column for the report.
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioError({path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what()});
    }
    return parse_scenario(doc, path.parent_path());
}

}  // namespace swarmsim
