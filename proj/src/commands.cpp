#include "swarmsim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace swarmsim {

using nlohmann::json;

json command_to_json(const SwarmCommand& command) {
    using Kind = SwarmCommand::Kind;
    switch (command.kind) {
    case Kind::SetFormation:
        return {{"kind", "set_formation"}, {"name", command.formation}};
    case Kind::LeaderVelocity:
        return {{"kind", "leader_velocity"},
                {"velocity", json::array({command.velocity.x(), command.velocity.y(), command.velocity.z()})}};
    case Kind::Pause:
        return {{"kind", "pause"}};
    case Kind::Resume:
        return {{"kind", "resume"}};
    case Kind::SetSpeed:
        if (std::isinf(command.speed_factor)) return {{"kind", "set_speed"}, {"factor", "free"}};
        return {{"kind", "set_speed"}, {"factor", command.speed_factor}};
    case Kind::Stop:
        return {{"kind", "stop"}};
    }
    return {};
}

SwarmCommand command_from_json(const json& j) {
    if (!j.is_object()) throw CommandError("command must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw CommandError("command needs a string 'kind'");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "set_formation") {
        if (!j.contains("name") || !j["name"].is_string() || j["name"].get<std::string>().empty())
            throw CommandError("set_formation needs a non-empty 'name'");
        return SwarmCommand::set_formation(j["name"].get<std::string>());
    }
    if (kind == "leader_velocity") {
        const auto& v = j.contains("velocity") ? j["velocity"] : json();
        if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
            throw CommandError("leader_velocity needs 'velocity': [x, y, z]");
        const Vec3 vel{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        if (!is_finite(vel)) throw CommandError("leader_velocity components must be finite");
        return SwarmCommand::leader_velocity(vel);
    }
    if (kind == "pause") return SwarmCommand::pause();
    if (kind == "resume") return SwarmCommand::resume();
    if (kind == "stop") return SwarmCommand::stop();
    if (kind == "set_speed") {
        if (j.contains("factor") && j["factor"] == "free") return SwarmCommand::set_speed(kFreeRun);
        if (!j.contains("factor") || !j["factor"].is_number())
            throw CommandError("set_speed needs a numeric 'factor' or \"free\"");
        const double f = j["factor"].get<double>();
        if (!(f > 0.0) || !std::isfinite(f)) throw CommandError("speed factor must be a positive number or \"free\"");
        return SwarmCommand::set_speed(f);
    }
    throw CommandError("unknown command kind '" + kind + "'");
}

std::vector<ScheduledCommand> commands_from_json(const json& j) {
    if (!j.is_array()) throw CommandError("command script must be a JSON array");
    std::vector<ScheduledCommand> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& entry = j[k];
        if (!entry.is_object() || !entry.contains("tick") || !entry["tick"].is_number_integer() ||
            entry["tick"].get<std::int64_t>() < 0)
            throw CommandError("command " + std::to_string(k) + " needs a non-negative integer 'tick'");
        json body = entry;
        body.erase("tick");
        try {
            out.push_back({entry["tick"].get<Tick>(), command_from_json(body)});
        } catch (const CommandError& e) {
            throw CommandError("command " + std::to_string(k) + ": " + e.what());
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tick < b.tick; });
    return out;
}

std::vector<ScheduledCommand> load_command_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CommandError("cannot read command script " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw CommandError(path.string() + ": " + e.what());
    }
    return commands_from_json(doc);
}

}  // namespace swarmsim
