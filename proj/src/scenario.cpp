#include "maggrab/scenario.hpp"

#include "maggrab/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace maggrab {

using nlohmann::json;

RigidTransform look_pose(const Vec3& position, const Vec3& approach, const Vec3& up_hint)
{
    const UnitVec3 z = UnitVec3::normalize(approach);
    const Vec3 up_perp = up_hint - z.vec() * dot(up_hint, z.vec());
    const UnitVec3 y = UnitVec3::normalize(up_perp);
    const Vec3 x = cross(y.vec(), z.vec());
    return {RotationMatrix::from_columns(x, y, z), position};
}

ScenarioConfig ScenarioConfig::lab_default()
{
    ScenarioConfig cfg;

    Conductor wire;
    wire.line = {{0.60, 0.0, 0.50}, UnitVec3::normalize({0.05, 1.0, -0.10})};
    wire.current_rms = 36.0;
    wire.frequency = 50.0;
    wire.phase = 0.0;
    cfg.scene.conductors = {wire};
    cfg.scene.earth_field = {1.8e-5, 0.5e-5, -4.4e-5};
    cfg.scene.noise_sigma = 0.0;
    // Noiseless, so phases stay meaningful far below the usual floor. At
    // 1e-7 T a small axis can lose its sign and tilt the estimate by up to
    // 2 * floor / |B|.
    cfg.sampling.amplitude_floor = 1e-12;

    // Sensors 20 cm apart across the tool x axis, 15 cm behind the tool
    // centre, same orientation as the tool.
    cfg.mount1 = {RotationMatrix::identity(), {-0.10, 0.0, -0.15}};
    cfg.mount2 = {RotationMatrix::identity(), {0.10, 0.0, -0.15}};
    cfg.robot_base = RigidTransform::identity();

    const Vec3 up{0.0, 1.0, 0.0};
    cfg.start_poses = {
        look_pose({0.10, 0.00, 0.80}, {1.0, 0.0, -0.30}, up),
        look_pose({0.05, -0.30, 0.75}, {1.0, 0.3, -0.30}, up),
        look_pose({0.05, 0.30, 0.75}, {1.0, -0.3, -0.30}, up),
        look_pose({-0.10, 0.00, 0.60}, {1.0, 0.0, 0.00}, up),
        look_pose({0.00, -0.45, 0.55}, {1.0, 0.4, 0.00}, up),
        look_pose({0.00, 0.45, 0.55}, {1.0, -0.4, 0.00}, up),
        look_pose({0.15, 0.00, 0.95}, {1.0, 0.0, -0.60}, {0.0, 1.0, 0.3}),
        look_pose({0.15, -0.20, 0.95}, {1.0, 0.2, -0.60}, {0.3, 1.0, 0.0}),
        look_pose({-0.20, 0.20, 0.70}, {1.0, -0.1, -0.10}, up),
        look_pose({-0.20, -0.20, 0.70}, {1.0, 0.1, -0.10}, up),
        look_pose({-0.30, 0.00, 0.45}, {1.0, 0.0, 0.05}, up),
        look_pose({0.05, 0.60, 0.65}, {1.0, -0.6, -0.10}, up),
    };
    cfg.seed = 1;
    return cfg;
}

void ScenarioConfig::validate() const
{
    scene.validate();
    procedure.validate();
    rig().validate();
    if (!(sampling.rate > 0.0) || sampling.window_length < 2) {
        throw InvalidArgument("sampling needs rate > 0 and window_length >= 2");
    }
    if (!(sampling.target_frequency > 0.0) || !(sampling.target_frequency < sampling.rate / 2.0)) {
        throw NyquistViolation("target frequency must lie in (0, rate/2)");
    }
    if (!(sampling.rate > 2.0 * scene.max_frequency())) {
        throw NyquistViolation("sample rate must exceed twice the highest conductor frequency");
    }
    if (!(sampling.amplitude_floor >= 0.0)) {
        throw InvalidArgument("amplitude_floor must be >= 0");
    }
    if (start_poses.empty()) {
        throw InvalidArgument("at least one start pose is required");
    }
}

std::vector<std::string> ScenarioConfig::warnings() const
{
    std::vector<std::string> out;
    const double periods = sampling.window_duration() * sampling.target_frequency;
    if (std::abs(periods - std::round(periods)) > 1e-9) {
        out.push_back("window spans " + std::to_string(periods) +
                      " periods of the target frequency; expect spectral leakage");
    }
    if (scene.conductors.empty()) {
        out.push_back("scene has no conductors; localization will fail");
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

json to_json(const Vec3& v)
{
    return json::array({v.x, v.y, v.z});
}

json to_json(const RigidTransform& t)
{
    json rows = json::array();
    for (const auto& row : t.rotation.rows()) {
        rows.push_back(json::array({row[0], row[1], row[2]}));
    }
    return {{"translation", to_json(t.translation)}, {"rotation", rows}};
}

json to_json(const Line3& l)
{
    return {{"point", to_json(l.point)}, {"direction", to_json(l.direction.vec())}};
}

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) {
        throw SchemaError(where + ": expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (ok.count(key) == 0) {
            throw SchemaError(where + ": unknown key '" + key + "'");
        }
    }
}

const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) {
        throw SchemaError(where + ": missing key '" + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const std::string& where)
{
    if (!j.is_number()) {
        throw SchemaError(where + ": expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw SchemaError(where + ": expected a finite number");
    }
    return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where)
{
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::uint64_t unsigned_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where)
{
    if (!j.contains(key)) {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw SchemaError(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

Conductor conductor_from_json(const json& j, const std::string& where)
{
    check_keys(j, where, {"point", "direction", "current_rms", "frequency", "phase"});
    Conductor c;
    try {
        c.line = {vec3_from_json(require(j, "point", where), where + ".point"),
                  UnitVec3::normalize(vec3_from_json(require(j, "direction", where), where + ".direction"))};
    } catch (const InvalidArgument&) {
        throw SchemaError(where + ".direction: must be nonzero");
    }
    c.current_rms = number(require(j, "current_rms", where), where + ".current_rms");
    c.frequency = number(require(j, "frequency", where), where + ".frequency");
    c.phase = number_or(j, "phase", 0.0, where);
    return c;
}

} // namespace

Vec3 vec3_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(where + ": expected an array of 3 numbers");
    }
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]"), number(j[2], where + "[2]")};
}

RigidTransform transform_from_json(const json& j, const std::string& where)
{
    check_keys(j, where, {"translation", "rotation", "rpy_deg", "approach", "up"});
    const Vec3 translation = j.contains("translation") ? vec3_from_json(j.at("translation"), where + ".translation")
                                                       : Vec3{};
    const int forms = static_cast<int>(j.contains("rotation")) + static_cast<int>(j.contains("rpy_deg")) +
                      static_cast<int>(j.contains("approach"));
    if (forms > 1) {
        throw SchemaError(where + ": give only one of rotation, rpy_deg, approach");
    }
    try {
        if (j.contains("rotation")) {
            const json& r = j.at("rotation");
            if (!r.is_array() || r.size() != 3) {
                throw SchemaError(where + ".rotation: expected 3 rows");
            }
            RotationMatrix::Rows rows{};
            for (int i = 0; i < 3; ++i) {
                const Vec3 row = vec3_from_json(r[i], where + ".rotation[" + std::to_string(i) + "]");
                rows[i] = {row.x, row.y, row.z};
            }
            return {RotationMatrix::from_rows(rows), translation};
        }
        if (j.contains("rpy_deg")) {
            const Vec3 rpy = vec3_from_json(j.at("rpy_deg"), where + ".rpy_deg") * (kPi / 180.0);
            return {RotationMatrix::from_rpy(rpy.x, rpy.y, rpy.z), translation};
        }
        if (j.contains("approach")) {
            const Vec3 up = j.contains("up") ? vec3_from_json(j.at("up"), where + ".up") : Vec3{0.0, 1.0, 0.0};
            return look_pose(translation, vec3_from_json(j.at("approach"), where + ".approach"), up);
        }
    } catch (const InvalidArgument& e) {
        throw SchemaError(where + ": " + e.what());
    }
    if (j.contains("up")) {
        throw SchemaError(where + ": 'up' requires 'approach'");
    }
    return {RotationMatrix::identity(), translation};
}

json to_json(const ScenarioConfig& cfg)
{
    json conductors = json::array();
    for (const auto& c : cfg.scene.conductors) {
        conductors.push_back({{"point", to_json(c.line.point)},
                              {"direction", to_json(c.line.direction.vec())},
                              {"current_rms", c.current_rms},
                              {"frequency", c.frequency},
                              {"phase", c.phase}});
    }
    json starts = json::array();
    for (const auto& p : cfg.start_poses) {
        starts.push_back(to_json(p));
    }
    return {
        {"seed", cfg.seed},
        {"log_windows", cfg.log_windows},
        {"scene",
         {{"conductors", conductors},
          {"earth_field", to_json(cfg.scene.earth_field)},
          {"noise_sigma", cfg.scene.noise_sigma},
          {"full_scale", cfg.scene.full_scale}}},
        {"sensors", {{"mount1", to_json(cfg.mount1)}, {"mount2", to_json(cfg.mount2)}}},
        {"robot_base", to_json(cfg.robot_base)},
        {"start_poses", starts},
        {"procedure",
         {{"alpha_min_deg", cfg.procedure.alpha_min * 180.0 / kPi},
          {"approach_offset", cfg.procedure.approach_offset_d},
          {"d_min", cfg.procedure.d_min},
          {"d_max", cfg.procedure.d_max},
          {"dwell", cfg.procedure.dwell_k},
          {"max_iterations", cfg.procedure.max_iterations}}},
        {"sampling",
         {{"rate", cfg.sampling.rate},
          {"window_length", cfg.sampling.window_length},
          {"target_frequency", cfg.sampling.target_frequency},
          {"amplitude_floor", cfg.sampling.amplitude_floor}}},
    };
}

ScenarioConfig scenario_from_json(const json& j)
{
    check_keys(j, "config", {"seed", "log_windows", "scene", "sensors", "robot_base", "start_poses", "procedure",
                             "sampling"});
    ScenarioConfig cfg;
    cfg.seed = unsigned_or(j, "seed", 0, "config");
    if (j.contains("log_windows")) {
        if (!j.at("log_windows").is_boolean()) {
            throw SchemaError("config.log_windows: expected a boolean");
        }
        cfg.log_windows = j.at("log_windows").get<bool>();
    }

    const json& scene = require(j, "scene", "config");
    check_keys(scene, "scene", {"conductors", "earth_field", "noise_sigma", "full_scale"});
    if (scene.contains("conductors")) {
        const json& list = scene.at("conductors");
        if (!list.is_array()) {
            throw SchemaError("scene.conductors: expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            cfg.scene.conductors.push_back(
                conductor_from_json(list[i], "scene.conductors[" + std::to_string(i) + "]"));
        }
    }
    if (scene.contains("earth_field")) {
        cfg.scene.earth_field = vec3_from_json(scene.at("earth_field"), "scene.earth_field");
    }
    cfg.scene.noise_sigma = number_or(scene, "noise_sigma", 0.0, "scene");
    cfg.scene.full_scale = number_or(scene, "full_scale", 0.0, "scene");

    const json& sensors = require(j, "sensors", "config");
    check_keys(sensors, "sensors", {"mount1", "mount2"});
    cfg.mount1 = transform_from_json(require(sensors, "mount1", "sensors"), "sensors.mount1");
    cfg.mount2 = transform_from_json(require(sensors, "mount2", "sensors"), "sensors.mount2");

    if (j.contains("robot_base")) {
        cfg.robot_base = transform_from_json(j.at("robot_base"), "robot_base");
    }

    const json& starts = require(j, "start_poses", "config");
    if (!starts.is_array()) {
        throw SchemaError("start_poses: expected an array");
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
        cfg.start_poses.push_back(transform_from_json(starts[i], "start_poses[" + std::to_string(i) + "]"));
    }

    if (j.contains("procedure")) {
        const json& p = j.at("procedure");
        check_keys(p, "procedure", {"alpha_min_deg", "approach_offset", "d_min", "d_max", "dwell", "max_iterations"});
        auto& proc = cfg.procedure;
        proc.alpha_min = number_or(p, "alpha_min_deg", proc.alpha_min * 180.0 / kPi, "procedure") * kPi / 180.0;
        proc.approach_offset_d = number_or(p, "approach_offset", proc.approach_offset_d, "procedure");
        proc.d_min = number_or(p, "d_min", proc.d_min, "procedure");
        proc.d_max = number_or(p, "d_max", proc.d_max, "procedure");
        proc.dwell_k = number_or(p, "dwell", proc.dwell_k, "procedure");
        proc.max_iterations = unsigned_or(p, "max_iterations", proc.max_iterations, "procedure");
    }
    if (j.contains("sampling")) {
        const json& s = j.at("sampling");
        check_keys(s, "sampling", {"rate", "window_length", "target_frequency", "amplitude_floor"});
        auto& smp = cfg.sampling;
        smp.rate = number_or(s, "rate", smp.rate, "sampling");
        smp.window_length = unsigned_or(s, "window_length", smp.window_length, "sampling");
        smp.target_frequency = number_or(s, "target_frequency", smp.target_frequency, "sampling");
        smp.amplitude_floor = number_or(s, "amplitude_floor", smp.amplitude_floor, "sampling");
    }

    try {
        cfg.validate();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw SchemaError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open config file '" + path.string() + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace maggrab
