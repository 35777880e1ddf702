#pragma once

#include "maggrab/fieldsim.hpp"
#include "maggrab/grasp.hpp"
#include "maggrab/localize.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace maggrab {

struct SamplingParams {
    double rate = 200.0;             // Hz
    std::size_t window_length = 200;
    double target_frequency = 50.0;  // Hz
    double amplitude_floor = kDefaultAmplitudeFloor;

    double window_duration() const { return static_cast<double>(window_length) / rate; }
};

/// Everything needed to run closed-loop grabbing in simulation.
///
/// Frames: the scene lives in the world frame; `robot_base` maps base -> world;
/// start poses are tool -> base; sensor mounts are sensor -> tool.
struct ScenarioConfig {
    FieldScene scene;  // scene.rng_seed is ignored; runs derive it from `seed`
    RigidTransform mount1;
    RigidTransform mount2;
    RigidTransform robot_base;
    std::vector<RigidTransform> start_poses;
    ProcedureParams procedure;
    SamplingParams sampling;
    std::uint64_t seed = 0;
    bool log_windows = false;  // keep raw sample windows in trajectory logs

    SensorRig rig() const { return SensorRig::from_poses(mount1, mount2); }

    /// Throws SchemaError / InvalidArgument on an unusable config.
    void validate() const;

    /// Non-fatal issues, e.g. a window that is not an integer number of periods.
    std::vector<std::string> warnings() const;

    /// Lab-like default: one 36 A rms 50 Hz conductor, 200 Hz sampling with
    /// 200-sample windows, sensors 20 cm apart with equal orientation, 12
    /// start poses around the conductor, noiseless.
    static ScenarioConfig lab_default();
};

/// Tool pose whose z axis points along `approach` and whose y axis is the
/// projection of `up_hint` perpendicular to it.
RigidTransform look_pose(const Vec3& position, const Vec3& approach, const Vec3& up_hint);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Throws SchemaError with the offending key in the message.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const RigidTransform& t);
nlohmann::json to_json(const Line3& l);
Vec3 vec3_from_json(const nlohmann::json& j, const std::string& where);
RigidTransform transform_from_json(const nlohmann::json& j, const std::string& where);

} // namespace maggrab
