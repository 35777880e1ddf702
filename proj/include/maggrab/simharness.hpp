#pragma once

#include "maggrab/grasp.hpp"
#include "maggrab/localize.hpp"
#include "maggrab/scenario.hpp"
#include "maggrab/sigproc.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maggrab {

/// One dwell + localization + procedure decision.
struct CycleRecord {
    std::size_t cycle = 0;
    double time = 0.0;                 // s, start of the dwell
    RigidTransform ee_pose;            // tool -> base during the dwell
    std::size_t windows = 0;           // sample windows collected in the dwell
    std::optional<FieldVectorEstimate> b1;  // first window, m1 frame
    std::optional<FieldVectorEstimate> b2;  // first window, m2 frame
    bool degenerate = false;
    double angle_between_fields = 0.0;
    std::optional<ConductorEstimate> estimate;  // fused, robot-base frame
    Phase phase = Phase::Localize;     // state after the decision
    std::optional<PoseCommand> command;
    std::vector<SampleWindow> raw_m1;  // only with ScenarioConfig::log_windows
    std::vector<SampleWindow> raw_m2;
};

enum class RunOutcome { Grabbed, IterationLimit, Failed };

std::string_view to_string(RunOutcome o);

struct TrajectoryLog {
    std::size_t start_index = 0;
    RigidTransform start_pose;
    std::vector<CycleRecord> cycles;
    RunOutcome outcome = RunOutcome::Failed;
    std::string message;               // reason for IterationLimit / Failed
    std::size_t steps = 0;             // step_procedure calls
    RigidTransform final_pose;         // tool -> base at the end of the run
    Vec3 true_grab_point;              // ground truth, base frame

    /// Dwells at which the procedure re-localized. Every dwell ends in exactly
    /// one pose command, so this is also the number of commanded waypoints.
    std::size_t stopping_points() const { return cycles.size(); }
    std::size_t rotate_cycles() const;
    double grab_error() const { return distance(final_pose.translation, true_grab_point); }
};

/// True conductor (first scene conductor) expressed in the robot-base frame.
Line3 true_conductor_in_base(const ScenarioConfig& cfg);

/// Sensor -> world poses of both magnetometers for a tool pose in the base frame.
std::pair<SensorPose, SensorPose> sensor_poses(const ScenarioConfig& cfg, const RigidTransform& ee_in_base);

/// Closed-loop simulation from one start pose. Pose commands execute
/// instantaneously; sampling happens only while dwelling. Procedure or
/// sensing failures end the run and are recorded, not thrown.
TrajectoryLog run_closed_loop(const ScenarioConfig& cfg, std::size_t start_index);

/// Averages estimates gathered at one pose: directions are sign-aligned to the
/// first and averaged, points are averaged over each line's canonical
/// (closest-to-origin) point. Throws InvalidArgument on an empty span.
ConductorEstimate estimate_fusion(std::span<const ConductorEstimate> estimates);

/// Offline pipeline over synchronized recordings, one result per window pair
/// (m1 frame). Throws LengthMismatch when the streams differ in length.
std::vector<LocalizationResult> replay_log(const SampleWindow& m1_stream, const SampleWindow& m2_stream,
                                           const ScenarioConfig& cfg);
std::vector<LocalizationResult> replay_log(std::istream& m1_csv, std::istream& m2_csv, const ScenarioConfig& cfg);

struct RunSummary {
    std::size_t start_index = 0;
    RunOutcome outcome = RunOutcome::Failed;
    std::size_t steps = 0;
    std::size_t stopping_points = 0;
    std::size_t rotate_cycles = 0;
    Vec3 final_position;
    Vec3 true_grab_point;
};

RunSummary summarize(const TrajectoryLog& log);

struct RunReport {
    std::vector<RunSummary> runs;
    std::vector<std::optional<double>> deviations;  // per run; empty unless Grabbed
    std::size_t grabbed = 0;
    std::optional<Vec3> mean_final;                 // over Grabbed runs
    double deviation_mean = 0.0;
    double deviation_std = 0.0;                     // population std of deviations
    double deviation_max = 0.0;
    double max_grab_error = 0.0;                    // vs ground truth, Grabbed runs
};

/// Deviation of each Grabbed run's final position from the mean final position.
RunReport compute_report(std::span<const RunSummary> runs);
RunReport compute_report(std::span<const TrajectoryLog> logs);

// File formats.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
nlohmann::json to_json(const TrajectoryLog& log);
nlohmann::json to_json(const RunSummary& s);
nlohmann::json to_json(const RunReport& r);
RunSummary run_summary_from_json(const nlohmann::json& j);

} // namespace maggrab
