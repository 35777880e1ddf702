#pragma once

#include "maggrab/geom.hpp"
#include "maggrab/localize.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace maggrab {

/// Point on `line` closest to `base`.
Vec3 select_grab_point(const Line3& line, const Vec3& base);

/// Tool orientation at the grab point, columns [x, conductor, z].
///
/// x = normalize(conductor x grab_point), z = normalize(x x conductor). z is
/// then the component of grab_point perpendicular to the conductor, so the
/// tool approaches from the base side whichever way `conductor` points.
/// grab_point is in the robot-base frame. Throws DegenerateGeometry when the
/// conductor direction passes through the base.
RotationMatrix grab_orientation(const Vec3& grab_point, const UnitVec3& conductor);

/// grab_point - approach_z * d. Throws InvalidArgument for d < 0.
Vec3 intermittent_point(const Vec3& grab_point, const UnitVec3& approach_z, double d);

struct GraspPlan {
    Vec3 grab_point;             // robot-base frame, m
    RotationMatrix orientation;  // columns v_x, conductor, v_z
    Vec3 intermittent_point;     // m
};

/// Plan for a conductor line in the robot-base frame (base at the origin).
GraspPlan plan_grasp(const Line3& conductor_in_base, double approach_offset);

struct ProcedureParams {
    double alpha_min = kDefaultAlphaMin;  // rad
    double approach_offset_d = 0.20;      // m
    double d_min = 0.05;                  // m
    double d_max = 0.40;                  // m
    double dwell_k = 1.0;                 // s
    std::size_t max_iterations = 50;      // localization cycles

    /// Throws InvalidArgument unless 0 < d_min < d_max, d > 0, k > 0.
    void validate() const;
};

enum class Phase {
    Idle,            // not engaged; waits for the operator's start
    AwaitCommand,    // arrived at a commanded pose; dwelling k seconds
    Localize,        // needs a fresh localization result to plan the next move
    RotateTool,      // rotating 90 deg about tool z
    MoveMidpoint,    // moving to the midpoint toward the intermittent point
    MoveIntermittent,
    LinearApproach,  // straight-line move onto the grab point
    Grabbed,         // terminal
};

inline constexpr std::array<Phase, 8> kAllPhases{Phase::Idle,         Phase::AwaitCommand,     Phase::Localize,
                                                 Phase::RotateTool,   Phase::MoveMidpoint,     Phase::MoveIntermittent,
                                                 Phase::LinearApproach, Phase::Grabbed};

std::string_view to_string(Phase p);
std::optional<Phase> phase_from_string(std::string_view s);

enum class CommandKind { Rotate, Midpoint, Intermittent, Grab };

std::string_view to_string(CommandKind k);

/// Target tool pose in the robot-base frame.
struct PoseCommand {
    CommandKind kind = CommandKind::Grab;
    RigidTransform target;

    bool operator==(const PoseCommand&) const = default;
};

struct ProcedureState {
    Phase phase = Phase::Idle;
    std::optional<GraspPlan> plan;
    std::optional<PoseCommand> pending;  // last command, until reached
    std::size_t cycles = 0;              // localization results consumed
};

/// What the procedure sees on one step. `estimate` must already be expressed
/// in the robot-base frame.
struct Observation {
    RigidTransform ee_pose{};                      // tool -> base
    std::optional<LocalizationResult> estimate{};  // fresh result, if any
    double dwell_elapsed = 0.0;                    // s since arrival
    bool start = false;                            // operator command
};

struct StepResult {
    ProcedureState state;
    std::optional<PoseCommand> command;
};

/// Positional and angular tolerance for "arrived at the commanded pose".
inline constexpr double kArrivalTolerance = 1e-6;

/// Pure transition function of the approach procedure.
///
///   Idle           --start-->              Localize
///   Localize       --degenerate-->         RotateTool       (+ rotate command)
///   Localize       --dist > d_max-->       MoveMidpoint     (+ midpoint command)
///   Localize       --d_min <= dist <= d_max--> MoveIntermittent (+ command)
///   Localize       --dist < d_min-->       LinearApproach   (+ grab command)
///   RotateTool / MoveMidpoint / MoveIntermittent --arrived--> AwaitCommand
///   AwaitCommand   --dwell >= k-->         Localize
///   LinearApproach --arrived-->            Grabbed
///
/// Any other input leaves the state unchanged. dist is the distance from the
/// tool position to the intermittent point. Throws IterationLimit when a
/// localization cycle would exceed params.max_iterations.
StepResult step_procedure(const ProcedureState& state, const Observation& obs, const ProcedureParams& params);

/// True when `pose` matches `target` within kArrivalTolerance.
bool pose_reached(const RigidTransform& pose, const RigidTransform& target);

} // namespace maggrab
