#include "maggrab/grasp.hpp"

#include "maggrab/errors.hpp"

#include <algorithm>
#include <string>

namespace maggrab {

Vec3 select_grab_point(const Line3& line, const Vec3& base)
{
    return closest_point_on_line(line, base);
}

RotationMatrix grab_orientation(const Vec3& grab_point, const UnitVec3& conductor)
{
    const Vec3 x_raw = cross(conductor.vec(), grab_point);
    if (norm(x_raw) < 1e-9) {
        throw DegenerateGeometry("conductor direction passes through the robot base");
    }
    Vec3 vx = UnitVec3::normalize(x_raw);
    Vec3 vz = UnitVec3::normalize(cross(vx, conductor.vec()));
    // Approach from the base side; flipping both keeps det = +1.
    if (dot(vz, grab_point) < 0.0) {
        vx = -vx;
        vz = -vz;
    }
    return RotationMatrix::from_columns(vx, conductor.vec(), vz);
}

Vec3 intermittent_point(const Vec3& grab_point, const UnitVec3& approach_z, double d)
{
    if (!(d >= 0.0)) {
        throw InvalidArgument("approach offset must be >= 0");
    }
    return grab_point - approach_z.vec() * d;
}

GraspPlan plan_grasp(const Line3& conductor_in_base, double approach_offset)
{
    GraspPlan plan;
    plan.grab_point = select_grab_point(conductor_in_base, {0.0, 0.0, 0.0});
    plan.orientation = grab_orientation(plan.grab_point, conductor_in_base.direction);
    plan.intermittent_point =
        intermittent_point(plan.grab_point, UnitVec3::normalize(plan.orientation.column(2)), approach_offset);
    return plan;
}

void ProcedureParams::validate() const
{
    if (!(alpha_min >= 0.0 && alpha_min < kPi / 2.0)) {
        throw InvalidArgument("alpha_min must lie in [0, pi/2)");
    }
    if (!(d_min > 0.0 && d_min < d_max)) {
        throw InvalidArgument("require 0 < d_min < d_max");
    }
    if (!(approach_offset_d > 0.0)) {
        throw InvalidArgument("approach offset must be > 0");
    }
    if (!(dwell_k > 0.0)) {
        throw InvalidArgument("dwell must be > 0");
    }
    if (max_iterations == 0) {
        throw InvalidArgument("max_iterations must be > 0");
    }
}

namespace {

constexpr std::array<std::string_view, 8> kPhaseNames{
    "Idle", "AwaitCommand", "Localize", "RotateTool", "MoveMidpoint", "MoveIntermittent", "LinearApproach", "Grabbed",
};

} // namespace

std::string_view to_string(Phase p)
{
    return kPhaseNames[static_cast<std::size_t>(p)];
}

std::optional<Phase> phase_from_string(std::string_view s)
{
    for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
        if (kPhaseNames[i] == s) {
            return static_cast<Phase>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(CommandKind k)
{
    switch (k) {
    case CommandKind::Rotate: return "rotate";
    case CommandKind::Midpoint: return "midpoint";
    case CommandKind::Intermittent: return "intermittent";
    case CommandKind::Grab: return "grab";
    }
    return "unknown";
}

bool pose_reached(const RigidTransform& pose, const RigidTransform& target)
{
    if (distance(pose.translation, target.translation) > kArrivalTolerance) {
        return false;
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (std::abs(pose.rotation(r, c) - target.rotation(r, c)) > kArrivalTolerance) {
                return false;
            }
        }
    }
    return true;
}

namespace {

StepResult decide(ProcedureState next, const Observation& obs, const LocalizationResult& result,
                  const ProcedureParams& params)
{
    if (next.cycles + 1 > params.max_iterations) {
        throw IterationLimit("no grab after " + std::to_string(params.max_iterations) + " localization cycles");
    }
    ++next.cycles;

    const RigidTransform& ee = obs.ee_pose;
    PoseCommand cmd;
    if (std::holds_alternative<DegenerateParallel>(result)) {
        static const RotationMatrix quarter_turn = RotationMatrix::about_axis(UnitVec3::normalize({0, 0, 1}), kPi / 2.0);
        cmd = {CommandKind::Rotate, {ee.rotation * quarter_turn, ee.translation}};
        next.phase = Phase::RotateTool;
    } else {
        const auto& est = std::get<ConductorEstimate>(result);
        const GraspPlan plan = plan_grasp(est.line, params.approach_offset_d);
        next.plan = plan;
        const double dist = distance(ee.translation, plan.intermittent_point);
        if (dist > params.d_max) {
            cmd = {CommandKind::Midpoint, {plan.orientation, (ee.translation + plan.intermittent_point) * 0.5}};
            next.phase = Phase::MoveMidpoint;
        } else if (dist >= params.d_min) {
            cmd = {CommandKind::Intermittent, {plan.orientation, plan.intermittent_point}};
            next.phase = Phase::MoveIntermittent;
        } else {
            // Orientation is frozen for the straight-line approach.
            cmd = {CommandKind::Grab, {ee.rotation, plan.grab_point}};
            next.phase = Phase::LinearApproach;
        }
    }
    next.pending = cmd;
    return {next, cmd};
}

} // namespace

StepResult step_procedure(const ProcedureState& state, const Observation& obs, const ProcedureParams& params)
{
    ProcedureState next = state;
    switch (state.phase) {
    case Phase::Idle:
        if (obs.start) {
            next.phase = Phase::Localize;
        }
        return {next, std::nullopt};

    case Phase::Localize:
        if (!obs.estimate) {
            return {next, std::nullopt};
        }
        return decide(next, obs, *obs.estimate, params);

    case Phase::RotateTool:
    case Phase::MoveMidpoint:
    case Phase::MoveIntermittent:
        if (state.pending && pose_reached(obs.ee_pose, state.pending->target)) {
            next.phase = Phase::AwaitCommand;
            next.pending.reset();
        }
        return {next, std::nullopt};

    case Phase::AwaitCommand:
        if (obs.dwell_elapsed >= params.dwell_k) {
            next.phase = Phase::Localize;
        }
        return {next, std::nullopt};

    case Phase::LinearApproach:
        if (state.pending && pose_reached(obs.ee_pose, state.pending->target)) {
            next.phase = Phase::Grabbed;
            next.pending.reset();
        }
        return {next, std::nullopt};

    case Phase::Grabbed:
        return {next, std::nullopt};
    }
    return {next, std::nullopt};
}

} // namespace maggrab
