#include "maggrab/errors.hpp"
#include "maggrab/grasp.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace maggrab;
using maggrab::test::Rng;

namespace {

const UnitVec3 kY = UnitVec3::normalize({0, 1, 0});

ConductorEstimate estimate_for(const Line3& line)
{
    return {line, 0.5, 1.0};
}

// Conductor along y through (1, 0, 0.5): grab point (1, 0, 0.5), approach
// direction normalize(1, 0, 0.5).
const Line3 kLine{{1, 0, 0.5}, kY};

Observation at(const Vec3& position, std::optional<LocalizationResult> est = std::nullopt)
{
    Observation obs;
    obs.ee_pose = {RotationMatrix::identity(), position};
    obs.estimate = std::move(est);
    return obs;
}

ProcedureState in_phase(Phase p)
{
    ProcedureState s;
    s.phase = p;
    return s;
}

} // namespace

TEST_CASE("select_grab_point examples")
{
    CHECK(distance(select_grab_point({{1, 0, 1}, kY}, {0, 0, 0}), {1, 0, 1}) < 1e-15);
    CHECK(distance(select_grab_point({{0, 5, 0}, UnitVec3::normalize({1, 0, 0})}, {2, 0, 0}), {2, 5, 0}) < 1e-15);

    Rng rng(51);
    for (int i = 0; i < 10; ++i) {
        const Line3 l = test::random_line(rng);
        const Vec3 base = test::random_vec(rng, -1, 1);
        CHECK(distance(select_grab_point(l, base), oracle::sweep_closest_point(l.point, l.direction, base)) < 1e-7);
    }
}

TEST_CASE("grab_orientation examples")
{
    const RotationMatrix r = grab_orientation({1, 0, 0}, kY);
    CHECK(distance(r.column(0), {0, 0, -1}) < 1e-15);
    CHECK(distance(r.column(1), {0, 1, 0}) < 1e-15);
    CHECK(distance(r.column(2), {1, 0, 0}) < 1e-15);

    const RotationMatrix f = grab_orientation({1, 0, 0}, -kY);
    CHECK(distance(f.column(0), {0, 0, 1}) < 1e-15);
    CHECK(distance(f.column(1), {0, -1, 0}) < 1e-15);
    CHECK(distance(f.column(2), {1, 0, 0}) < 1e-15);

    CHECK_THROWS_AS(grab_orientation({0, 2, 0}, kY), DegenerateGeometry);
    CHECK_THROWS_AS(grab_orientation({0, 0, 0}, kY), DegenerateGeometry);
}

TEST_CASE("grab_orientation properties")
{
    Rng rng(52);
    int checked = 0;
    while (checked < 10000) {
        const Line3 l = test::random_line(rng, 2.0);
        const Vec3 g = select_grab_point(l, {0, 0, 0});
        if (norm(g) < 1e-3) {
            continue;
        }
        ++checked;
        const RotationMatrix r = grab_orientation(g, l.direction);
        REQUIRE(r.orthonormality_error() < 1e-12);
        REQUIRE(std::abs(r.determinant() - 1.0) < 1e-12);
        REQUIRE(r.column(1) == l.direction.vec());
        REQUIRE(dot(r.column(2), g) >= 0.0);
        // z is the direction from the base toward the grab point.
        REQUIRE(distance(r.column(2), g / norm(g)) < 1e-12);

        const RotationMatrix n = grab_orientation(g, -l.direction);
        REQUIRE(distance(n.column(2), r.column(2)) < 1e-12);
        const GraspPlan a = plan_grasp(l, 0.2);
        const GraspPlan b = plan_grasp({l.point, -l.direction}, 0.2);
        REQUIRE(distance(a.intermittent_point, b.intermittent_point) < 1e-12);
        REQUIRE(distance(a.grab_point, b.grab_point) < 1e-12);
    }
}

TEST_CASE("intermittent_point")
{
    const auto x = UnitVec3::normalize({1, 0, 0});
    CHECK(distance(intermittent_point({1, 0, 0}, x, 0.2), {0.8, 0, 0}) < 1e-15);
    CHECK(intermittent_point({1, 2, 3}, x, 0.0) == Vec3{1, 2, 3});
    CHECK_THROWS_AS(intermittent_point({1, 0, 0}, x, -0.1), InvalidArgument);

    Rng rng(53);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 g = test::random_vec(rng, -2, 2);
        const double d = test::uniform(rng, 0, 1);
        REQUIRE(std::abs(distance(intermittent_point(g, test::random_unit(rng), d), g) - d) < 1e-12);
    }
}

TEST_CASE("procedure parameters are validated")
{
    CHECK_NOTHROW(ProcedureParams{}.validate());
    ProcedureParams p;
    p.d_min = 0.5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.dwell_k = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.approach_offset_d = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.max_iterations = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = {};
    p.alpha_min = kPi / 2;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("phase names round trip")
{
    for (Phase p : kAllPhases) {
        CHECK(phase_from_string(to_string(p)) == p);
    }
    CHECK_FALSE(phase_from_string("Hover"));
}

TEST_CASE("degenerate estimate commands a quarter turn about tool z")
{
    const ProcedureParams params;
    Observation obs;
    obs.ee_pose = {RotationMatrix::from_rpy(0.1, 0.2, 0.3), {0.3, 0.2, 0.1}};
    obs.estimate = DegenerateParallel{0.01};
    const StepResult r = step_procedure(in_phase(Phase::Localize), obs, params);
    CHECK(r.state.phase == Phase::RotateTool);
    REQUIRE(r.command);
    CHECK(r.command->kind == CommandKind::Rotate);
    CHECK(r.command->target.translation == obs.ee_pose.translation);
    const RotationMatrix rel = obs.ee_pose.rotation.transpose() * r.command->target.rotation;
    CHECK(distance(rel.column(0), {0, 1, 0}) < 1e-12);
    CHECK(distance(rel.column(2), {0, 0, 1}) < 1e-12);
    CHECK(r.state.cycles == 1);
}

TEST_CASE("far from the intermittent point the tool goes halfway")
{
    ProcedureParams params;
    params.d_max = 0.4;
    const GraspPlan plan = plan_grasp(kLine, params.approach_offset_d);
    const UnitVec3 z = UnitVec3::normalize(plan.orientation.column(2));
    const Vec3 ee = plan.intermittent_point - z.vec() * 1.0;
    const StepResult r = step_procedure(in_phase(Phase::Localize), at(ee, estimate_for(kLine)), params);
    CHECK(r.state.phase == Phase::MoveMidpoint);
    REQUIRE(r.command);
    CHECK(r.command->kind == CommandKind::Midpoint);
    CHECK(std::abs(distance(r.command->target.translation, ee) - 0.5) < 1e-12);
    CHECK(std::abs(distance(r.command->target.translation, plan.intermittent_point) - 0.5) < 1e-12);
    CHECK(r.command->target.rotation == plan.orientation);
}

TEST_CASE("within the approach band the tool goes to the intermittent point")
{
    const ProcedureParams params;
    const GraspPlan plan = plan_grasp(kLine, params.approach_offset_d);
    const Vec3 ee = plan.intermittent_point + Vec3{0, 0.2, 0};
    const StepResult r = step_procedure(in_phase(Phase::Localize), at(ee, estimate_for(kLine)), params);
    CHECK(r.state.phase == Phase::MoveIntermittent);
    REQUIRE(r.command);
    CHECK(r.command->target.translation == plan.intermittent_point);
    CHECK(r.command->target.rotation == plan.orientation);
    REQUIRE(r.state.plan);
    CHECK(r.state.plan->grab_point == plan.grab_point);
}

TEST_CASE("close to the intermittent point the tool approaches linearly")
{
    ProcedureParams params;
    params.d_min = 0.05;
    const GraspPlan plan = plan_grasp(kLine, params.approach_offset_d);
    const Vec3 ee = plan.intermittent_point + Vec3{0, 0.03, 0};
    Observation obs = at(ee, estimate_for(kLine));
    obs.ee_pose.rotation = plan.orientation;
    const StepResult r = step_procedure(in_phase(Phase::Localize), obs, params);
    CHECK(r.state.phase == Phase::LinearApproach);
    REQUIRE(r.command);
    CHECK(r.command->kind == CommandKind::Grab);
    CHECK(distance(r.command->target.translation, plan.grab_point) < 1e-15);
    CHECK(r.command->target.rotation == obs.ee_pose.rotation);
}

TEST_CASE("transition table")
{
    const ProcedureParams params;
    const GraspPlan plan = plan_grasp(kLine, params.approach_offset_d);
    const RigidTransform target{plan.orientation, plan.intermittent_point};
    const PoseCommand pending{CommandKind::Intermittent, target};

    Observation arrived;
    arrived.ee_pose = target;
    Observation elsewhere;
    elsewhere.ee_pose = {plan.orientation, plan.intermittent_point + Vec3{0, 0, 1e-3}};
    Observation dwelled = elsewhere;
    dwelled.dwell_elapsed = params.dwell_k;
    Observation waiting = elsewhere;
    waiting.dwell_elapsed = params.dwell_k * 0.99;
    Observation start;
    start.start = true;

    struct Row {
        Phase from;
        const Observation* obs;
        Phase to;
    };
    const Row rows[] = {
        {Phase::Idle, &start, Phase::Localize},
        {Phase::Idle, &arrived, Phase::Idle},
        {Phase::Localize, &arrived, Phase::Localize},
        {Phase::RotateTool, &arrived, Phase::AwaitCommand},
        {Phase::RotateTool, &elsewhere, Phase::RotateTool},
        {Phase::MoveMidpoint, &arrived, Phase::AwaitCommand},
        {Phase::MoveMidpoint, &elsewhere, Phase::MoveMidpoint},
        {Phase::MoveIntermittent, &arrived, Phase::AwaitCommand},
        {Phase::MoveIntermittent, &elsewhere, Phase::MoveIntermittent},
        {Phase::AwaitCommand, &dwelled, Phase::Localize},
        {Phase::AwaitCommand, &waiting, Phase::AwaitCommand},
        {Phase::LinearApproach, &arrived, Phase::Grabbed},
        {Phase::LinearApproach, &elsewhere, Phase::LinearApproach},
        {Phase::Grabbed, &arrived, Phase::Grabbed},
        {Phase::Grabbed, &start, Phase::Grabbed},
    };
    for (const Row& row : rows) {
        ProcedureState s = in_phase(row.from);
        s.pending = pending;
        const StepResult r = step_procedure(s, *row.obs, params);
        INFO(to_string(row.from));
        CHECK(r.state.phase == row.to);
        CHECK_FALSE(r.command);
        CHECK(r.state.cycles == 0);
    }

    // Only Localize with an estimate emits commands, and it never stays put.
    for (Phase p : kAllPhases) {
        ProcedureState s = in_phase(p);
        s.pending = pending;
        const StepResult r = step_procedure(s, at({0.1, 0.1, 0.1}, estimate_for(kLine)), params);
        if (p == Phase::Localize) {
            REQUIRE(r.command);
            CHECK(r.state.phase != Phase::Localize);
            CHECK(r.state.pending == r.command);
        } else {
            CHECK_FALSE(r.command);
        }
    }
}

TEST_CASE("step_procedure is pure")
{
    const ProcedureParams params;
    const Observation obs = at({0.2, -0.1, 0.3}, estimate_for(kLine));
    const ProcedureState s = in_phase(Phase::Localize);
    const StepResult a = step_procedure(s, obs, params);
    const StepResult b = step_procedure(s, obs, params);
    CHECK(a.command == b.command);
    CHECK(a.state.phase == b.state.phase);
    CHECK(a.state.cycles == b.state.cycles);
}

TEST_CASE("iteration limit")
{
    ProcedureParams params;
    params.max_iterations = 3;
    ProcedureState s = in_phase(Phase::Localize);
    s.cycles = 2;
    CHECK_NOTHROW(step_procedure(s, at({0, 0, 0}, DegenerateParallel{0.0}), params));
    s.cycles = 3;
    CHECK_THROWS_AS(step_procedure(s, at({0, 0, 0}, DegenerateParallel{0.0}), params), IterationLimit);
}

TEST_CASE("noiseless loop converges with shrinking distance")
{
    // Drive the machine with a perfect estimate and teleporting motion.
    const ProcedureParams params;
    Rng rng(54);
    for (int trial = 0; trial < 200; ++trial) {
        const Line3 l = test::random_line(rng, 1.0);
        if (norm(select_grab_point(l, {0, 0, 0})) < 0.3) {
            continue;
        }
        const GraspPlan plan = plan_grasp(l, params.approach_offset_d);
        RigidTransform ee{RotationMatrix::identity(), test::random_vec(rng, -2, 2)};
        ProcedureState s = in_phase(Phase::Localize);
        double last = distance(ee.translation, plan.intermittent_point);
        int guard = 0;
        while (s.phase != Phase::Grabbed && ++guard < 200) {
            Observation obs;
            obs.ee_pose = ee;
            if (s.phase == Phase::Localize) {
                obs.estimate = estimate_for(l);
            }
            if (s.phase == Phase::AwaitCommand) {
                obs.dwell_elapsed = params.dwell_k;
            }
            const StepResult r = step_procedure(s, obs, params);
            s = r.state;
            if (r.command) {
                ee = r.command->target;
                if (r.command->kind != CommandKind::Grab) {
                    const double now = distance(ee.translation, plan.intermittent_point);
                    REQUIRE(now < last + 1e-12);
                    last = now;
                }
            }
        }
        REQUIRE(s.phase == Phase::Grabbed);
        REQUIRE(distance(ee.translation, plan.grab_point) < 1e-12);
    }
}
