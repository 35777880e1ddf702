#include "maggrab/localize.hpp"

#include "maggrab/errors.hpp"
#include "maggrab/fieldsim.hpp"

namespace maggrab {

SensorRig SensorRig::from_poses(const RigidTransform& m1, const RigidTransform& m2)
{
    const RigidTransform m2_in_m1 = m1.inverse() * m2;
    return {m2_in_m1.rotation.transpose(), m2_in_m1.translation};
}

void SensorRig::validate() const
{
    if (!(norm(m2_position) > 0.0)) {
        throw InvalidArgument("sensor rig baseline must be nonzero");
    }
}

double folded_field_angle(const Vec3& a, const Vec3& b)
{
    return std::atan2(norm(cross(a, b)), std::abs(dot(a, b)));
}

LocalizationResult localize_conductor(const FieldVectorEstimate& b1, const FieldVectorEstimate& b2,
                                      const SensorRig& rig, double alpha_min)
{
    rig.validate();
    const Vec3 f1 = b1.vector;
    const Vec3 f2 = rig.m2_from_m1.transpose() * b2.vector;
    if (!(norm(f1) > 0.0) || !(norm(f2) > 0.0)) {
        throw ZeroField();
    }

    const double angle = folded_field_angle(f1, f2);
    if (angle < alpha_min) {
        return DegenerateParallel{angle};
    }

    const Vec3 n = cross(f1, f2);
    if (!(norm(n) > 0.0)) {
        return DegenerateParallel{angle};
    }
    const UnitVec3 direction = UnitVec3::normalize(n);

    // Each sensor's ray toward the conductor is perpendicular to both its
    // field vector and the conductor direction.
    const Line3 ray1{{0.0, 0.0, 0.0}, UnitVec3::normalize(cross(direction, f1))};
    const Line3 ray2{rig.m2_position, UnitVec3::normalize(cross(direction, f2))};
    const auto feet = closest_points_between_lines(ray1, ray2);
    if (!feet) {
        return DegenerateParallel{angle};
    }

    ConductorEstimate est{{feet->on_b, direction}, angle, 1.0};
    est.magnitude_consistency = consistency_check(est, b1, b2, rig);
    return est;
}

double consistency_check(const ConductorEstimate& est, const FieldVectorEstimate& b1,
                         const FieldVectorEstimate& b2, const SensorRig& rig)
{
    const double r1 = distance_to_line(est.line, {0.0, 0.0, 0.0});
    const double r2 = distance_to_line(est.line, rig.m2_position);
    return (norm(b1.vector) * r1) / (norm(b2.vector) * r2);
}

CurrentEstimate estimate_current(const ConductorEstimate& est, const FieldVectorEstimate& b,
                                 const Vec3& sensor_position)
{
    const double r = distance_to_line(est.line, sensor_position);
    const double peak = 2.0 * kPi * r * norm(b.vector) / kMu0;
    return {peak, peak / std::sqrt(2.0)};
}

} // namespace maggrab
