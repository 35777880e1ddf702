#pragma once

#include "maggrab/geom.hpp"
#include "maggrab/sigproc.hpp"

#include <variant>

namespace maggrab {

/// Relative placement of the two magnetometers.
///
/// `m2_from_m1` is a rotation that expresses an m1-frame vector in m2-frame
/// coordinates (v_m2 = R v_m1), so m2 readings are brought into the m1 frame
/// with R^-1. `m2_position` is the origin of magnetometer 2 in m1 coordinates.
/// The default-constructed rig is invalid (zero baseline).
struct SensorRig {
    RotationMatrix m2_from_m1;
    Vec3 m2_position;

    /// Builds the rig from both sensors' poses in a common parent frame
    /// (e.g. sensor -> tool mounts).
    static SensorRig from_poses(const RigidTransform& m1, const RigidTransform& m2);

    /// Pose of magnetometer 2 in the m1 frame (m2 -> m1).
    RigidTransform m2_in_m1() const { return {m2_from_m1.transpose(), m2_position}; }

    /// Throws InvalidArgument for a zero baseline.
    void validate() const;
};

inline constexpr double kDefaultAlphaMin = 10.0 * kPi / 180.0;

/// Conductor line expressed in the magnetometer-1 frame.
struct ConductorEstimate {
    Line3 line;
    double angle_between_fields = 0.0;   // rad, folded into [0, pi/2]
    double magnitude_consistency = 1.0;  // (|b1| r1) / (|b2| r2)
};

/// Field vectors too close to parallel to triangulate.
struct DegenerateParallel {
    double angle_between_fields = 0.0;  // rad, folded into [0, pi/2]
};

using LocalizationResult = std::variant<ConductorEstimate, DegenerateParallel>;

/// Angle between two field vectors with the sign ambiguity folded out.
double folded_field_angle(const Vec3& a, const Vec3& b);

/// Triangulates the conductor from two simultaneous field vectors.
///
/// b2 is rotated into the m1 frame, the conductor direction is the normalized
/// cross product of the two fields, and each sensor sees the conductor along
/// direction x field. The conductor point is where those two rays pass
/// closest. The returned line goes through the foot point seen from
/// magnetometer 2. Throws ZeroField if either vector is zero.
LocalizationResult localize_conductor(const FieldVectorEstimate& b1, const FieldVectorEstimate& b2,
                                      const SensorRig& rig, double alpha_min = kDefaultAlphaMin);

/// (|b1| r1) / (|b2| r2) with r_i the sensor-to-line distances. Equals 1 for
/// a lone straight conductor since |B| r is constant there.
double consistency_check(const ConductorEstimate& est, const FieldVectorEstimate& b1,
                         const FieldVectorEstimate& b2, const SensorRig& rig);

struct CurrentEstimate {
    double peak = 0.0;  // A
    double rms = 0.0;   // A
};

/// Inverts |B| = mu0 I / (2 pi r). |b| is taken as a peak amplitude.
/// `sensor_position` is in the m1 frame.
CurrentEstimate estimate_current(const ConductorEstimate& est, const FieldVectorEstimate& b,
                                 const Vec3& sensor_position);

} // namespace maggrab
