#pragma once

#include "maggrab/geom.hpp"

#include <cstdint>
#include <vector>

namespace maggrab {

struct SampleWindow;

inline constexpr double kMu0 = 4.0 * kPi * 1e-7;  // H/m

/// Infinitely long straight wire carrying i(t) = sqrt(2) I_rms sin(2 pi f t + phase).
struct Conductor {
    Line3 line;
    double current_rms = 0.0;  // A
    double frequency = 0.0;    // Hz
    double phase = 0.0;        // rad

    /// Throws InvalidArgument unless current_rms > 0 and frequency > 0.
    void validate() const;
    double instantaneous_current(double t) const;
};

struct FieldScene {
    std::vector<Conductor> conductors;
    Vec3 earth_field;              // T, world frame
    double noise_sigma = 0.0;      // T, per-axis std in the sensor frame
    std::uint64_t rng_seed = 0;
    double full_scale = 0.0;       // T; readings clipped to +-full_scale when > 0

    void validate() const;
    double max_frequency() const;
};

/// Sensor frame -> world frame.
struct SensorPose {
    RigidTransform pose;
};

/// Distance from a conductor below which the field is not evaluated.
inline constexpr double kMinConductorDistance = 1e-6;

/// Instantaneous field of one conductor (world frame, tesla). The direction
/// follows (p - foot) x direction, so reversing the line direction reverses
/// the field. Throws PointOnConductor within kMinConductorDistance.
Vec3 conductor_field_at(const Conductor& c, const Vec3& p, double t);

/// Sum of all conductor fields plus the earth field, noiseless.
Vec3 scene_field_at(const FieldScene& s, const Vec3& p, double t);

/// Peak AC field vector at p (world frame) from conductors at `frequency`,
/// each weighted by cos(phase - first conductor's phase). Exact when the
/// conductors are in phase or antiphase. Earth field excluded.
Vec3 scene_ac_amplitude_at(const FieldScene& s, const Vec3& p, double frequency);

/// Samples `n` readings at t0 + k / rate in the sensor frame. Noise is drawn
/// from a stream keyed by (scene.rng_seed, stream), so the same arguments give
/// bit-identical windows. Throws NyquistViolation, PointOnConductor,
/// InvalidArgument.
SampleWindow sample_sensor(const FieldScene& s, const SensorPose& sp, double rate, std::size_t n,
                           double t0, std::uint64_t stream = 0);

/// splitmix64 finalizer; used to derive independent noise streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace maggrab
