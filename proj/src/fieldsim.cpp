#include "maggrab/fieldsim.hpp"

#include "maggrab/errors.hpp"
#include "maggrab/sigproc.hpp"

#include <algorithm>
#include <random>

namespace maggrab {

void Conductor::validate() const
{
    if (!(current_rms > 0.0) || !std::isfinite(current_rms)) {
        throw InvalidArgument("conductor current_rms must be > 0");
    }
    if (!(frequency > 0.0) || !std::isfinite(frequency)) {
        throw InvalidArgument("conductor frequency must be > 0");
    }
    if (!is_finite(line.point) || !std::isfinite(phase)) {
        throw InvalidArgument("conductor geometry must be finite");
    }
}

double Conductor::instantaneous_current(double t) const
{
    return std::sqrt(2.0) * current_rms * std::sin(2.0 * kPi * frequency * t + phase);
}

void FieldScene::validate() const
{
    for (const auto& c : conductors) {
        c.validate();
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw InvalidArgument("noise_sigma must be >= 0");
    }
    if (!(full_scale >= 0.0)) {
        throw InvalidArgument("full_scale must be >= 0");
    }
    if (!is_finite(earth_field)) {
        throw InvalidArgument("earth field must be finite");
    }
}

double FieldScene::max_frequency() const
{
    double f = 0.0;
    for (const auto& c : conductors) {
        f = std::max(f, c.frequency);
    }
    return f;
}

namespace {

// Unit field direction and radial distance at p, or PointOnConductor.
std::pair<Vec3, double> field_geometry(const Line3& line, const Vec3& p)
{
    const Vec3 radial = p - closest_point_on_line(line, p);
    const double r = norm(radial);
    if (r <= kMinConductorDistance) {
        throw PointOnConductor();
    }
    const Vec3 tangent = cross(radial, line.direction.vec());
    return {tangent / norm(tangent), r};
}

} // namespace

Vec3 conductor_field_at(const Conductor& c, const Vec3& p, double t)
{
    const auto [dir, r] = field_geometry(c.line, p);
    return dir * (kMu0 * c.instantaneous_current(t) / (2.0 * kPi * r));
}

Vec3 scene_field_at(const FieldScene& s, const Vec3& p, double t)
{
    Vec3 b = s.earth_field;
    for (const auto& c : s.conductors) {
        b += conductor_field_at(c, p, t);
    }
    return b;
}

Vec3 scene_ac_amplitude_at(const FieldScene& s, const Vec3& p, double frequency)
{
    Vec3 b;
    const Conductor* reference = nullptr;
    for (const auto& c : s.conductors) {
        if (c.frequency != frequency) {
            continue;
        }
        if (reference == nullptr) {
            reference = &c;
        }
        const auto [dir, r] = field_geometry(c.line, p);
        const double peak = kMu0 * std::sqrt(2.0) * c.current_rms / (2.0 * kPi * r);
        b += dir * (peak * std::cos(c.phase - reference->phase));
    }
    return b;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SampleWindow sample_sensor(const FieldScene& s, const SensorPose& sp, double rate, std::size_t n,
                           double t0, std::uint64_t stream)
{
    s.validate();
    if (!(rate > 0.0)) {
        throw InvalidArgument("sample rate must be > 0");
    }
    if (n < 2) {
        throw InvalidArgument("window needs at least 2 samples");
    }
    if (!(rate > 2.0 * s.max_frequency())) {
        throw NyquistViolation("sample rate must exceed twice the highest conductor frequency");
    }

    const Vec3 position = sp.pose.translation;
    const RotationMatrix world_to_sensor = sp.pose.rotation.transpose();

    std::mt19937_64 rng(mix_seed(s.rng_seed, stream));
    std::normal_distribution<double> noise(0.0, 1.0);

    SampleWindow w;
    w.rate = rate;
    w.t0 = t0;
    w.xs.reserve(n);
    w.ys.reserve(n);
    w.zs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Vec3 b = world_to_sensor * scene_field_at(s, position, w.time_at(k));
        if (s.noise_sigma > 0.0) {
            // Fixed draw order x, y, z keeps streams reproducible.
            const double nx = noise(rng);
            const double ny = noise(rng);
            const double nz = noise(rng);
            b += Vec3{nx, ny, nz} * s.noise_sigma;
        }
        if (s.full_scale > 0.0) {
            b = {std::clamp(b.x, -s.full_scale, s.full_scale), std::clamp(b.y, -s.full_scale, s.full_scale),
                 std::clamp(b.z, -s.full_scale, s.full_scale)};
        }
        w.push_back(b);
    }
    return w;
}

} // namespace maggrab
