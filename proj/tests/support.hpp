#pragma once

// Random generators shared by the unit and acceptance tests.

#include "maggrab/geom.hpp"

#include <random>

namespace maggrab::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_vec(Rng& rng, double lo, double hi)
{
    return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

inline UnitVec3 random_unit(Rng& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    while (true) {
        const Vec3 v{n(rng), n(rng), n(rng)};
        if (norm(v) > 1e-3) {
            return UnitVec3::normalize(v);
        }
    }
}

inline RotationMatrix random_rotation(Rng& rng)
{
    return RotationMatrix::about_axis(random_unit(rng), uniform(rng, -kPi, kPi));
}

inline Line3 random_line(Rng& rng, double extent = 1.0)
{
    return {random_vec(rng, -extent, extent), random_unit(rng)};
}

/// Unit vector perpendicular to `d`.
inline UnitVec3 any_perpendicular(const Vec3& d)
{
    const Vec3 helper = std::abs(d.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return UnitVec3::normalize(cross(d, helper));
}

/// Angle between two line directions with the sign ambiguity folded out.
inline double line_angle(const Vec3& a, const Vec3& b)
{
    return std::atan2(norm(cross(a, b)), std::abs(dot(a, b)));
}

} // namespace maggrab::test
