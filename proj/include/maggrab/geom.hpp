#pragma once

#include <array>
#include <cmath>
#include <optional>

namespace maggrab {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

// Angle in [0, pi] between two nonzero vectors. atan2 form stays accurate
// near 0 and pi where acos of the normalized dot product does not.
double angle_between(const Vec3& a, const Vec3& b);

/// Vector of Euclidean length one. Constructible only through normalization,
/// so every instance satisfies |v| = 1 to rounding.
class UnitVec3 {
public:
    /// Throws InvalidArgument for zero or non-finite input.
    static UnitVec3 normalize(const Vec3& v);

    constexpr UnitVec3() : v_{1.0, 0.0, 0.0} {}

    constexpr const Vec3& vec() const { return v_; }
    constexpr operator const Vec3&() const { return v_; }
    constexpr double x() const { return v_.x; }
    constexpr double y() const { return v_.y; }
    constexpr double z() const { return v_.z; }
    constexpr UnitVec3 operator-() const { return UnitVec3(-v_); }
    constexpr bool operator==(const UnitVec3&) const = default;

private:
    constexpr explicit UnitVec3(const Vec3& v) : v_(v) {}
    Vec3 v_;
};

/// Proper rotation (orthonormal, det +1). Stored row-major.
class RotationMatrix {
public:
    using Rows = std::array<std::array<double, 3>, 3>;

    RotationMatrix();  // identity

    static RotationMatrix identity() { return {}; }
    /// Validates orthonormality and det = +1 within 1e-9; throws InvalidArgument.
    static RotationMatrix from_rows(const Rows& rows);
    static RotationMatrix from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2);
    /// Right-handed rotation by `angle` radians about `axis`.
    static RotationMatrix about_axis(const UnitVec3& axis, double angle);
    /// R = Rz(yaw) * Ry(pitch) * Rx(roll).
    static RotationMatrix from_rpy(double roll, double pitch, double yaw);

    double operator()(int r, int c) const { return m_[r][c]; }
    const Rows& rows() const { return m_; }
    Vec3 column(int c) const { return {m_[0][c], m_[1][c], m_[2][c]}; }

    Vec3 operator*(const Vec3& v) const;
    RotationMatrix operator*(const RotationMatrix& o) const;
    RotationMatrix transpose() const;
    RotationMatrix inverse() const { return transpose(); }
    double determinant() const;

    /// Largest absolute entry of R^T R - I.
    double orthonormality_error() const;

    bool operator==(const RotationMatrix&) const = default;

private:
    explicit RotationMatrix(const Rows& rows) : m_(rows) {}
    Rows m_;
};

Vec3 rotate_vector(const RotationMatrix& r, const Vec3& v);

/// Maps points from a child frame into its parent: p_parent = R p_child + t.
struct RigidTransform {
    RotationMatrix rotation;
    Vec3 translation;

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_vector(const Vec3& v) const { return rotation * v; }
    RigidTransform inverse() const;
    /// (this * o).apply(p) == this->apply(o.apply(p))
    RigidTransform operator*(const RigidTransform& o) const;

    bool operator==(const RigidTransform&) const = default;
};

/// Infinite line. Two instances describe the same line regardless of which
/// point on it is stored or which way the direction points; use same_line()
/// or compare canonical() forms.
struct Line3 {
    Vec3 point;
    UnitVec3 direction;

    Vec3 at(double t) const { return point + direction.vec() * t; }

    /// Point closest to the origin, direction with positive first
    /// significant component (|c| > 1e-12).
    Line3 canonical() const;

    Line3 transformed(const RigidTransform& t) const;
};

bool same_line(const Line3& a, const Line3& b, double tol = 1e-9);

Vec3 closest_point_on_line(const Line3& line, const Vec3& p);
double distance_to_line(const Line3& line, const Vec3& p);

/// Cross-product norm of unit directions below which two lines are treated as
/// parallel by closest_points_between_lines.
inline constexpr double kParallelEps = 1e-9;

struct ClosestPoints {
    Vec3 on_a;
    Vec3 on_b;
};

/// Mutually closest points of two lines, nullopt when the lines are parallel.
std::optional<ClosestPoints> closest_points_between_lines(const Line3& a, const Line3& b);

} // namespace maggrab
