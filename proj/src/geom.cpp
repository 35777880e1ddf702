#include "maggrab/geom.hpp"

#include "maggrab/errors.hpp"

#include <algorithm>

namespace maggrab {

double angle_between(const Vec3& a, const Vec3& b)
{
    return std::atan2(norm(cross(a, b)), dot(a, b));
}

UnitVec3 UnitVec3::normalize(const Vec3& v)
{
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw InvalidArgument("cannot normalize a zero or non-finite vector");
    }
    return UnitVec3(v / n);
}

RotationMatrix::RotationMatrix() : m_{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}} {}

RotationMatrix RotationMatrix::from_rows(const Rows& rows)
{
    RotationMatrix r(rows);
    for (const auto& row : rows) {
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("rotation matrix has non-finite entries");
            }
        }
    }
    if (r.orthonormality_error() > 1e-9) {
        throw InvalidArgument("rotation matrix is not orthonormal");
    }
    if (std::abs(r.determinant() - 1.0) > 1e-9) {
        throw InvalidArgument("rotation matrix determinant is not +1");
    }
    return r;
}

RotationMatrix RotationMatrix::from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2)
{
    return from_rows({{{c0.x, c1.x, c2.x}, {c0.y, c1.y, c2.y}, {c0.z, c1.z, c2.z}}});
}

RotationMatrix RotationMatrix::about_axis(const UnitVec3& axis, double angle)
{
    // Rodrigues
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double t = 1.0 - c;
    const double x = axis.x();
    const double y = axis.y();
    const double z = axis.z();
    return RotationMatrix(Rows{{
        {t * x * x + c, t * x * y - s * z, t * x * z + s * y},
        {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
        {t * x * z - s * y, t * y * z + s * x, t * z * z + c},
    }});
}

RotationMatrix RotationMatrix::from_rpy(double roll, double pitch, double yaw)
{
    const auto rz = about_axis(UnitVec3::normalize({0, 0, 1}), yaw);
    const auto ry = about_axis(UnitVec3::normalize({0, 1, 0}), pitch);
    const auto rx = about_axis(UnitVec3::normalize({1, 0, 0}), roll);
    return rz * ry * rx;
}

Vec3 RotationMatrix::operator*(const Vec3& v) const
{
    return {
        m_[0][0] * v.x + m_[0][1] * v.y + m_[0][2] * v.z,
        m_[1][0] * v.x + m_[1][1] * v.y + m_[1][2] * v.z,
        m_[2][0] * v.x + m_[2][1] * v.y + m_[2][2] * v.z,
    };
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& o) const
{
    Rows out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out[i][j] = m_[i][0] * o.m_[0][j] + m_[i][1] * o.m_[1][j] + m_[i][2] * o.m_[2][j];
        }
    }
    return RotationMatrix(out);
}

RotationMatrix RotationMatrix::transpose() const
{
    Rows out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out[i][j] = m_[j][i];
        }
    }
    return RotationMatrix(out);
}

double RotationMatrix::determinant() const
{
    return dot(column(0), cross(column(1), column(2)));
}

double RotationMatrix::orthonormality_error() const
{
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(dot(column(i), column(j)) - expected));
        }
    }
    return worst;
}

Vec3 rotate_vector(const RotationMatrix& r, const Vec3& v)
{
    return r * v;
}

RigidTransform RigidTransform::inverse() const
{
    const RotationMatrix rt = rotation.transpose();
    return {rt, -(rt * translation)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& o) const
{
    return {rotation * o.rotation, rotation * o.translation + translation};
}

namespace {

UnitVec3 canonical_direction(const UnitVec3& d)
{
    constexpr double kSignificant = 1e-12;
    for (int i = 0; i < 3; ++i) {
        const double c = d.vec()[i];
        if (std::abs(c) > kSignificant) {
            return c > 0.0 ? d : -d;
        }
    }
    return d;
}

} // namespace

Line3 Line3::canonical() const
{
    const UnitVec3 dir = canonical_direction(direction);
    const Vec3 foot = point - dir.vec() * dot(point, dir.vec());
    return {foot, dir};
}

Line3 Line3::transformed(const RigidTransform& t) const
{
    return {t.apply(point), UnitVec3::normalize(t.apply_vector(direction))};
}

bool same_line(const Line3& a, const Line3& b, double tol)
{
    const Line3 ca = a.canonical();
    const Line3 cb = b.canonical();
    return norm(ca.direction.vec() - cb.direction.vec()) <= tol && distance(ca.point, cb.point) <= tol;
}

Vec3 closest_point_on_line(const Line3& line, const Vec3& p)
{
    const Vec3& u = line.direction;
    return line.point + u * dot(p - line.point, u);
}

double distance_to_line(const Line3& line, const Vec3& p)
{
    return distance(closest_point_on_line(line, p), p);
}

std::optional<ClosestPoints> closest_points_between_lines(const Line3& a, const Line3& b)
{
    const Vec3& u = a.direction;
    const Vec3& v = b.direction;
    const Vec3 n = cross(u, v);
    const double denom = dot(n, n);
    if (std::sqrt(denom) < kParallelEps) {
        return std::nullopt;
    }
    // Normal equations of min |a.point + s u - b.point - t v|^2.
    const Vec3 w = a.point - b.point;
    const double uu = dot(u, u);
    const double uv = dot(u, v);
    const double vv = dot(v, v);
    const double uw = dot(u, w);
    const double vw = dot(v, w);
    const double s = (uv * vw - vv * uw) / denom;
    const double t = (uu * vw - uv * uw) / denom;
    return ClosestPoints{a.point + u * s, b.point + v * t};
}

} // namespace maggrab
