#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace manugrip {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid transform (rotation then translation): x_world = q * x_local + p.
struct Pose {
    Quat q{1.0, 0.0, 0.0, 0.0};
    Vec3 p{0.0, 0.0, 0.0};

    static Pose identity() { return Pose{}; }

    Pose operator*(const Pose& other) const {
        return Pose{(q * other.q).normalized(), p + q * other.p};
    }

    Vec3 operator*(const Vec3& x) const { return q * x + p; }

    Pose inverse() const {
        const Quat qi = q.conjugate();
        return Pose{qi, qi * (-p)};
    }
};

/// Angle of the relative rotation between two poses, in radians.
inline double rotation_angle(const Quat& a, const Quat& b) {
    const Quat r = a.conjugate() * b;
    const double s = r.vec().norm();
    return 2.0 * std::atan2(s, std::abs(r.w()));
}

inline Quat quat_from_axis_angle(const Vec3& axis, double angle) {
    return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("non-finite value for ") + what);
    }
}

// ---------------------------------------------------------------------------
// Closest-point / distance primitives (Ericson, Real-Time Collision Detection)
// ---------------------------------------------------------------------------

/// Closest point on triangle (a,b,c) to p; bary receives barycentric weights.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* bary = nullptr);

inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

/// Closest points between segments [p1,q1] and [p2,q2]; returns distance,
/// witnesses in c1/c2, segment parameters in s/t when requested.
double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                                Vec3* c1 = nullptr, Vec3* c2 = nullptr,
                                double* s = nullptr, double* t = nullptr);

/// Minimum distance between segment [p,q] and triangle (a,b,c).
/// on_seg/on_tri receive the closest points when requested.
double segment_triangle_distance(const Vec3& p, const Vec3& q,
                                 const Vec3& a, const Vec3& b, const Vec3& c,
                                 Vec3* on_seg = nullptr, Vec3* on_tri = nullptr);

/// Möller–Trumbore. Returns true when the ray (origin, dir) hits the triangle;
/// t_out is the ray parameter of the hit. Used by inside-test parity casting.
bool ray_triangle_intersect(const Vec3& origin, const Vec3& dir,
                            const Vec3& a, const Vec3& b, const Vec3& c,
                            double* t_out = nullptr, double eps = 1e-14);

/// True when segment [p,q] crosses the triangle's plane within the triangle.
bool segment_triangle_intersect(const Vec3& p, const Vec3& q,
                                const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace manugrip
