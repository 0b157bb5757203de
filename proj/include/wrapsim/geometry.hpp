#pragma once

#include <cmath>

#include "wrapsim/errors.hpp"

namespace wrapsim {

inline constexpr double kEpsVelocity = 1e-6;  // m/s, below this a direction is undefined
inline constexpr double kEpsArea = 1e-9;      // m^2, collinearity threshold

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const { return *this / norm(); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Unit quaternion, canonical sign w >= 0.
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  /// Renormalizes and flips sign so w >= 0 (idempotent).
  Quat canonicalized() const {
    const double n = norm();
    Quat q{w / n, x / n, y / n, z / n};
    const bool flip = q.w < 0.0 ||
                      (q.w == 0.0 && (q.x < 0.0 ||
                                      (q.x == 0.0 && (q.y < 0.0 ||
                                                      (q.y == 0.0 && q.z < 0.0)))));
    if (flip) { q.w = -q.w; q.x = -q.x; q.y = -q.y; q.z = -q.z; }
    return q;
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  Vec3 rotate(const Vec3& v) const {
    const Vec3 u{x, y, z};
    const Vec3 t = u.cross(v) * 2.0;
    return v + t * w + u.cross(t);
  }

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n < 1e-15) return {};
    const double h = 0.5 * angle;
    const double s = std::sin(h) / n;
    return Quat{std::cos(h), axis.x * s, axis.y * s, axis.z * s}.canonicalized();
  }

  /// Rotation vector (axis * angle) of this quaternion, angle in [0, pi].
  Vec3 to_rotation_vector() const {
    const Quat q = canonicalized();
    const Vec3 v{q.x, q.y, q.z};
    const double s = v.norm();
    if (s < 1e-15) return {0, 0, 0};
    const double angle = 2.0 * std::atan2(s, q.w);
    return v * (angle / s);
  }
};

struct Pose {
  Vec3 position;
  Quat orientation;
};

/// Plane in Hesse form: normal . p = offset, |normal| = 1.
struct Plane {
  Vec3 normal{0, 0, 1};
  double offset = 0.0;
};

struct Wrench {
  Vec3 force;
  Vec3 torque;

  Wrench operator-(const Wrench& o) const { return {force - o.force, torque - o.torque}; }
  double norm() const { return std::sqrt(force.squared_norm() + torque.squared_norm()); }
};

struct Twist {
  Vec3 linear;   // m/s
  Vec3 angular;  // rad/s
};

struct PoseError {
  Vec3 position;    // target - current, meters
  double rotation;  // geodesic angle of the relative quaternion, [0, pi]
};

/// Plane normal to a velocity vector, anchored at the given point.
Plane plane_from_velocity(const Vec3& velocity, const Vec3& anchor);

/// Plane through three non-collinear points; normal sign is canonical
/// (first nonzero component positive).
Plane plane_from_three_points(const Vec3& p0, const Vec3& p1, const Vec3& p2);

PoseError pose_error(const Pose& current, const Pose& target);

/// Rotation vector taking current orientation to target, world frame.
Vec3 orientation_error_vector(const Quat& current, const Quat& target);

/// Pose integrated over dt under a constant twist.
Pose integrate_twist(const Pose& pose, const Twist& twist, double dt);

}  // namespace wrapsim
