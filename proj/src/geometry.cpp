#include "wrapsim/geometry.hpp"

namespace wrapsim {

Plane plane_from_velocity(const Vec3& velocity, const Vec3& anchor) {
  const double n = velocity.norm();
  if (n <= kEpsVelocity) throw DegenerateVelocity{};
  const Vec3 unit = velocity / n;
  return {unit, unit.dot(anchor)};
}

Plane plane_from_three_points(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  const Vec3 cross = (p1 - p0).cross(p2 - p0);
  if (0.5 * cross.norm() <= kEpsArea) throw CollinearPoints{};
  Vec3 normal = cross.normalized();
  const double kZero = 1e-12;
  double lead = 0.0;
  if (std::abs(normal.x) > kZero) lead = normal.x;
  else if (std::abs(normal.y) > kZero) lead = normal.y;
  else lead = normal.z;
  if (lead < 0.0) normal = -normal;
  return {normal, normal.dot(p0)};
}

PoseError pose_error(const Pose& current, const Pose& target) {
  const Quat rel = current.orientation.conjugate() * target.orientation;
  const Quat q = rel.canonicalized();
  const double s = Vec3{q.x, q.y, q.z}.norm();
  const double angle = 2.0 * std::atan2(s, q.w);
  return {target.position - current.position, angle};
}

Vec3 orientation_error_vector(const Quat& current, const Quat& target) {
  return (target * current.conjugate()).to_rotation_vector();
}

Pose integrate_twist(const Pose& pose, const Twist& twist, double dt) {
  Pose out;
  out.position = pose.position + twist.linear * dt;
  const double wn = twist.angular.norm();
  if (wn < 1e-12) {
    out.orientation = pose.orientation;
  } else {
    const Quat dq = Quat::from_axis_angle(twist.angular / wn, wn * dt);
    out.orientation = (dq * pose.orientation).canonicalized();
  }
  return out;
}

}  // namespace wrapsim
