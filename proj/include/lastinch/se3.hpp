#pragma once

// Rigid-body math shared by every other module: poses, rotations, the
// trajectory alignment primitives and angular metrics.

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json_fwd.hpp>

namespace lastinch {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDirectionEpsilon = 1e-6;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

class DegenerateDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A direction of unit length. Construction normalises; the only way to get
// one from two points is unit_direction(), which rejects coincident points.
class UnitVector {
 public:
  UnitVector() : v_(Vec3::UnitX()) {}
  explicit UnitVector(const Vec3& v);

  const Vec3& vec() const { return v_; }
  double operator[](int i) const { return v_[i]; }

 private:
  Vec3 v_;
};

// Unit quaternion stored (w, x, y, z) with w >= 0.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q);
  static Rotation from_wxyz(double w, double x, double y, double z);
  // The matrix must be orthonormal up to round-off.
  static Rotation from_matrix(const Mat3& m);
  static Rotation from_axis_angle(const Vec3& axis, double angle);
  static Rotation identity() { return {}; }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Vec3 apply(const Vec3& v) const { return q_ * v; }

  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  bool operator==(const Rotation& other) const { return q_.coeffs() == other.q_.coeffs(); }

 private:
  Eigen::Quaterniond q_;
};

struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose translate(double x, double y, double z) { return {Rotation{}, Vec3(x, y, z)}; }
  static Pose from_matrix(const Mat4& m);

  Mat4 matrix() const;
  Vec3 apply(const Vec3& p) const { return rotation.apply(p) + translation; }

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

Rotation rot_x(double angle);
Rotation rot_y(double angle);
Rotation rot_z(double angle);

// Applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);

// Throws DegenerateDirection when the points coincide within eps.
UnitVector unit_direction(const Vec3& from, const Vec3& to, double eps = kDirectionEpsilon);

// Rotation taking `from` onto `to` through the Rodrigues construction
// R = I + [v]x + [v]x^2 (1 - c) / |v|^2 with v = from x to, c = from . to.
Rotation rodrigues_rotation(const UnitVector& from, const UnitVector& to);

// Same construction, returned as the raw 3x3 matrix (no quaternion round trip).
Mat3 rodrigues_matrix(const UnitVector& from, const UnitVector& to);

// x' = R (x - fixed) + fixed for each point.
std::vector<Vec3> rotate_about_fixed_point(std::span<const Vec3> points, const Rotation& r,
                                           const Vec3& fixed);

// Angle of a^-1 b, in [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

// Position distance and geodesic angle between two poses.
struct PoseError {
  double position = 0.0;
  double angle = 0.0;
};
PoseError pose_error(const Pose& a, const Pose& b);

Mat3 skew(const Vec3& v);

// {"t": [x, y, z], "q": [w, x, y, z]}
nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const nlohmann::json& j);

}  // namespace lastinch
