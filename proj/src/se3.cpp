#include "lastinch/se3.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "lastinch/kernels.hpp"

namespace lastinch {

namespace {

// Past this cosine the direct formula divides by a vanishing 1 + c.
constexpr double kFlipCosine = -0.9;

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  const double n2 = q.squaredNorm();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw std::invalid_argument("rotation: quaternion has zero or non-finite norm");
  if (std::abs(n2 - 1.0) > 1e-15) q.coeffs() /= std::sqrt(n2);
  const bool flip = q.w() < 0.0 ||
                    (q.w() == 0.0 &&
                     (q.x() < 0.0 || (q.x() == 0.0 && (q.y() < 0.0 || (q.y() == 0.0 && q.z() < 0.0)))));
  if (flip) q.coeffs() = -q.coeffs();
  return q;
}

// Valid for c > -1; accurate while c stays away from -1.
Mat3 rodrigues_stable(const Vec3& from, const Vec3& to) {
  const Vec3 v = from.cross(to);
  const double c = from.dot(to);
  const Mat3 k = skew(v);
  // (1 - c) / |v|^2 == 1 / (1 + c) for unit inputs.
  return Mat3::Identity() + k + k * k / (1.0 + c);
}

Vec3 smallest_component_perpendicular(const Vec3& v) {
  int axis = 0;
  if (std::abs(v.y()) < std::abs(v[axis])) axis = 1;
  if (std::abs(v.z()) < std::abs(v[axis])) axis = 2;
  return v.cross(Vec3::Unit(axis)).normalized();
}

}  // namespace

UnitVector::UnitVector(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DegenerateDirection("unit vector: zero or non-finite input");
  v_ = v / n;
}

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(canonical(q)) {}

Rotation Rotation::from_wxyz(double w, double x, double y, double z) {
  return Rotation(Eigen::Quaterniond(w, x, y, z));
}

Rotation Rotation::from_matrix(const Mat3& m) { return Rotation(Eigen::Quaterniond(m)); }

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

Pose Pose::from_matrix(const Mat4& m) {
  return {Rotation::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Rotation rot_x(double angle) { return Rotation::from_axis_angle(Vec3::UnitX(), angle); }
Rotation rot_y(double angle) { return Rotation::from_axis_angle(Vec3::UnitY(), angle); }
Rotation rot_z(double angle) { return Rotation::from_axis_angle(Vec3::UnitZ(), angle); }

Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation.apply(b.translation) + a.translation};
}

Pose invert(const Pose& p) {
  const Rotation inv = p.rotation.inverse();
  return {inv, -inv.apply(p.translation)};
}

UnitVector unit_direction(const Vec3& from, const Vec3& to, double eps) {
  const Vec3 d = to - from;
  if (!(d.norm() > eps)) throw DegenerateDirection("unit_direction: points coincide");
  return UnitVector(d);
}

Mat3 rodrigues_matrix(const UnitVector& from, const UnitVector& to) {
  const double c = from.vec().dot(to.vec());
  if (c >= kFlipCosine) return rodrigues_stable(from.vec(), to.vec());
  // Half turn onto -from, then the well-conditioned rotation -from -> to.
  const Vec3 axis = smallest_component_perpendicular(from.vec());
  const Mat3 flip = 2.0 * axis * axis.transpose() - Mat3::Identity();
  return rodrigues_stable(-from.vec(), to.vec()) * flip;
}

Rotation rodrigues_rotation(const UnitVector& from, const UnitVector& to) {
  return Rotation::from_matrix(rodrigues_matrix(from, to));
}

std::vector<Vec3> rotate_about_fixed_point(std::span<const Vec3> points, const Rotation& r,
                                           const Vec3& fixed) {
  return kernels::rotate_about_omp(points, r.matrix(), fixed);
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  const Eigen::Quaterniond rel = a.quaternion().conjugate() * b.quaternion();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

PoseError pose_error(const Pose& a, const Pose& b) {
  return {(a.translation - b.translation).norm(), geodesic_angle(a.rotation, b.rotation)};
}

Mat3 skew(const Vec3& v) {
  Mat3 k;
  k << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return k;
}

nlohmann::json vec_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("expected an array of 3 numbers");
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) throw std::invalid_argument("non-finite component");
  }
  return v;
}

nlohmann::json pose_to_json(const Pose& p) {
  const auto& q = p.rotation.quaternion();
  return {{"t", vec_to_json(p.translation)}, {"q", nlohmann::json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("pose: expected an object with \"t\" and \"q\"");
  if (!j.contains("t")) throw std::invalid_argument("pose: missing \"t\"");
  if (!j.contains("q")) throw std::invalid_argument("pose: missing \"q\"");
  Vec3 t;
  try {
    t = vec_from_json(j.at("t"));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("pose.t: ") + e.what());
  }
  const auto& q = j.at("q");
  if (!q.is_array() || q.size() != 4 ||
      !std::all_of(q.begin(), q.end(), [](const nlohmann::json& x) { return x.is_number(); })) {
    throw std::invalid_argument("pose.q: expected an array of 4 numbers [w, x, y, z]");
  }
  try {
    return {Rotation::from_wxyz(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()), t};
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("pose.q: ") + e.what());
  }
}

}  // namespace lastinch
