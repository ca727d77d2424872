#pragma once

// Hand-rolled generators and small fixtures shared by the test binaries.

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lastinch/actions.hpp"
#include "lastinch/se3.hpp"
#include "lastinch/trajectory.hpp"

namespace testing {

using namespace lastinch;

inline std::filesystem::path data_dir() { return LASTINCH_DATA_DIR; }

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  Vec3 vec(double scale = 1.0) { return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)); }

  Vec3 unit() {
    Vec3 v;
    do v = Vec3(normal(), normal(), normal());
    while (v.norm() < 1e-6);
    return v.normalized();
  }

  // Uniform on SO(3) via a normalised Gaussian quaternion.
  Rotation rotation() {
    Eigen::Vector4d q;
    do q = Eigen::Vector4d(normal(), normal(), normal(), normal());
    while (q.norm() < 1e-6);
    q.normalize();
    return Rotation::from_wxyz(q[0], q[1], q[2], q[3]);
  }

  Pose pose(double scale = 1.0) { return {rotation(), vec(scale)}; }

  // A unit vector within `angle` radians of `v`, at exactly that angle.
  Vec3 tilted(const Vec3& v, double angle) {
    Vec3 axis = v.cross(unit());
    while (axis.norm() < 1e-6) axis = v.cross(unit());
    return Rotation::from_axis_angle(axis.normalized(), angle).apply(v).normalized();
  }

  // Dense random walk: small steps in translation and rotation.
  std::vector<Waypoint> dense_walk(std::size_t n, double step, double turn) {
    std::vector<Waypoint> out;
    Pose p = pose(0.5);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({p, 0.05 * static_cast<double>(i)});
      p.translation += vec(step);
      p.rotation = Rotation::from_axis_angle(unit(), uniform(0.0, turn)) * p.rotation;
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

inline bool near(const Pose& a, const Pose& b, double eps) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff() <= eps;
}

// Two-location symbolic world: objects on "shelf", default placement on
// "staging".
struct SymbolicScene {
  EnvironmentInfo env;
  World world;
  RobotState robot;
};

inline SymbolicScene symbolic_scene(const std::vector<std::string>& objects) {
  SymbolicScene s;
  Location shelf;
  shelf.pose = Pose::translate(0.6, 0.0, 0.2);
  Location staging;
  staging.pose = Pose::translate(0.0, 0.6, 0.2);
  s.env.locations = {{"shelf", shelf}, {"staging", staging}};
  s.env.default_place_location = "staging";
  s.env.home = JointConfig::Zero(3);
  s.env.observation = {{"shelf", JointConfig::Constant(3, 0.5)}, {"staging", JointConfig::Constant(3, -0.5)}};
  double y = -0.1;
  for (const auto& id : objects) {
    ObjectRecord r;
    r.id = id;
    r.mesh = "can";
    r.pose = Pose::translate(0.6, y, 0.2);
    r.location = "shelf";
    s.world[id] = r;
    y += 0.1;
  }
  s.robot.joints = s.env.home;
  return s;
}

inline ActionInstance act(ActionType t, std::vector<std::string> params = {}) { return {t, std::move(params)}; }

}  // namespace testing
