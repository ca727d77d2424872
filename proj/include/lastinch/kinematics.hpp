#pragma once

// Serial revolute chains: forward kinematics, geometric Jacobian and a
// damped least-squares IK with joint-limit projection and random restarts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lastinch/actions.hpp"
#include "lastinch/se3.hpp"

namespace lastinch {

class DimensionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Joint {
  UnitVector axis;
  // Parent frame to joint frame, applied before the joint rotation.
  Pose offset;
  double lower = -kPi;
  double upper = kPi;
};

struct CollisionSphere {
  // Index of the joint frame the sphere rides on; -1 for the base.
  int link = 0;
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
};

struct KinematicChain {
  std::vector<Joint> joints;
  Pose ee_offset;
  std::vector<CollisionSphere> spheres;
  JointConfig home;
  std::map<std::string, JointConfig> observation;

  std::size_t dof() const { return joints.size(); }
  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;
  bool within_limits(const JointConfig& q, double slack = 1e-12) const;
  JointConfig clamp(const JointConfig& q) const;
};

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// Frame of every joint after its rotation, base first.
std::vector<Pose> link_frames(const KinematicChain& chain, const JointConfig& q);
Pose forward_kinematics(const KinematicChain& chain, const JointConfig& q);
// Rows 0-2 linear (m/rad), rows 3-5 angular (rad/rad), world frame.
Jacobian jacobian(const KinematicChain& chain, const JointConfig& q);

struct Tolerance {
  double position = 0.002;
  double angle = deg2rad(1.0);

  bool accepts(const PoseError& e) const { return e.position <= position && e.angle <= angle; }
};

struct IKParams {
  double damping = 0.05;
  int max_iterations = 200;
  double step_clamp = 0.2;
  int restarts = 8;
  std::uint64_t seed = 0;
};

class IKFailure : public std::runtime_error {
 public:
  IKFailure(const std::string& what, PoseError best, bool collision_rejected)
      : std::runtime_error(what), best_(best), collision_rejected_(collision_rejected) {}

  PoseError best_residual() const { return best_; }
  // At least one attempt reached the tolerance but collided.
  bool collision_rejected() const { return collision_rejected_; }

 private:
  PoseError best_;
  bool collision_rejected_;
};

struct CollisionWorld;

// Returns a configuration within limits whose end-effector pose is within
// `tol` of `target` and, when `world` is given, collision-free.
JointConfig solve_ik(const KinematicChain& chain, const JointConfig& q0, const Pose& target, const Tolerance& tol,
                     const IKParams& params = {}, const CollisionWorld* world = nullptr);

KinematicChain chain_from_json(const nlohmann::json& j, const std::string& source = "<json>");
nlohmann::json chain_to_json(const KinematicChain& chain);
KinematicChain load_chain(const std::filesystem::path& path);

// 7-DOF test arm (~0.9 m reach) with alternating yaw/pitch joints.
KinematicChain make_test_arm();

nlohmann::json joints_to_json(const JointConfig& q);
JointConfig joints_from_json(const nlohmann::json& j);

}  // namespace lastinch
