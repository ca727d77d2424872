#pragma once

// Two-stage motion: a collision-free joint path to the start of the
// retargeted trajectory, then sequential IK along it with a loose-then-tight
// tolerance schedule. Object-pose perturbations give retry targets when
// either stage fails.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lastinch/collision.hpp"
#include "lastinch/kinematics.hpp"

namespace lastinch {

class PlanFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrackFailure : public std::runtime_error {
 public:
  TrackFailure(std::size_t index, PoseError residual, const std::string& why);
  std::size_t index() const { return index_; }
  PoseError residual() const { return residual_; }

 private:
  std::size_t index_;
  PoseError residual_;
};

class PerturbationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToleranceSchedule {
  double alpha = 0.8;
  Tolerance loose{0.02, deg2rad(10.0)};
  Tolerance tight{0.002, deg2rad(1.0)};

  void validate() const;
  // Waypoints with index below this use the loose tolerance.
  std::size_t split(std::size_t count) const;
  const Tolerance& at(std::size_t index, std::size_t count) const;
};

struct MotionParams {
  IKParams ik;
  double resolution = kPathResolution;
  int via_samples = 500;
  // Cap on via pairs examined in the two-via phase.
  int via_pair_checks = 4000;
  std::uint64_t seed = 0;
};

// Straight joint-space segment when free, otherwise through one or two
// sampled collision-free via configurations. Returns keyframes, start and
// goal included. Throws PlanFailure.
std::vector<JointConfig> plan_joint_path(const KinematicChain& chain, const JointConfig& start, const JointConfig& goal,
                                         const CollisionWorld& world, const MotionParams& params = {});

// Collision-aware IK for `target`, then plan_joint_path to it. Throws
// PlanFailure (including targets only reachable in collision) or IKFailure
// (kinematically unreachable).
std::vector<JointConfig> plan_global(const KinematicChain& chain, const JointConfig& start, const Pose& target,
                                     const CollisionWorld& world, const MotionParams& params = {},
                                     const Tolerance& tol = Tolerance{});

// One configuration per waypoint, each seeded from the previous solution.
// Throws TrackFailure.
std::vector<JointConfig> track_trajectory(const KinematicChain& chain, const JointConfig& q_init,
                                          std::span<const Pose> waypoints, const CollisionWorld& world,
                                          const ToleranceSchedule& schedule = {}, const MotionParams& params = {});

inline constexpr std::size_t kPerturbationLadderSize = 22;

// attempt 1..22: +-{5, 10, 20} mm along base x, y, z, then +-{2.5, 5} deg
// about the object's own z axis. Throws PerturbationExhausted beyond that.
Pose perturb_object_pose(const Pose& object_pose, std::size_t attempt);

}  // namespace lastinch
