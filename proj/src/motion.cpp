#include "lastinch/motion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lastinch {

TrackFailure::TrackFailure(std::size_t index, PoseError residual, const std::string& why)
    : std::runtime_error("tracking failed at waypoint " + std::to_string(index) + ": " + why),
      index_(index),
      residual_(residual) {}

void ToleranceSchedule::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("tolerance schedule: alpha must be in (0, 1]");
  if (tight.position > loose.position || tight.angle > loose.angle)
    throw std::invalid_argument("tolerance schedule: tight tolerance must not exceed loose");
}

std::size_t ToleranceSchedule::split(std::size_t count) const {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(count) + 1e-9));
}

const Tolerance& ToleranceSchedule::at(std::size_t index, std::size_t count) const {
  return index < split(count) ? loose : tight;
}

namespace {

JointConfig sample_near(const KinematicChain& chain, const JointConfig& centre, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  JointConfig q = centre;
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] += n(rng);
  return chain.clamp(q);
}

}  // namespace

std::vector<JointConfig> plan_joint_path(const KinematicChain& chain, const JointConfig& start, const JointConfig& goal,
                                         const CollisionWorld& world, const MotionParams& params) {
  if (collision_check(chain, start, world)) throw PlanFailure("start configuration is in collision");
  if (collision_check(chain, goal, world)) throw PlanFailure("goal configuration is in collision");
  if (segment_free(chain, start, goal, world, params.resolution)) return {start, goal};

  std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  const JointConfig mid = 0.5 * (start + goal);
  std::vector<JointConfig> from_start;
  std::vector<JointConfig> to_goal;

  // Single via; spread grows with the sample index.
  for (int i = 0; i < params.via_samples; ++i) {
    const double sigma = 0.2 + 2.8 * static_cast<double>(i) / std::max(1, params.via_samples - 1);
    JointConfig via = sample_near(chain, mid, sigma, rng);
    if (collision_check(chain, via, world)) continue;
    const bool a = segment_free(chain, start, via, world, params.resolution);
    const bool b = segment_free(chain, via, goal, world, params.resolution);
    if (a && b) return {start, via, goal};
    if (a) from_start.push_back(via);
    if (b) to_goal.push_back(via);
  }

  // Two vias: a start-reachable sample joined to a goal-reachable one.
  int checks = 0;
  for (const auto& v1 : from_start) {
    for (const auto& v2 : to_goal) {
      if (++checks > params.via_pair_checks) throw PlanFailure("no collision-free path within the sample budget");
      if (segment_free(chain, v1, v2, world, params.resolution)) return {start, v1, v2, goal};
    }
  }
  throw PlanFailure("no collision-free path within the sample budget");
}

std::vector<JointConfig> plan_global(const KinematicChain& chain, const JointConfig& start, const Pose& target,
                                     const CollisionWorld& world, const MotionParams& params, const Tolerance& tol) {
  if (collision_check(chain, start, world)) throw PlanFailure("start configuration is in collision");
  IKParams ik = params.ik;
  ik.seed = params.seed;
  JointConfig goal;
  try {
    goal = solve_ik(chain, start, target, tol, ik, &world);
  } catch (const IKFailure& e) {
    if (e.collision_rejected()) throw PlanFailure(std::string("every IK solution collides: ") + e.what());
    throw;
  }
  return plan_joint_path(chain, start, goal, world, params);
}

std::vector<JointConfig> track_trajectory(const KinematicChain& chain, const JointConfig& q_init,
                                          std::span<const Pose> waypoints, const CollisionWorld& world,
                                          const ToleranceSchedule& schedule, const MotionParams& params) {
  schedule.validate();
  if (waypoints.empty()) throw std::invalid_argument("track_trajectory: no waypoints");
  if (collision_check(chain, q_init, world)) throw TrackFailure(0, {}, "initial configuration is in collision");
  std::vector<JointConfig> out;
  out.reserve(waypoints.size());
  JointConfig prev = q_init;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    const Tolerance& tol = schedule.at(i, waypoints.size());
    IKParams ik = params.ik;
    ik.seed = params.seed + i;
    JointConfig q;
    try {
      q = solve_ik(chain, prev, waypoints[i], tol, ik, &world);
    } catch (const IKFailure& e) {
      throw TrackFailure(i, e.best_residual(), e.what());
    }
    if (!segment_free(chain, prev, q, world, params.resolution))
      throw TrackFailure(i, pose_error(forward_kinematics(chain, q), waypoints[i]), "joint motion collides");
    out.push_back(q);
    prev = q;
  }
  return out;
}

Pose perturb_object_pose(const Pose& object_pose, std::size_t attempt) {
  if (attempt < 1 || attempt > kPerturbationLadderSize)
    throw PerturbationExhausted("perturbation ladder has " + std::to_string(kPerturbationLadderSize) +
                                " entries, attempt " + std::to_string(attempt) + " requested");
  const std::size_t k = attempt - 1;
  if (k < 18) {
    constexpr double kSteps[] = {0.005, 0.01, 0.02};
    const double delta = kSteps[k / 6];
    const int axis = static_cast<int>((k % 6) / 2);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    Pose out = object_pose;
    out.translation[axis] += sign * delta;
    return out;
  }
  constexpr double kAngles[] = {2.5, 5.0};
  const std::size_t r = k - 18;
  const double angle = deg2rad(kAngles[r / 2]) * ((r % 2 == 0) ? 1.0 : -1.0);
  return compose(object_pose, Pose{rot_z(angle), Vec3::Zero()});
}

}  // namespace lastinch
