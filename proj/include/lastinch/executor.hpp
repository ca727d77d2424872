#pragma once

// Action manager: perception stub, demonstration retargeting and
// alignment, per-action motion with perturb-and-retry, and whole-scenario
// runs producing a JSON execution report.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lastinch/actions.hpp"
#include "lastinch/collision.hpp"
#include "lastinch/kinematics.hpp"
#include "lastinch/motion.hpp"
#include "lastinch/refinement.hpp"
#include "lastinch/scenario.hpp"
#include "lastinch/trajectory.hpp"

namespace lastinch {

class UnknownObject : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ActionExecutionFailure : public std::runtime_error {
 public:
  ActionExecutionFailure(const ActionInstance& action, std::vector<std::string> errors);
  const ActionInstance& action() const { return action_; }
  // One entry per attempt, oldest first.
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  ActionInstance action_;
  std::vector<std::string> errors_;
};

struct PoseObservation {
  std::string object;
  Pose pose;
  double timestamp = 0.0;
};

// Ground-truth pose lookup with optional seeded Gaussian noise.
class Perception {
 public:
  explicit Perception(PerceptionNoise noise = {}, std::uint64_t seed = 0);
  // Throws UnknownObject.
  PoseObservation observe_pose(const std::string& object, const World& world);

 private:
  PerceptionNoise noise_;
  std::mt19937_64 rng_;
  double clock_ = 0.0;
};

// Each waypoint composed onto `object_pose`. Throws EmptyTrajectory.
std::vector<Pose> generate_initial_trajectory(const SkillTrajectory& skill, const Pose& object_pose);

// Rotates the waypoints about the final one so the path starts on the ray
// from the target towards `current_ee`; orientations are pre-multiplied by
// the same rotation. Degenerate inputs come back unchanged.
std::vector<Pose> align_trajectory(std::span<const Pose> traj, const Pose& current_ee);

struct ActionLog {
  ActionInstance action;
  std::string status = "skipped";
  std::size_t perturbations = 0;
  std::vector<std::string> errors;
  // Keyframes; consecutive entries are joined by straight joint motion.
  std::vector<JointConfig> joint_path;
  // Aligned end-effector targets that were tracked.
  std::vector<Pose> waypoints;
  std::string mesh;
};

struct SimContext {
  const KinematicChain* chain = nullptr;
  const TrajectoryStore* store = nullptr;
  const std::vector<MeshEntry>* meshes = nullptr;
  const Scenario* scenario = nullptr;
  CollisionWorld collision;
  Perception perception;
  PlannerBackend* mesh_backend = nullptr;
  MotionParams motion;
  ToleranceSchedule schedule;
  // Object pose in the end-effector frame, per held object.
  std::map<std::string, Pose> grasps;
  std::size_t collision_rebuilds = 0;
};

struct ExecState {
  RobotState robot;
  World world;
};

// Runs one action against the simulated arm and applies its effect.
// Throws ActionExecutionFailure (state untouched) or PreconditionViolated.
ActionLog execute_action(const ActionInstance& a, ExecState& state, SimContext& ctx);

struct RunConfig {
  std::uint64_t seed = 0;
  bool grounded_search = true;
  std::size_t max_iterations = 10;
  // Overrides the scenario's perception noise switch when set.
  std::optional<bool> perception_noise;
  bool timings = false;
  MotionParams motion;
  ToleranceSchedule schedule;
};

struct ExecutionReport {
  std::string scenario;
  std::uint64_t seed = 0;
  bool success = false;
  RefinementOutcome refinement;
  std::vector<ActionLog> actions;
  World final_world;
  RobotState final_robot;
  std::vector<GoalResult> goals;
  std::string error;
  std::size_t collision_rebuilds = 0;
  std::optional<double> refinement_seconds;
  std::optional<double> execution_seconds;
};

// Never throws for planning or execution failures; those land in the report.
ExecutionReport run_scenario(const Scenario& scenario, const KinematicChain& chain, const TrajectoryStore& store,
                             const RunConfig& cfg, PlannerBackend* backend = nullptr);

nlohmann::json report_to_json(const ExecutionReport& r);

}  // namespace lastinch
