#pragma once

// Scenario files: environment, objects, robot start state, meshes with
// grasp offsets, planner script and goal clauses.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lastinch/actions.hpp"
#include "lastinch/collision.hpp"
#include "lastinch/kinematics.hpp"

namespace lastinch {

struct MeshEntry {
  std::string id;
  std::string name;
  // End-effector pose in the object frame at the moment of grasping.
  Pose grasp;
};

struct PoseGoal {
  std::string object;
  // Absolute target, or an offset composed onto `relative_to`'s final pose.
  Pose target;
  std::optional<std::string> relative_to;
  double position_tol = 0.01;
  double angle_tol = deg2rad(5.0);
};

struct ContentsGoal {
  std::string container;
  // Satisfied when the contents equal any one of these sets.
  std::vector<std::set<std::string>> any_of;
};

using GoalClause = std::variant<PoseGoal, ContentsGoal>;

std::string describe(const GoalClause& g);

struct GoalResult {
  std::string clause;
  bool satisfied = false;
  std::string detail;
};

std::vector<GoalResult> evaluate_goals(const std::vector<GoalClause>& goals, const World& world);

struct PerceptionNoise {
  bool enabled = false;
  double sigma_t = 0.002;
  double sigma_r = deg2rad(1.0);
};

struct Scenario {
  std::string name;
  std::string instruction;
  EnvironmentInfo env;
  World world;
  RobotState robot;
  std::filesystem::path chain_file;
  std::optional<std::filesystem::path> store_dir;
  std::optional<std::filesystem::path> pointcloud_file;
  double voxel = 0.03;
  std::vector<MeshEntry> meshes;
  std::vector<std::string> planner_script;
  std::vector<GoalClause> goals;
  // Per-seed uniform jitter of initial object poses.
  double jitter_translation = 0.0;
  double jitter_yaw = 0.0;
  PerceptionNoise noise;
};

// Relative paths inside the file resolve against its directory. Throws
// MalformedFile.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const std::string& source = "<json>");

// Copies the environment's home and observation joints from the chain and
// fills a missing start configuration with home.
void bind_chain(Scenario& s, const KinematicChain& chain);

// Seeded jitter of every object's initial pose; saved poses follow.
void apply_jitter(Scenario& s, std::uint64_t seed);

// Fixed objects as boxes, plus the voxelised point cloud when present.
CollisionWorld build_collision_world(const Scenario& s);

nlohmann::json world_to_json(const World& w);
nlohmann::json robot_to_json(const RobotState& r);

}  // namespace lastinch
