#pragma once

// Symbolic-plus-continuous robot state machine: the ten primitive actions,
// their preconditions and effects, and sequential plan validation.

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lastinch/se3.hpp"

namespace lastinch {

using JointConfig = Eigen::VectorXd;

enum class ActionType { LookForAt, LookFor, Pick, Pour, PlaceBack, Place, PlaceBetween, PlaceInFront, Face, InitPose };

inline constexpr ActionType kAllActionTypes[] = {
    ActionType::LookForAt, ActionType::LookFor, ActionType::Pick,         ActionType::Pour,
    ActionType::PlaceBack, ActionType::Place,   ActionType::PlaceBetween, ActionType::PlaceInFront,
    ActionType::Face,      ActionType::InitPose};

enum class ParamKind { Object, Location };

std::string_view action_name(ActionType t);
// Case-insensitive.
std::optional<ActionType> parse_action_name(std::string_view name);
std::size_t arity(ActionType t);
const std::vector<ParamKind>& signature(ActionType t);

bool is_placement(ActionType t);
bool is_key(ActionType t);

struct ActionInstance {
  ActionType type = ActionType::InitPose;
  std::vector<std::string> params;

  auto operator<=>(const ActionInstance&) const = default;
};

// "Place(cola, staging)"; "InitPose()".
std::string to_string(const ActionInstance& a);

class UnknownSymbol : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class PreconditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Location {
  Pose pose;
  // Region owned by the location, in its own frame, centred on `pose`.
  Vec3 half_extents = Vec3(0.2, 0.2, 0.3);
  // Placement slots in the location frame; empty means the location pose.
  std::vector<Pose> slots;
  // Direction, in the location frame, that "in front of" moves along.
  Vec3 front_axis = Vec3(-1.0, 0.0, 0.0);

  bool contains(const Vec3& p) const;
};

struct FixedObject {
  Pose pose;
  Vec3 half_extents = Vec3::Zero();
};

struct EnvironmentInfo {
  std::map<std::string, Location> locations;
  std::map<std::string, FixedObject> fixed_objects;
  std::string default_place_location;
  // Facing after InitPose; may name a location or be empty.
  std::string home_facing;
  JointConfig home;
  std::map<std::string, JointConfig> observation;
  double front_offset = 0.12;
  double slot_clearance = 0.05;
};

struct ObjectRecord {
  std::string id;
  std::string mesh;
  Pose pose;
  // Empty while the object is in the gripper.
  std::string location;
  std::vector<std::string> contents;

  bool operator==(const ObjectRecord&) const = default;
};

using World = std::map<std::string, ObjectRecord>;

struct RobotState {
  std::optional<std::string> facing;
  std::optional<std::string> held;
  std::map<std::string, Pose> saved;
  // Pose each object had when it was last picked up, for PlaceBack.
  std::map<std::string, Pose> origin;
  JointConfig joints;

  bool operator==(const RobotState& o) const;
};

struct Predicate {
  enum class Kind { GripperEmpty, Holding, Saved, Facing, Placed, At, OriginKnown };
  Kind kind = Kind::GripperEmpty;
  // Object (Holding, Saved, Placed, At, OriginKnown) or location (Facing).
  std::string arg;
  // Location for At.
  std::string arg2;
  // Object whose location a Facing predicate refers to, if any.
  std::string subject;

  // "gripper-empty", "holding(x)", "saved(x)", "facing(L)", ...
  std::string describe() const;
  auto operator<=>(const Predicate&) const = default;
};

struct PreconditionFailure {
  ActionInstance action;
  std::vector<Predicate> unmet;

  std::string describe_unmet() const;
};

// Known-symbol and parameter-kind check. Throws UnknownSymbol.
void check_symbols(const ActionInstance& a, const World& world, const EnvironmentInfo& env);

// nullopt when every precondition holds; otherwise all unmet predicates.
std::optional<PreconditionFailure> check_preconditions(const ActionInstance& a, const RobotState& s,
                                                        const World& world, const EnvironmentInfo& env);

struct Transition {
  RobotState robot;
  World world;
};

// Throws PreconditionViolated when preconditions do not hold.
Transition apply_effect(const ActionInstance& a, const RobotState& s, const World& world, const EnvironmentInfo& env);

// Where a Place-family action would put the held object; nullopt for
// other action types.
std::optional<Pose> placement_pose(const ActionInstance& a, const RobotState& s, const World& world,
                                   const EnvironmentInfo& env);

// The location whose region contains `p`, else the one with the nearest centre.
std::string locate(const EnvironmentInfo& env, const Vec3& p);

struct PlanValidation {
  bool valid = true;
  std::size_t failed_index = 0;
  std::optional<PreconditionFailure> failure;
  // State after the valid prefix (the whole plan when valid).
  Transition end;
};

PlanValidation validate_plan(const std::vector<ActionInstance>& plan, const RobotState& s_init, const World& world,
                             const EnvironmentInfo& env);

}  // namespace lastinch
