#include "lastinch/actions.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace lastinch {

namespace {

using K = ParamKind;

struct Schema {
  ActionType type;
  std::string_view name;
  std::vector<ParamKind> params;
};

const std::vector<Schema>& schemas() {
  static const std::vector<Schema> table = {
      {ActionType::LookForAt, "LookForAt", {K::Object, K::Location}},
      {ActionType::LookFor, "LookFor", {K::Object}},
      {ActionType::Pick, "Pick", {K::Object}},
      {ActionType::Pour, "Pour", {K::Object, K::Object}},
      {ActionType::PlaceBack, "PlaceBack", {K::Object}},
      {ActionType::Place, "Place", {K::Object, K::Location}},
      {ActionType::PlaceBetween, "PlaceBetween", {K::Object, K::Object, K::Object}},
      {ActionType::PlaceInFront, "PlaceInFront", {K::Object, K::Object}},
      {ActionType::Face, "Face", {K::Location}},
      {ActionType::InitPose, "InitPose", {}},
  };
  return table;
}

const Schema& schema(ActionType t) {
  for (const auto& s : schemas())
    if (s.type == t) return s;
  throw std::logic_error("action schema missing");
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

Predicate pred(Predicate::Kind k, std::string arg = {}, std::string arg2 = {}, std::string subject = {}) {
  return {k, std::move(arg), std::move(arg2), std::move(subject)};
}

bool is_held(const RobotState& s, const std::string& x) { return s.held && *s.held == x; }

// Requirements for acting on an object where it currently sits: it must be
// placed somewhere and, if `need_facing`, the camera must face that spot.
void require_reachable(std::vector<Predicate>& unmet, const RobotState& s, const World& world, const std::string& x,
                       bool need_facing) {
  const auto& loc = world.at(x).location;
  if (loc.empty()) {
    unmet.push_back(pred(Predicate::Kind::Placed, x));
    return;
  }
  if (need_facing && s.facing != loc) unmet.push_back(pred(Predicate::Kind::Facing, loc, {}, x));
}

void require_holding(std::vector<Predicate>& unmet, const RobotState& s, const std::string& x) {
  if (!is_held(s, x)) unmet.push_back(pred(Predicate::Kind::Holding, x));
}

void require_saved(std::vector<Predicate>& unmet, const RobotState& s, const std::string& x) {
  if (!s.saved.contains(x)) unmet.push_back(pred(Predicate::Kind::Saved, x));
}

void set_observation(RobotState& r, const EnvironmentInfo& env, const std::string& loc) {
  r.facing = loc;
  if (auto it = env.observation.find(loc); it != env.observation.end()) r.joints = it->second;
}

Pose slot_pose(const EnvironmentInfo& env, const World& world, const std::string& loc_id, const std::string& self) {
  const Location& loc = env.locations.at(loc_id);
  std::vector<Pose> candidates;
  if (loc.slots.empty()) {
    candidates.push_back(loc.pose);
  } else {
    for (const auto& s : loc.slots) candidates.push_back(compose(loc.pose, s));
  }
  // First slot with no other object within slot_clearance; if all are taken,
  // the one with the largest clearance.
  std::size_t best = 0;
  double best_clearance = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double clearance = std::numeric_limits<double>::infinity();
    for (const auto& [id, rec] : world) {
      if (id == self || rec.location.empty()) continue;
      clearance = std::min(clearance, (rec.pose.translation - candidates[i].translation).norm());
    }
    if (clearance >= env.slot_clearance) return candidates[i];
    if (clearance > best_clearance) {
      best_clearance = clearance;
      best = i;
    }
  }
  return candidates[best];
}

}  // namespace

std::string_view action_name(ActionType t) { return schema(t).name; }

std::optional<ActionType> parse_action_name(std::string_view name) {
  for (const auto& s : schemas())
    if (iequals(s.name, name)) return s.type;
  return std::nullopt;
}

std::size_t arity(ActionType t) { return schema(t).params.size(); }
const std::vector<ParamKind>& signature(ActionType t) { return schema(t).params; }

bool is_placement(ActionType t) {
  return t == ActionType::Place || t == ActionType::PlaceBack || t == ActionType::PlaceInFront ||
         t == ActionType::PlaceBetween;
}

bool is_key(ActionType t) { return is_placement(t) || t == ActionType::Pick || t == ActionType::Pour; }

std::string to_string(const ActionInstance& a) {
  std::string out(action_name(a.type));
  out += '(';
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (i) out += ", ";
    out += a.params[i];
  }
  out += ')';
  return out;
}

bool Location::contains(const Vec3& p) const {
  const Vec3 local = invert(pose).apply(p);
  return (local.cwiseAbs() - half_extents).maxCoeff() <= 1e-9;
}

bool RobotState::operator==(const RobotState& o) const {
  return facing == o.facing && held == o.held && saved == o.saved && origin == o.origin &&
         joints.size() == o.joints.size() && joints == o.joints;
}

std::string Predicate::describe() const {
  switch (kind) {
    case Kind::GripperEmpty: return "gripper-empty";
    case Kind::Holding: return "holding(" + arg + ")";
    case Kind::Saved: return "saved(" + arg + ")";
    case Kind::Facing: return "facing(" + arg + ")";
    case Kind::Placed: return "placed(" + arg + ")";
    case Kind::At: return "at(" + arg + ", " + arg2 + ")";
    case Kind::OriginKnown: return "origin-saved(" + arg + ")";
  }
  return "?";
}

std::string PreconditionFailure::describe_unmet() const {
  std::string out;
  for (std::size_t i = 0; i < unmet.size(); ++i) {
    if (i) out += ", ";
    out += unmet[i].describe();
  }
  return out;
}

std::string locate(const EnvironmentInfo& env, const Vec3& p) {
  for (const auto& [id, loc] : env.locations)
    if (loc.contains(p)) return id;
  std::string best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, loc] : env.locations) {
    const double d = (loc.pose.translation - p).norm();
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

void check_symbols(const ActionInstance& a, const World& world, const EnvironmentInfo& env) {
  const auto& sig = signature(a.type);
  if (a.params.size() != sig.size())
    throw std::invalid_argument(std::string(action_name(a.type)) + ": expected " + std::to_string(sig.size()) +
                                " parameters, got " + std::to_string(a.params.size()));
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const auto& p = a.params[i];
    if (sig[i] == ParamKind::Object && !world.contains(p)) throw UnknownSymbol("unknown object '" + p + "'");
    if (sig[i] == ParamKind::Location && !env.locations.contains(p))
      throw UnknownSymbol("unknown location '" + p + "'");
  }
}

std::optional<PreconditionFailure> check_preconditions(const ActionInstance& a, const RobotState& s,
                                                        const World& world, const EnvironmentInfo& env) {
  check_symbols(a, world, env);
  std::vector<Predicate> unmet;
  const auto& p = a.params;
  using PK = Predicate::Kind;
  switch (a.type) {
    case ActionType::LookFor:
      require_reachable(unmet, s, world, p[0], false);
      break;
    case ActionType::LookForAt:
      if (world.at(p[0]).location != p[1]) unmet.push_back(pred(PK::At, p[0], p[1]));
      break;
    case ActionType::Face:
    case ActionType::InitPose:
      break;
    case ActionType::Pick:
      if (s.held) unmet.push_back(pred(PK::GripperEmpty));
      require_saved(unmet, s, p[0]);
      require_reachable(unmet, s, world, p[0], true);
      break;
    case ActionType::Place:
      require_holding(unmet, s, p[0]);
      if (s.facing != p[1]) unmet.push_back(pred(PK::Facing, p[1]));
      break;
    case ActionType::PlaceBack:
      require_holding(unmet, s, p[0]);
      if (!s.origin.contains(p[0])) unmet.push_back(pred(PK::OriginKnown, p[0]));
      break;
    case ActionType::PlaceInFront:
      require_holding(unmet, s, p[0]);
      require_saved(unmet, s, p[1]);
      require_reachable(unmet, s, world, p[1], true);
      break;
    case ActionType::PlaceBetween:
      require_holding(unmet, s, p[0]);
      require_saved(unmet, s, p[1]);
      require_saved(unmet, s, p[2]);
      require_reachable(unmet, s, world, p[1], false);
      require_reachable(unmet, s, world, p[2], false);
      break;
    case ActionType::Pour:
      require_holding(unmet, s, p[0]);
      require_saved(unmet, s, p[1]);
      require_reachable(unmet, s, world, p[1], true);
      break;
  }
  if (unmet.empty()) return std::nullopt;
  std::sort(unmet.begin(), unmet.end());
  unmet.erase(std::unique(unmet.begin(), unmet.end()), unmet.end());
  return PreconditionFailure{a, std::move(unmet)};
}

std::optional<Pose> placement_pose(const ActionInstance& a, const RobotState& s, const World& world,
                                   const EnvironmentInfo& env) {
  const auto& p = a.params;
  switch (a.type) {
    case ActionType::Place:
      return slot_pose(env, world, p[1], p[0]);
    case ActionType::PlaceBack:
      return s.origin.at(p[0]);
    case ActionType::PlaceInFront: {
      const Pose& ref = s.saved.at(p[1]);
      const Location& loc = env.locations.at(world.at(p[1]).location);
      const Vec3 offset = loc.pose.rotation.apply(loc.front_axis.normalized()) * env.front_offset;
      return Pose{ref.rotation, ref.translation + offset};
    }
    case ActionType::PlaceBetween: {
      const Pose& a_pose = s.saved.at(p[1]);
      const Pose& b_pose = s.saved.at(p[2]);
      return Pose{a_pose.rotation, 0.5 * (a_pose.translation + b_pose.translation)};
    }
    default:
      return std::nullopt;
  }
}

Transition apply_effect(const ActionInstance& a, const RobotState& s, const World& world, const EnvironmentInfo& env) {
  if (auto failure = check_preconditions(a, s, world, env))
    throw PreconditionViolated(to_string(a) + ": unmet " + failure->describe_unmet());
  Transition next{s, world};
  RobotState& r = next.robot;
  World& w = next.world;
  const auto& p = a.params;
  switch (a.type) {
    case ActionType::LookFor:
      r.saved[p[0]] = w.at(p[0]).pose;
      set_observation(r, env, w.at(p[0]).location);
      break;
    case ActionType::LookForAt:
      r.saved[p[0]] = w.at(p[0]).pose;
      set_observation(r, env, p[1]);
      break;
    case ActionType::Face:
      set_observation(r, env, p[0]);
      break;
    case ActionType::InitPose:
      r.joints = env.home;
      if (env.home_facing.empty()) {
        r.facing.reset();
      } else {
        r.facing = env.home_facing;
      }
      break;
    case ActionType::Pick:
      r.held = p[0];
      r.origin[p[0]] = w.at(p[0]).pose;
      w.at(p[0]).location.clear();
      break;
    case ActionType::Place:
    case ActionType::PlaceBack:
    case ActionType::PlaceInFront:
    case ActionType::PlaceBetween: {
      const Pose target = *placement_pose(a, s, world, env);
      std::string loc;
      if (a.type == ActionType::Place) {
        loc = p[1];
      } else if (a.type == ActionType::PlaceInFront || a.type == ActionType::PlaceBetween) {
        loc = world.at(p[1]).location;
      } else {
        loc = locate(env, target.translation);
      }
      auto& obj = w.at(p[0]);
      obj.pose = target;
      obj.location = loc;
      r.saved[p[0]] = target;
      r.held.reset();
      break;
    }
    case ActionType::Pour: {
      auto& src = w.at(p[0]);
      auto& dst = w.at(p[1]);
      dst.contents.insert(dst.contents.end(), src.contents.begin(), src.contents.end());
      src.contents.clear();
      break;
    }
  }
  return next;
}

PlanValidation validate_plan(const std::vector<ActionInstance>& plan, const RobotState& s_init, const World& world,
                             const EnvironmentInfo& env) {
  PlanValidation out;
  out.end = {s_init, world};
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (auto failure = check_preconditions(plan[i], out.end.robot, out.end.world, env)) {
      out.valid = false;
      out.failed_index = i;
      out.failure = std::move(failure);
      return out;
    }
    out.end = apply_effect(plan[i], out.end.robot, out.end.world, env);
  }
  return out;
}

}  // namespace lastinch
