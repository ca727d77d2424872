#include "lastinch/scenario.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lastinch/io.hpp"

namespace lastinch {

using nlohmann::json;

namespace {

std::string join_set(const std::set<std::string>& s) {
  std::string out = "{";
  for (const auto& x : s) {
    if (out.size() > 1) out += ", ";
    out += x;
  }
  return out + "}";
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

Vec3 vec_or(const json& j, const char* key, const Vec3& fallback) {
  return j.contains(key) ? vec_from_json(j.at(key)) : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Location location_from_json(const json& j) {
  Location loc;
  loc.pose = pose_from_json(j.at("pose"));
  loc.half_extents = vec_or(j, "half_extents", loc.half_extents);
  loc.front_axis = vec_or(j, "front_axis", loc.front_axis);
  if (j.contains("slots"))
    for (const auto& s : j.at("slots")) loc.slots.push_back(pose_from_json(s));
  return loc;
}

std::string text_of(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_array()) throw std::invalid_argument("expected a string or an array of lines");
  std::string out;
  for (const auto& line : j) out += line.get<std::string>() + "\n";
  return out;
}

GoalClause goal_from_json(const json& j) {
  if (j.contains("container")) {
    ContentsGoal g;
    g.container = j.at("container").get<std::string>();
    for (const auto& option : j.at("any_of")) g.any_of.push_back(as_set(option.get<std::vector<std::string>>()));
    if (g.any_of.empty()) throw std::invalid_argument("contents goal needs at least one option");
    return g;
  }
  PoseGoal g;
  g.object = j.at("object").get<std::string>();
  if (j.contains("relative_to")) {
    g.relative_to = j.at("relative_to").get<std::string>();
    g.target = pose_from_json(j.at("offset"));
  } else {
    g.target = pose_from_json(j.at("pose"));
  }
  if (j.contains("position_tol")) g.position_tol = j.at("position_tol").get<double>();
  if (j.contains("angle_tol_deg")) g.angle_tol = deg2rad(j.at("angle_tol_deg").get<double>());
  return g;
}

}  // namespace

std::string describe(const GoalClause& g) {
  if (const auto* c = std::get_if<ContentsGoal>(&g)) {
    std::string out = "contents(" + c->container + ") in [";
    for (std::size_t i = 0; i < c->any_of.size(); ++i) out += (i ? ", " : "") + join_set(c->any_of[i]);
    return out + "]";
  }
  const auto& p = std::get<PoseGoal>(g);
  return "pose(" + p.object + (p.relative_to ? ") relative to " + *p.relative_to : ")");
}

std::vector<GoalResult> evaluate_goals(const std::vector<GoalClause>& goals, const World& world) {
  std::vector<GoalResult> out;
  for (const auto& g : goals) {
    GoalResult r{describe(g), false, {}};
    if (const auto* c = std::get_if<ContentsGoal>(&g)) {
      const auto it = world.find(c->container);
      if (it == world.end()) {
        r.detail = "unknown container";
      } else {
        const auto have = as_set(it->second.contents);
        r.satisfied = std::find(c->any_of.begin(), c->any_of.end(), have) != c->any_of.end();
        r.detail = "contents " + join_set(have);
      }
    } else {
      const auto& p = std::get<PoseGoal>(g);
      const auto obj = world.find(p.object);
      const auto ref = p.relative_to ? world.find(*p.relative_to) : world.end();
      if (obj == world.end() || (p.relative_to && ref == world.end())) {
        r.detail = "unknown object";
      } else if (obj->second.location.empty()) {
        r.detail = "object still held";
      } else {
        const Pose target = p.relative_to ? compose(ref->second.pose, p.target) : p.target;
        const PoseError e = pose_error(obj->second.pose, target);
        r.satisfied = e.position <= p.position_tol && e.angle <= p.angle_tol;
        std::ostringstream d;
        d << "error " << e.position << " m, " << rad2deg(e.angle) << " deg";
        r.detail = d.str();
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir, const std::string& source) {
  Scenario s;
  if (!j.is_object()) throw MalformedFile(source, 0, "", "expected a JSON object");
  s.name = with_field(source, "name", [&] { return j.value("name", std::string("scenario")); });
  s.instruction = with_field(source, "instruction", [&] { return j.at("instruction").get<std::string>(); });
  s.chain_file = with_field(source, "chain", [&] { return resolve(base_dir, j.at("chain").get<std::string>()); });
  if (j.contains("store"))
    s.store_dir = with_field(source, "store", [&] { return resolve(base_dir, j.at("store").get<std::string>()); });
  if (j.contains("pointcloud"))
    s.pointcloud_file =
        with_field(source, "pointcloud", [&] { return resolve(base_dir, j.at("pointcloud").get<std::string>()); });
  s.voxel = with_field(source, "voxel", [&] { return j.value("voxel", 0.03); });

  const json& e = with_field(source, "environment", [&]() -> const json& { return j.at("environment"); });
  with_field(source, "environment", [&] {
    for (const auto& [id, lj] : e.at("locations").items()) s.env.locations[id] = location_from_json(lj);
    if (e.contains("fixed_objects"))
      for (const auto& [id, fj] : e.at("fixed_objects").items())
        s.env.fixed_objects[id] = FixedObject{pose_from_json(fj.at("pose")), vec_from_json(fj.at("half_extents"))};
    s.env.default_place_location = e.value("default_place_location", std::string());
    s.env.home_facing = e.value("home_facing", std::string());
    s.env.front_offset = e.value("front_offset", s.env.front_offset);
    s.env.slot_clearance = e.value("slot_clearance", s.env.slot_clearance);
    return 0;
  });
  if (!s.env.default_place_location.empty() && !s.env.locations.contains(s.env.default_place_location))
    throw MalformedFile(source, 0, "environment.default_place_location", "unknown location");

  const auto& objects = with_field(source, "objects", [&]() -> const json& { return j.at("objects"); });
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string field = "objects[" + std::to_string(i) + "]";
    ObjectRecord rec = with_field(source, field, [&] {
      const auto& o = objects[i];
      ObjectRecord r;
      r.id = o.at("id").get<std::string>();
      r.mesh = o.value("mesh", std::string());
      r.pose = pose_from_json(o.at("pose"));
      r.location = o.value("location", std::string());
      if (o.contains("contents")) r.contents = o.at("contents").get<std::vector<std::string>>();
      return r;
    });
    if (rec.location.empty()) rec.location = locate(s.env, rec.pose.translation);
    if (!s.env.locations.contains(rec.location)) throw MalformedFile(source, 0, field + ".location", "unknown location");
    if (s.world.contains(rec.id)) throw MalformedFile(source, 0, field + ".id", "duplicate object id '" + rec.id + "'");
    s.world[rec.id] = std::move(rec);
  }

  if (j.contains("robot")) {
    with_field(source, "robot", [&] {
      const auto& r = j.at("robot");
      if (r.contains("facing") && !r.at("facing").is_null()) s.robot.facing = r.at("facing").get<std::string>();
      if (r.contains("saved"))
        for (const auto& id : r.at("saved")) {
          const auto it = s.world.find(id.get<std::string>());
          if (it == s.world.end()) throw std::invalid_argument("saved: unknown object");
          s.robot.saved[it->first] = it->second.pose;
        }
      if (r.contains("joints")) s.robot.joints = joints_from_json(r.at("joints"));
      return 0;
    });
  }

  const auto& meshes = with_field(source, "meshes", [&]() -> const json& { return j.at("meshes"); });
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    s.meshes.push_back(with_field(source, "meshes[" + std::to_string(i) + "]", [&] {
      const auto& m = meshes[i];
      return MeshEntry{m.at("id").get<std::string>(), m.value("name", m.at("id").get<std::string>()),
                       pose_from_json(m.at("grasp"))};
    }));
  }
  if (s.meshes.empty()) throw MalformedFile(source, 0, "meshes", "at least one mesh is required");

  if (j.contains("planner_script"))
    with_field(source, "planner_script", [&] {
      for (const auto& r : j.at("planner_script")) s.planner_script.push_back(text_of(r));
      return 0;
    });

  if (j.contains("goal")) {
    const auto& goals = j.at("goal");
    for (std::size_t i = 0; i < goals.size(); ++i) {
      const std::string field = "goal[" + std::to_string(i) + "]";
      GoalClause g = with_field(source, field, [&] { return goal_from_json(goals[i]); });
      const auto known = [&](const std::string& id) { return s.world.contains(id); };
      if (const auto* p = std::get_if<PoseGoal>(&g)) {
        if (!known(p->object) || (p->relative_to && !known(*p->relative_to)))
          throw MalformedFile(source, 0, field, "goal references an unknown object");
      } else if (!known(std::get<ContentsGoal>(g).container)) {
        throw MalformedFile(source, 0, field, "goal references an unknown object");
      }
      s.goals.push_back(std::move(g));
    }
  }

  if (j.contains("jitter")) {
    with_field(source, "jitter", [&] {
      s.jitter_translation = j.at("jitter").value("translation", 0.0);
      s.jitter_yaw = deg2rad(j.at("jitter").value("yaw_deg", 0.0));
      return 0;
    });
  }
  if (j.contains("perception_noise")) {
    with_field(source, "perception_noise", [&] {
      const auto& n = j.at("perception_noise");
      s.noise.enabled = n.value("enabled", false);
      s.noise.sigma_t = n.value("sigma_t", s.noise.sigma_t);
      s.noise.sigma_r = deg2rad(n.value("sigma_r_deg", rad2deg(s.noise.sigma_r)));
      return 0;
    });
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(load_json_file(path), path.parent_path(), path.string());
}

void bind_chain(Scenario& s, const KinematicChain& chain) {
  s.env.home = chain.home;
  s.env.observation = chain.observation;
  if (s.robot.joints.size() == 0) s.robot.joints = chain.home;
  if (static_cast<std::size_t>(s.robot.joints.size()) != chain.dof())
    throw DimensionMismatch("scenario start joints do not match the chain");
}

void apply_jitter(Scenario& s, std::uint64_t seed) {
  if (s.jitter_translation <= 0.0 && s.jitter_yaw <= 0.0) return;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& [id, rec] : s.world) {
    const double dx = s.jitter_translation * u(rng);
    const double dy = s.jitter_translation * u(rng);
    const double yaw = s.jitter_yaw * u(rng);
    rec.pose = Pose{rot_z(yaw) * rec.pose.rotation, rec.pose.translation + Vec3(dx, dy, 0.0)};
    if (auto it = s.robot.saved.find(id); it != s.robot.saved.end()) it->second = rec.pose;
  }
}

CollisionWorld build_collision_world(const Scenario& s) {
  CollisionWorld world;
  if (s.pointcloud_file) world = world_from_pointcloud(load_pointcloud(*s.pointcloud_file), s.voxel);
  for (const auto& [id, f] : s.env.fixed_objects) world.boxes.push_back(aabb_of(f.pose, f.half_extents));
  return world;
}

json world_to_json(const World& w) {
  json out = json::object();
  for (const auto& [id, rec] : w) {
    out[id] = {{"mesh", rec.mesh}, {"pose", pose_to_json(rec.pose)}, {"location", rec.location},
               {"contents", rec.contents}};
  }
  return out;
}

json robot_to_json(const RobotState& r) {
  json saved = json::object();
  for (const auto& [id, p] : r.saved) saved[id] = pose_to_json(p);
  return {{"facing", r.facing ? json(*r.facing) : json(nullptr)},
          {"held", r.held ? json(*r.held) : json(nullptr)},
          {"saved", saved},
          {"joints", joints_to_json(r.joints)}};
}

}  // namespace lastinch
