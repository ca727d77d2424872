// Regenerates the bundled work cell: chain file with home and observation
// configurations, raw demonstrations with sidecars, point cloud and the
// three task scenarios. Usage: lastinch_fixtures <data-dir>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lastinch/collision.hpp"
#include "lastinch/io.hpp"
#include "lastinch/kinematics.hpp"
#include "lastinch/se3.hpp"

using namespace lastinch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kSurface = 0.15;
constexpr double kGraspHeight = 0.06;
constexpr double kObserveRadius = 0.30;
constexpr double kApproach = 0.15;
constexpr double kPitchStart = 1.2;
constexpr double kPitchEnd = 0.8;

// Pour keyframes in the container frame: start, then the spot where the
// wrist rolls.
const Vec3 kPourStart(-0.22, 0.0, 0.22);
const Vec3 kPourSpot(-0.08, 0.0, 0.17);

struct Site {
  const char* id;
  double yaw;
  double radius;
  // Height of the observing end effector above the surface; chosen so it
  // sits on the back-extension of the skill's approach line.
  double observe_height;
};

const Site kShelf{"shelf", 0.0, 0.60, kGraspHeight};
const Site kStaging{"staging", 0.9, 0.57, kGraspHeight};
const Site kCoaster{"coaster", -1.15, 0.50, kGraspHeight};
const Site kMixing{"mixing", -0.55, 0.50,
                   kPourSpot.z() + (0.50 + kPourSpot.x() - kObserveRadius) * (kPourStart.z() - kPourSpot.z()) /
                                       (kPourSpot.x() - kPourStart.x())};

Pose site_pose(const Site& s, double radius) {
  return Pose{rot_z(s.yaw), Vec3(radius * std::cos(s.yaw), radius * std::sin(s.yaw), kSurface)};
}

Pose site_pose(const Site& s) { return site_pose(s, s.radius); }

// Gripper z axis along the local x axis, tipped down by `pitch`.
Rotation gripper(double pitch) { return rot_y(kPi / 2 + pitch); }

json box(const Pose& p, const Vec3& half) { return {{"pose", pose_to_json(p)}, {"half_extents", vec_to_json(half)}}; }

json fixed_objects() {
  json f = json::object();
  const Vec3 c(0.60, 0.0, 0.0);
  f["shelf_bottom"] = box(Pose::translate(c.x(), 0.0, kSurface - 0.015), Vec3(0.20, 0.15, 0.015));
  f["shelf_top"] = box(Pose::translate(c.x(), 0.0, 0.66), Vec3(0.20, 0.15, 0.01));
  f["shelf_left"] = box(Pose::translate(c.x(), 0.14, 0.40), Vec3(0.20, 0.01, 0.25));
  f["shelf_right"] = box(Pose::translate(c.x(), -0.14, 0.40), Vec3(0.20, 0.01, 0.25));
  f["shelf_back"] = box(Pose::translate(0.805, 0.0, 0.40), Vec3(0.005, 0.15, 0.25));
  for (const Site* s : {&kStaging, &kCoaster, &kMixing}) {
    Pose p = site_pose(*s);
    p.translation.z() = kSurface / 2;
    const double depth = s == &kStaging ? 0.15 : 0.09;
    f[std::string(s->id) + "_table"] = box(p, Vec3(depth, 0.09, kSurface / 2));
  }
  return f;
}

json locations() {
  json l = json::object();
  l["shelf"] = {{"pose", pose_to_json(site_pose(kShelf))},
                {"half_extents", vec_to_json(Vec3(0.20, 0.13, 0.20))},
                {"slots", json::array({pose_to_json(Pose::translate(0.06, 0.0, 0.0))})},
                {"front_axis", vec_to_json(Vec3(-1, 0, 0))}};
  json staging_slots = json::array();
  for (double x : {-0.09, 0.0, 0.09}) staging_slots.push_back(pose_to_json(Pose::translate(x, 0.0, 0.0)));
  l["staging"] = {{"pose", pose_to_json(site_pose(kStaging))},
                  {"half_extents", vec_to_json(Vec3(0.16, 0.12, 0.20))},
                  {"slots", staging_slots}};
  l["coaster"] = {{"pose", pose_to_json(site_pose(kCoaster))}, {"half_extents", vec_to_json(Vec3(0.12, 0.14, 0.20))}};
  l["mixing"] = {{"pose", pose_to_json(site_pose(kMixing))}, {"half_extents", vec_to_json(Vec3(0.12, 0.14, 0.20))}};
  return l;
}

// Clutter column beside the coaster table, sampled every centimetre.
std::vector<Vec3> clutter_points() {
  const Pose centre = site_pose(kCoaster, 0.78);
  std::vector<Vec3> pts;
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j)
      for (int k = 0; k <= 30; ++k)
        pts.push_back(centre.rotation.apply(Vec3(-0.04 + 0.01 * i, -0.04 + 0.01 * j, 0.0)) +
                      Vec3(centre.translation.x(), centre.translation.y(), 0.01 * k));
  return pts;
}

CollisionWorld cell_world(const std::vector<Vec3>& cloud) {
  CollisionWorld w = world_from_pointcloud(cloud, 0.03);
  const json fixed = fixed_objects();
  for (const auto& [id, f] : fixed.items())
    w.boxes.push_back(aabb_of(pose_from_json(f.at("pose")), vec_from_json(f.at("half_extents"))));
  return w;
}

JointConfig solve_free(const KinematicChain& chain, const JointConfig& seed, const Pose& target,
                       const CollisionWorld& world) {
  IKParams p;
  p.restarts = 40;
  return solve_ik(chain, seed, target, Tolerance{0.001, deg2rad(0.5)}, p, &world);
}

struct Sample {
  Vec3 position;
  Rotation rotation;
};

// Raw demonstration in the world frame: `reference` composed with the local
// keyframes, sampled at 20 Hz with seeded sensor noise and a short hold.
json raw_demo(const std::vector<Sample>& keys, const Pose& reference, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nt(0.0, 0.0004);
  json out = json::array();
  double t = 0.0;
  constexpr int kPerSegment = 20;
  auto emit = [&](const Pose& local, bool noisy) {
    Pose w = compose(reference, local);
    if (noisy) w.translation += Vec3(nt(rng), nt(rng), nt(rng));
    out.push_back({{"t", t}, {"pose", pose_to_json(w)}});
    t += 0.05;
  };
  for (std::size_t k = 0; k + 1 < keys.size(); ++k) {
    for (int i = 0; i < kPerSegment; ++i) {
      const double s = static_cast<double>(i) / kPerSegment;
      const double e = 0.5 - 0.5 * std::cos(kPi * s);
      const Vec3 p = keys[k].position + e * (keys[k + 1].position - keys[k].position);
      const Rotation r(keys[k].rotation.quaternion().slerp(e, keys[k + 1].rotation.quaternion()));
      emit(Pose{r, p}, k + 1 < keys.size() && (k > 0 || i > 0));
    }
  }
  for (int i = 0; i < 5; ++i) emit(Pose{keys.back().rotation, keys.back().position}, false);
  return out;
}

json mesh(const char* id, const char* name) {
  return {{"id", id}, {"name", name}, {"grasp", pose_to_json(Pose{gripper(kPitchEnd), Vec3(0, 0, kGraspHeight)})}};
}

json object(const char* id, const char* mesh_id, const Pose& pose, const char* location,
            std::vector<std::string> contents = {}) {
  return {{"id", id}, {"mesh", mesh_id}, {"pose", pose_to_json(pose)}, {"location", location}, {"contents", contents}};
}

json base_scenario(const char* name, const char* instruction) {
  return {{"name", name},
          {"instruction", instruction},
          {"chain", "../chains/arm7.json"},
          {"store", "../trajectories"},
          {"environment",
           {{"locations", locations()},
            {"fixed_objects", fixed_objects()},
            {"default_place_location", "staging"},
            {"home_facing", ""},
            {"front_offset", 0.10},
            {"slot_clearance", 0.05}}},
          {"robot", {{"facing", nullptr}, {"saved", json::array()}}},
          {"meshes", json::array({mesh("bottle", "Bottle"), mesh("bowl", "Bowl"), mesh("can", "Can"),
                                  mesh("cup", "Cup")})},
          {"jitter", {{"translation", 0.007}, {"yaw_deg", 0.0}}},
          {"perception_noise", {{"enabled", false}, {"sigma_t", 0.002}, {"sigma_r_deg", 1.0}}}};
}

Pose staging_slot(double x) { return compose(site_pose(kStaging), Pose::translate(x, 0.0, 0.0)); }

void write_json(const fs::path& p, const json& j) {
  write_text_file(p, j.dump(2) + "\n");
  std::printf("wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <data-dir>\n", argv[0]);
    return 2;
  }
  const fs::path dir = argv[1];

  const auto cloud = clutter_points();
  {
    fs::create_directories(dir / "clouds");
    std::ofstream out(dir / "clouds" / "clutter.xyz");
    out << "# clutter column beside the coaster table\n";
    for (const auto& p : cloud) out << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
  const CollisionWorld world = cell_world(cloud);

  KinematicChain chain = make_test_arm();
  chain.home = solve_free(chain, chain.home, Pose{gripper(kPitchStart), Vec3(0.22, 0.0, 0.40)}, world);
  for (const Site* s : {&kShelf, &kStaging, &kCoaster, &kMixing}) {
    const Pose target{rot_z(s->yaw) * gripper(kPitchStart),
                      Vec3(kObserveRadius * std::cos(s->yaw), kObserveRadius * std::sin(s->yaw), kSurface + s->observe_height)};
    chain.observation[s->id] = solve_free(chain, chain.home, target, world);
  }
  write_json(dir / "chains" / "arm7.json", chain_to_json(chain));

  // Approach along the local x axis at grasp height, tipping the gripper up
  // as it closes in.
  const std::vector<Sample> approach = {{Vec3(-kApproach, 0, kGraspHeight), gripper(kPitchStart)},
                                        {Vec3(-0.06, 0, kGraspHeight), gripper(1.0)},
                                        {Vec3(0, 0, kGraspHeight), gripper(kPitchEnd)}};
  const std::vector<Sample> pour = {{kPourStart, gripper(kPitchStart)},
                                    {kPourSpot, gripper(1.0)},
                                    {kPourSpot, gripper(1.0) * rot_z(deg2rad(50))},
                                    {kPourSpot, gripper(1.0) * rot_z(deg2rad(100))}};
  const Pose pick_ref{rot_z(0.3), Vec3(0.55, 0.12, 0.02)};
  const Pose place_ref{rot_z(-0.4), Vec3(0.48, -0.20, 0.10)};
  const Pose pour_ref{rot_z(0.1), Vec3(0.52, 0.05, 0.05)};
  struct Demo {
    const char* skill;
    const std::vector<Sample>* keys;
    Pose reference;
    std::uint64_t seed;
  };
  for (const Demo& d : {Demo{"pick", &approach, pick_ref, 11}, Demo{"place", &approach, place_ref, 12},
                        Demo{"pour", &pour, pour_ref, 13}}) {
    write_json(dir / "demos" / (std::string(d.skill) + "_raw.json"), raw_demo(*d.keys, d.reference, d.seed));
    write_json(dir / "demos" / (std::string(d.skill) + "_meta.json"),
               {{"skill", d.skill}, {"reference_pose", pose_to_json(d.reference)}});
  }

  // Tight shelf retrieval onto the coaster.
  {
    json s = base_scenario("tight_shelf_retrieval", "Take the green bottle out of the shelf and put it on the coaster.");
    s["pointcloud"] = "../clouds/clutter.xyz";
    s["objects"] = json::array({object("green_bottle", "bottle", site_pose(kShelf, 0.62), "shelf"),
                                object("orange_can", "can", staging_slot(0.09), "staging")});
    s["planner_script"] = json::array({json::array(
        {"1. LookFor(green_bottle)", "2. Pick(green_bottle)", "3. Face(coaster)", "4. Place(green_bottle, coaster)"})});
    s["goal"] = json::array({{{"object", "green_bottle"}, {"pose", pose_to_json(site_pose(kCoaster))}}});
    write_json(dir / "scenarios" / "tight_shelf_retrieval.json", s);
  }
  // Pour to make green.
  {
    json s = base_scenario("pour_green", "Make the liquid in the blue bowl green.");
    s["objects"] = json::array({object("yellow_cup", "cup", staging_slot(0.0), "staging", {"yellow"}),
                                object("blue_bowl", "bowl", site_pose(kMixing), "mixing", {"blue"})});
    s["planner_script"] = json::array({json::array({"1. LookFor(yellow_cup)", "2. Pick(yellow_cup)",
                                                    "3. LookFor(blue_bowl)", "4. Pour(yellow_cup, blue_bowl)",
                                                    "5. Face(staging)", "6. Place(yellow_cup, staging)"})});
    s["goal"] = json::array(
        {{{"container", "blue_bowl"}, {"any_of", json::array({json::array({"blue", "yellow"}), json::array({"green"})})}}});
    write_json(dir / "scenarios" / "pour_green.json", s);
  }
  // Row stocking; the script picks twice in a row and never fixes it.
  {
    json s = base_scenario("row_stocking", "Stock the three cans on the shelf in a single row, front to back.");
    s["environment"]["default_place_location"] = "shelf";
    s["objects"] = json::array({object("can_a", "can", staging_slot(-0.09), "staging"),
                                object("can_b", "can", staging_slot(0.0), "staging"),
                                object("can_c", "can", staging_slot(0.09), "staging")});
    s["planner_script"] = json::array(
        {json::array({"1. LookFor(can_a)", "2. Pick(can_a)", "3. Pick(can_b)", "4. PlaceInFront(can_b, can_a)",
                      "5. LookFor(can_c)", "6. Pick(can_c)", "7. Face(shelf)", "8. PlaceInFront(can_c, can_b)"})});
    const json behind = pose_to_json(Pose::translate(-0.10, 0.0, 0.0));
    s["goal"] = json::array({{{"object", "can_a"}, {"pose", pose_to_json(site_pose(kShelf, 0.66))}},
                             {{"object", "can_b"}, {"relative_to", "can_a"}, {"offset", behind}},
                             {{"object", "can_c"}, {"relative_to", "can_b"}, {"offset", behind}}});
    write_json(dir / "scenarios" / "row_stocking.json", s);
  }
  return 0;
}
