#include "lastinch/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace lastinch {

std::string_view to_string(SkillKind s) {
  switch (s) {
    case SkillKind::Pick: return "pick";
    case SkillKind::Place: return "place";
    case SkillKind::Pour: return "pour";
  }
  return "?";
}

std::string_view to_string(ReferenceFrameKind r) {
  switch (r) {
    case ReferenceFrameKind::TargetContainer: return "target_container";
    case ReferenceFrameKind::InitialObjectPose: return "initial_object_pose";
    case ReferenceFrameKind::FinalObjectPose: return "final_object_pose";
  }
  return "?";
}

std::optional<SkillKind> parse_skill(std::string_view s) {
  for (SkillKind k : {SkillKind::Pick, SkillKind::Place, SkillKind::Pour})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<ReferenceFrameKind> parse_reference(std::string_view s) {
  for (ReferenceFrameKind k : {ReferenceFrameKind::TargetContainer, ReferenceFrameKind::InitialObjectPose,
                               ReferenceFrameKind::FinalObjectPose})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

ReferenceFrameKind reference_for(SkillKind s) {
  switch (s) {
    case SkillKind::Pick: return ReferenceFrameKind::InitialObjectPose;
    case SkillKind::Place: return ReferenceFrameKind::FinalObjectPose;
    case SkillKind::Pour: return ReferenceFrameKind::TargetContainer;
  }
  return ReferenceFrameKind::InitialObjectPose;
}

std::vector<Waypoint> normalize_to_reference(std::span<const Waypoint> raw, const Pose& reference) {
  if (raw.empty()) throw EmptyTrajectory("normalize_to_reference: no waypoints");
  const Pose inv = invert(reference);
  std::vector<Waypoint> out;
  out.reserve(raw.size());
  for (const auto& w : raw) out.push_back({compose(inv, w.pose), w.time});
  return out;
}

std::vector<Waypoint> subsample(std::span<const Waypoint> wps, double d_min, double a_min_deg) {
  if (wps.size() < 2) throw EmptyTrajectory("subsample: need at least 2 waypoints");
  const double a_min = deg2rad(a_min_deg);
  std::vector<Waypoint> kept{wps.front()};
  for (std::size_t i = 1; i + 1 < wps.size(); ++i) {
    const PoseError e = pose_error(kept.back().pose, wps[i].pose);
    if (e.position >= d_min || e.angle >= a_min) kept.push_back(wps[i]);
  }
  kept.push_back(wps.back());
  return kept;
}

std::vector<Waypoint> smooth(std::span<const Waypoint> wps, int window) {
  if (window < 1 || window % 2 == 0) throw BadWindow("smooth: window must be odd and >= 1, got " + std::to_string(window));
  std::vector<Waypoint> out(wps.begin(), wps.end());
  const auto n = static_cast<std::ptrdiff_t>(wps.size());
  const std::ptrdiff_t half = window / 2;
  for (std::ptrdiff_t i = 1; i + 1 < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    if (h == 0) continue;
    Vec3 t = Vec3::Zero();
    Eigen::Vector4d q = Eigen::Vector4d::Zero();
    const Eigen::Vector4d centre = wps[static_cast<std::size_t>(i)].pose.rotation.quaternion().coeffs();
    for (std::ptrdiff_t k = i - h; k <= i + h; ++k) {
      const auto& p = wps[static_cast<std::size_t>(k)].pose;
      t += p.translation;
      Eigen::Vector4d c = p.rotation.quaternion().coeffs();
      if (c.dot(centre) < 0.0) c = -c;
      q += c;
    }
    const double count = static_cast<double>(2 * h + 1);
    auto& dst = out[static_cast<std::size_t>(i)].pose;
    dst.translation = t / count;
    // coeffs() order is (x, y, z, w).
    dst.rotation = Rotation::from_wxyz(q[3], q[0], q[1], q[2]);
  }
  return out;
}

SkillTrajectory process_demonstration(std::span<const Waypoint> raw, SkillKind skill, const Pose& reference) {
  auto normalized = normalize_to_reference(raw, reference);
  if (normalized.size() < 2) throw EmptyTrajectory("demonstration needs at least 2 waypoints");
  auto processed = subsample(smooth(subsample(normalized)));
  return {skill, reference_for(skill), std::move(processed)};
}

Pose wrist_frame_from_keypoints(const HandKeypoints& k) {
  const Vec3& wrist = k.points[HandKeypoints::kWrist];
  const Vec3& thumb = k.points[HandKeypoints::kThumbTip];
  const Vec3& index = k.points[HandKeypoints::kIndexTip];
  for (const auto& p : k.points)
    if (!p.allFinite()) throw DegenerateHand("hand keypoints: non-finite point");
  if ((thumb - wrist).norm() <= kDirectionEpsilon || (index - wrist).norm() <= kDirectionEpsilon ||
      (thumb - index).norm() <= kDirectionEpsilon) {
    throw DegenerateHand("hand keypoints: wrist, thumb tip and index tip must be distinct");
  }
  const Vec3 thumb_dir = (thumb - wrist).normalized();
  const Vec3 index_dir = (index - wrist).normalized();
  const Vec3 cross = thumb_dir.cross(index_dir);
  if (cross.norm() <= kDirectionEpsilon) throw DegenerateHand("hand keypoints: thumb and index directions are parallel");
  const Vec3 z = cross.normalized();
  Vec3 y = 0.5 * (thumb_dir + index_dir);
  y = (y - y.dot(z) * z).normalized();
  const Vec3 x = y.cross(z);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {Rotation::from_matrix(r), 0.5 * (thumb + index)};
}

nlohmann::json skill_trajectory_to_json(const SkillTrajectory& t) {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : t.waypoints) wps.push_back({{"t", w.time}, {"pose", pose_to_json(w.pose)}});
  return {{"skill", to_string(t.skill)}, {"reference", to_string(t.reference)}, {"waypoints", std::move(wps)}};
}

namespace {

std::vector<Waypoint> waypoints_from_json(const nlohmann::json& arr, const std::string& source, const std::string& prefix) {
  if (!arr.is_array()) throw MalformedFile(source, 0, prefix, "expected an array");
  std::vector<Waypoint> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string field = prefix + "[" + std::to_string(i) + "]";
    const auto& w = arr[i];
    if (!w.is_object() || !w.contains("t") || !w.at("t").is_number())
      throw MalformedFile(source, 0, field + ".t", "expected a number (seconds)");
    if (!w.contains("pose")) throw MalformedFile(source, 0, field + ".pose", "missing");
    Waypoint wp;
    wp.time = w.at("t").get<double>();
    wp.pose = with_field(source, field + ".pose", [&] { return pose_from_json(w.at("pose")); });
    if (!out.empty() && wp.time < out.back().time)
      throw MalformedFile(source, 0, field + ".t", "time must be non-decreasing");
    out.push_back(wp);
  }
  return out;
}

}  // namespace

SkillTrajectory skill_trajectory_from_json(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw MalformedFile(source, 0, "", "expected a JSON object");
  SkillTrajectory t;
  if (!j.contains("skill") || !j.at("skill").is_string()) throw MalformedFile(source, 0, "skill", "missing or not a string");
  auto skill = parse_skill(j.at("skill").get<std::string>());
  if (!skill) throw MalformedFile(source, 0, "skill", "expected pick, place or pour");
  t.skill = *skill;
  if (!j.contains("reference") || !j.at("reference").is_string())
    throw MalformedFile(source, 0, "reference", "missing or not a string");
  auto ref = parse_reference(j.at("reference").get<std::string>());
  if (!ref) throw MalformedFile(source, 0, "reference", "unknown reference frame");
  if (*ref != reference_for(t.skill))
    throw MalformedFile(source, 0, "reference", "does not match the skill's reference frame");
  t.reference = *ref;
  if (!j.contains("waypoints")) throw MalformedFile(source, 0, "waypoints", "missing");
  t.waypoints = waypoints_from_json(j.at("waypoints"), source, "waypoints");
  if (t.waypoints.size() < 2) throw MalformedFile(source, 0, "waypoints", "need at least 2 waypoints");
  return t;
}

std::vector<Waypoint> load_raw_waypoints(const std::filesystem::path& path) {
  const auto j = load_json_file(path);
  auto wps = waypoints_from_json(j, path.string(), "");
  if (wps.empty()) throw EmptyTrajectory(path.string() + ": no waypoints");
  return wps;
}

void TrajectoryStore::put(SkillTrajectory t) {
  if (t.waypoints.size() < 2) throw EmptyTrajectory("trajectory store: need at least 2 waypoints");
  const SkillKind k = t.skill;
  trajectories_.insert_or_assign(k, std::move(t));
}

const SkillTrajectory& TrajectoryStore::get(SkillKind s) const {
  auto it = trajectories_.find(s);
  if (it == trajectories_.end()) throw MissingSkill("no trajectory stored for skill '" + std::string(to_string(s)) + "'");
  return it->second;
}

void TrajectoryStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [skill, traj] : trajectories_)
    write_text_file(dir / (std::string(to_string(skill)) + ".json"), skill_trajectory_to_json(traj).dump(2) + "\n");
}

TrajectoryStore TrajectoryStore::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("trajectory store: not a directory: " + dir.string());
  TrajectoryStore store;
  for (SkillKind k : {SkillKind::Pick, SkillKind::Place, SkillKind::Pour}) {
    const auto file = dir / (std::string(to_string(k)) + ".json");
    if (!std::filesystem::exists(file)) continue;
    auto t = skill_trajectory_from_json(load_json_file(file), file.string());
    if (t.skill != k) throw MalformedFile(file.string(), 0, "skill", "file name and skill disagree");
    store.put(std::move(t));
  }
  return store;
}

}  // namespace lastinch
