#pragma once

// Trajectory database: reference-frame normalisation, subsampling and
// smoothing of demonstrated end-effector paths, wrist frames from hand
// keypoints, and per-skill JSON persistence.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lastinch/io.hpp"
#include "lastinch/se3.hpp"

namespace lastinch {

class EmptyTrajectory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DegenerateHand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class MissingSkill : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Waypoint {
  Pose pose;
  double time = 0.0;

  bool operator==(const Waypoint&) const = default;
};

enum class SkillKind { Pick, Place, Pour };
enum class ReferenceFrameKind { TargetContainer, InitialObjectPose, FinalObjectPose };

std::string_view to_string(SkillKind s);
std::string_view to_string(ReferenceFrameKind r);
std::optional<SkillKind> parse_skill(std::string_view s);
std::optional<ReferenceFrameKind> parse_reference(std::string_view s);
ReferenceFrameKind reference_for(SkillKind s);

struct SkillTrajectory {
  SkillKind skill = SkillKind::Pick;
  ReferenceFrameKind reference = ReferenceFrameKind::InitialObjectPose;
  std::vector<Waypoint> waypoints;

  bool operator==(const SkillTrajectory&) const = default;
};

// 21 points in the usual layout: 0 wrist, 1-4 thumb, 5-8 index, 9-12 middle,
// 13-16 ring, 17-20 little finger; fingertips are 4, 8, 12, 16, 20.
struct HandKeypoints {
  static constexpr std::size_t kWrist = 0;
  static constexpr std::size_t kThumbTip = 4;
  static constexpr std::size_t kIndexTip = 8;

  std::array<Vec3, 21> points;
};

// Re-expresses each waypoint as reference^-1 * waypoint.
std::vector<Waypoint> normalize_to_reference(std::span<const Waypoint> raw, const Pose& reference);

// Greedy scan against the last kept waypoint; keeps a waypoint once it has
// moved at least d_min metres or turned at least a_min_deg degrees. The
// first and last waypoints are always kept.
std::vector<Waypoint> subsample(std::span<const Waypoint> wps, double d_min = 0.02, double a_min_deg = 5.0);

// Centred moving average over translations and a sign-aligned normalised
// quaternion mean over orientations. The window shrinks symmetrically near
// the ends; the first and last waypoints are untouched.
std::vector<Waypoint> smooth(std::span<const Waypoint> wps, int window = 5);

// Full ingestion pipeline: normalise, subsample, smooth, then subsample again
// so the stored path still honours the spacing thresholds.
SkillTrajectory process_demonstration(std::span<const Waypoint> raw, SkillKind skill, const Pose& reference);

Pose wrist_frame_from_keypoints(const HandKeypoints& k);

nlohmann::json skill_trajectory_to_json(const SkillTrajectory& t);
SkillTrajectory skill_trajectory_from_json(const nlohmann::json& j, const std::string& source = "<json>");

// Raw demonstration input: a JSON list of {"t": seconds, "pose": {...}}.
std::vector<Waypoint> load_raw_waypoints(const std::filesystem::path& path);

// One trajectory per skill, persisted as <dir>/<skill>.json.
class TrajectoryStore {
 public:
  void put(SkillTrajectory t);
  bool contains(SkillKind s) const { return trajectories_.contains(s); }
  // Throws MissingSkill.
  const SkillTrajectory& get(SkillKind s) const;
  std::size_t size() const { return trajectories_.size(); }

  void save(const std::filesystem::path& dir) const;
  static TrajectoryStore load(const std::filesystem::path& dir);

 private:
  std::map<SkillKind, SkillTrajectory> trajectories_;
};

}  // namespace lastinch
