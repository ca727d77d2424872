#pragma once

// Axis-aligned box obstacle maps, point-cloud voxelisation and sphere/box
// collision queries along joint-space paths.

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lastinch/kinematics.hpp"
#include "lastinch/se3.hpp"

namespace lastinch {

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool operator==(const Aabb&) const = default;
};

struct CollisionWorld {
  std::vector<Aabb> boxes;
  // Voxel pitch used to build the map from a point cloud; 0 otherwise.
  double voxel = 0.0;

  bool empty() const { return boxes.empty(); }
};

// Bounding box of an oriented box with the given half extents.
Aabb aabb_of(const Pose& pose, const Vec3& half_extents);

bool sphere_intersects(const Aabb& box, const Vec3& center, double radius);

// Occupied voxels merged greedily into boxes along x, then y, then z.
CollisionWorld world_from_pointcloud(std::span<const Vec3> points, double voxel = 0.03);

// Whitespace-separated "x y z" per line, metres; '#' starts a comment.
std::vector<Vec3> load_pointcloud(const std::filesystem::path& path);

// World-frame centres of every collision sphere.
std::vector<Vec3> sphere_centers(const KinematicChain& chain, const JointConfig& q);

bool collision_check(const KinematicChain& chain, const JointConfig& q, const CollisionWorld& world);

inline constexpr double kPathResolution = 0.05;

// a, then intermediate configurations, then b, with no joint moving more
// than `resolution` between consecutive samples.
std::vector<JointConfig> interpolate(const JointConfig& a, const JointConfig& b, double resolution = kPathResolution);

// All samples of a keyframe path at `resolution`, keyframes included once.
std::vector<JointConfig> densify(std::span<const JointConfig> path, double resolution = kPathResolution);

// Index of the first colliding configuration in `samples`, if any.
std::optional<std::size_t> first_collision(const KinematicChain& chain, std::span<const JointConfig> samples,
                                           const CollisionWorld& world);

bool segment_free(const KinematicChain& chain, const JointConfig& a, const JointConfig& b, const CollisionWorld& world,
                  double resolution = kPathResolution);

}  // namespace lastinch
