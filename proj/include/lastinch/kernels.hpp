#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version that must produce identical results; the public API in
// collision.hpp and se3.hpp dispatches to the OpenMP version.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lastinch/kinematics.hpp"
#include "lastinch/se3.hpp"

namespace lastinch {

struct CollisionWorld;

namespace kernels {

using VoxelKey = std::array<std::int64_t, 3>;

// Per-sample collision flags (1 = colliding).
std::vector<std::uint8_t> collision_flags_serial(const KinematicChain& chain, std::span<const JointConfig> samples,
                                                 const CollisionWorld& world);
std::vector<std::uint8_t> collision_flags_omp(const KinematicChain& chain, std::span<const JointConfig> samples,
                                              const CollisionWorld& world);

// Sorted, de-duplicated voxel indices of the points.
std::vector<VoxelKey> voxel_keys_serial(std::span<const Vec3> points, double voxel);
std::vector<VoxelKey> voxel_keys_omp(std::span<const Vec3> points, double voxel);

std::vector<Vec3> rotate_about_serial(std::span<const Vec3> points, const Mat3& r, const Vec3& fixed);
std::vector<Vec3> rotate_about_omp(std::span<const Vec3> points, const Mat3& r, const Vec3& fixed);

int max_threads();

}  // namespace kernels
}  // namespace lastinch
