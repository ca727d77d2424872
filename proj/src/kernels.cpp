#include "lastinch/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lastinch/collision.hpp"

namespace lastinch::kernels {

namespace {

// Below these sizes thread start-up costs more than the loop.
constexpr std::ptrdiff_t kMinParallelSamples = 16;
constexpr std::ptrdiff_t kMinParallelPoints = 4096;

bool any_hit(const KinematicChain& chain, const JointConfig& q, const CollisionWorld& world) {
  return collision_check(chain, q, world);
}

VoxelKey key_of(const Vec3& p, double voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() / voxel)), static_cast<std::int64_t>(std::floor(p.y() / voxel)),
          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
}

void sort_unique(std::vector<VoxelKey>& keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<std::uint8_t> collision_flags_serial(const KinematicChain& chain, std::span<const JointConfig> samples,
                                                 const CollisionWorld& world) {
  std::vector<std::uint8_t> flags(samples.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) flags[i] = any_hit(chain, samples[i], world) ? 1 : 0;
  return flags;
}

std::vector<std::uint8_t> collision_flags_omp(const KinematicChain& chain, std::span<const JointConfig> samples,
                                              const CollisionWorld& world) {
  std::vector<std::uint8_t> flags(samples.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallelSamples)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    flags[static_cast<std::size_t>(i)] = any_hit(chain, samples[static_cast<std::size_t>(i)], world) ? 1 : 0;
  }
  return flags;
}

std::vector<VoxelKey> voxel_keys_serial(std::span<const Vec3> points, double voxel) {
  std::vector<VoxelKey> keys;
  keys.reserve(points.size());
  for (const auto& p : points) keys.push_back(key_of(p, voxel));
  sort_unique(keys);
  return keys;
}

std::vector<VoxelKey> voxel_keys_omp(std::span<const Vec3> points, double voxel) {
  std::vector<VoxelKey> keys(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallelPoints)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    keys[static_cast<std::size_t>(i)] = key_of(points[static_cast<std::size_t>(i)], voxel);
  }
  sort_unique(keys);
  return keys;
}

std::vector<Vec3> rotate_about_serial(std::span<const Vec3> points, const Mat3& r, const Vec3& fixed) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(r * (p - fixed) + fixed);
  return out;
}

std::vector<Vec3> rotate_about_omp(std::span<const Vec3> points, const Mat3& r, const Vec3& fixed) {
  std::vector<Vec3> out(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static) if (n >= kMinParallelPoints)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = r * (points[k] - fixed) + fixed;
  }
  return out;
}

}  // namespace lastinch::kernels
