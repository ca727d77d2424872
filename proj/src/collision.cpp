#include "lastinch/collision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "lastinch/io.hpp"
#include "lastinch/kernels.hpp"

namespace lastinch {

Aabb aabb_of(const Pose& pose, const Vec3& half_extents) {
  const Mat3 r = pose.rotation.matrix().cwiseAbs();
  const Vec3 h = r * half_extents;
  return {pose.translation - h, pose.translation + h};
}

bool sphere_intersects(const Aabb& box, const Vec3& center, double radius) {
  const Vec3 closest = center.cwiseMax(box.min).cwiseMin(box.max);
  return (closest - center).squaredNorm() < radius * radius;
}

CollisionWorld world_from_pointcloud(std::span<const Vec3> points, double voxel) {
  if (!(voxel > 0.0)) throw std::invalid_argument("voxel size must be positive");
  CollisionWorld world;
  world.voxel = voxel;
  const auto keys = kernels::voxel_keys_omp(points, voxel);
  if (keys.empty()) return world;

  using I = std::int64_t;
  // Runs along x: (z, y, x0) -> x1. Keys are sorted by (x, y, z), so
  // collect per (z, y) first.
  std::map<std::pair<I, I>, std::vector<I>> rows;
  for (const auto& k : keys) rows[{k[2], k[1]}].push_back(k[0]);
  // (z, x0, x1) -> sorted y values, each a run.
  std::map<std::tuple<I, I, I>, std::vector<I>> runs;
  for (auto& [zy, xs] : rows) {
    std::sort(xs.begin(), xs.end());
    I start = xs.front();
    I prev = start;
    for (std::size_t i = 1; i <= xs.size(); ++i) {
      if (i < xs.size() && xs[i] == prev + 1) {
        prev = xs[i];
        continue;
      }
      runs[{zy.first, start, prev}].push_back(zy.second);
      if (i < xs.size()) start = prev = xs[i];
    }
  }
  // Merge runs along y into rectangles: (x0, x1, y0, y1) -> z values.
  std::map<std::tuple<I, I, I, I>, std::vector<I>> rects;
  for (auto& [zx, ys] : runs) {
    const auto [z, x0, x1] = zx;
    std::sort(ys.begin(), ys.end());
    I start = ys.front();
    I prev = start;
    for (std::size_t i = 1; i <= ys.size(); ++i) {
      if (i < ys.size() && ys[i] == prev + 1) {
        prev = ys[i];
        continue;
      }
      rects[{x0, x1, start, prev}].push_back(z);
      if (i < ys.size()) start = prev = ys[i];
    }
  }
  // Merge rectangles along z into boxes.
  for (auto& [r, zs] : rects) {
    const auto [x0, x1, y0, y1] = r;
    std::sort(zs.begin(), zs.end());
    I start = zs.front();
    I prev = start;
    for (std::size_t i = 1; i <= zs.size(); ++i) {
      if (i < zs.size() && zs[i] == prev + 1) {
        prev = zs[i];
        continue;
      }
      world.boxes.push_back({Vec3(static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(start)) * voxel,
                             Vec3(static_cast<double>(x1 + 1), static_cast<double>(y1 + 1), static_cast<double>(prev + 1)) * voxel});
      if (i < zs.size()) start = prev = zs[i];
    }
  }
  return world;
}

std::vector<Vec3> load_pointcloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Vec3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double x = 0, y = 0, z = 0;
    if (!(ss >> x)) continue;
    std::string rest;
    if (!(ss >> y >> z) || (ss >> rest) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw MalformedFile(path.string(), line_no, "", "expected three finite numbers 'x y z'");
    points.emplace_back(x, y, z);
  }
  return points;
}

std::vector<Vec3> sphere_centers(const KinematicChain& chain, const JointConfig& q) {
  const auto frames = link_frames(chain, q);
  std::vector<Vec3> out;
  out.reserve(chain.spheres.size());
  for (const auto& s : chain.spheres)
    out.push_back(s.link < 0 ? s.center : frames[static_cast<std::size_t>(s.link)].apply(s.center));
  return out;
}

bool collision_check(const KinematicChain& chain, const JointConfig& q, const CollisionWorld& world) {
  const auto centers = sphere_centers(chain, q);
  for (const auto& box : world.boxes)
    for (std::size_t i = 0; i < centers.size(); ++i)
      if (sphere_intersects(box, centers[i], chain.spheres[i].radius)) return true;
  return false;
}

std::vector<JointConfig> interpolate(const JointConfig& a, const JointConfig& b, double resolution) {
  if (a.size() != b.size()) throw DimensionMismatch("interpolate: joint vectors differ in size");
  if (!(resolution > 0.0)) throw std::invalid_argument("interpolate: resolution must be positive");
  const double span = (b - a).cwiseAbs().maxCoeff();
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / resolution - 1e-12)));
  std::vector<JointConfig> out;
  out.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    if (i == steps) {
      out.push_back(b);
    } else {
      out.push_back(a + (b - a) * (static_cast<double>(i) / static_cast<double>(steps)));
    }
  }
  return out;
}

std::vector<JointConfig> densify(std::span<const JointConfig> path, double resolution) {
  std::vector<JointConfig> out;
  if (path.empty()) return out;
  out.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    auto seg = interpolate(path[i - 1], path[i], resolution);
    out.insert(out.end(), seg.begin() + 1, seg.end());
  }
  return out;
}

std::optional<std::size_t> first_collision(const KinematicChain& chain, std::span<const JointConfig> samples,
                                           const CollisionWorld& world) {
  if (world.empty()) return std::nullopt;
  const auto flags = kernels::collision_flags_omp(chain, samples, world);
  const auto it = std::find(flags.begin(), flags.end(), std::uint8_t{1});
  if (it == flags.end()) return std::nullopt;
  return static_cast<std::size_t>(it - flags.begin());
}

bool segment_free(const KinematicChain& chain, const JointConfig& a, const JointConfig& b, const CollisionWorld& world,
                  double resolution) {
  if (world.empty()) return true;
  const auto samples = interpolate(a, b, resolution);
  return !first_collision(chain, samples, world).has_value();
}

}  // namespace lastinch
