// Serial reference versus OpenMP for each data-parallel kernel.

#include <benchmark/benchmark.h>

#include <random>

#include "lastinch/collision.hpp"
#include "lastinch/kernels.hpp"

using namespace lastinch;

namespace {

std::vector<Vec3> cloud(std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(u(rng), u(rng), u(rng));
  return out;
}

struct PathFixture {
  KinematicChain arm = make_test_arm();
  std::vector<JointConfig> samples;
  CollisionWorld world;

  explicit PathFixture(std::size_t n) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d(0.0, 0.8);
    for (std::size_t i = 0; i < n; ++i) {
      JointConfig q = arm.home;
      for (Eigen::Index j = 0; j < q.size(); ++j) q[j] += d(rng);
      samples.push_back(q);
    }
    world = world_from_pointcloud(cloud(4000), 0.05);
  }
};

template <auto Kernel>
void collision_flags(benchmark::State& state) {
  const PathFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.arm, f.samples, f.world));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void voxel_keys(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(pts, 0.02));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void rotate_about(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)));
  const Mat3 r = rot_z(0.3).matrix() * rot_x(0.2).matrix();
  const Vec3 f(0.1, 0.2, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(pts, r, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(collision_flags<kernels::collision_flags_serial>)->Name("collision_flags/serial")->Arg(256)->Arg(4096);
BENCHMARK(collision_flags<kernels::collision_flags_omp>)->Name("collision_flags/omp")->Arg(256)->Arg(4096);
BENCHMARK(voxel_keys<kernels::voxel_keys_serial>)->Name("voxel_keys/serial")->Arg(10000)->Arg(200000);
BENCHMARK(voxel_keys<kernels::voxel_keys_omp>)->Name("voxel_keys/omp")->Arg(10000)->Arg(200000);
BENCHMARK(rotate_about<kernels::rotate_about_serial>)->Name("rotate_about/serial")->Arg(10000)->Arg(1000000);
BENCHMARK(rotate_about<kernels::rotate_about_omp>)->Name("rotate_about/omp")->Arg(10000)->Arg(1000000);

BENCHMARK_MAIN();
