#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lastinch/io.hpp"
#include "support.hpp"

using namespace lastinch;
using testing::Gen;

namespace {

std::vector<Waypoint> line_of(std::size_t n, double spacing, const Rotation& r = {}) {
  std::vector<Waypoint> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{r, Vec3(spacing * static_cast<double>(i), 0, 0)}, 0.1 * i});
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lastinch_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Post-filter spacing check against the previous retained waypoint.
bool spacing_holds(const std::vector<Waypoint>& wps, double d_min, double a_min_rad) {
  for (std::size_t i = 1; i + 1 < wps.size(); ++i) {
    const PoseError e = pose_error(wps[i - 1].pose, wps[i].pose);
    if (!(e.position >= d_min || e.angle >= a_min_rad)) return false;
  }
  return true;
}

// Written against matrices rather than the library's pose_error.
std::vector<Waypoint> greedy_oracle(const std::vector<Waypoint>& wps, double d_min, double a_min_deg) {
  std::vector<Waypoint> out{wps.front()};
  for (std::size_t i = 1; i + 1 < wps.size(); ++i) {
    const Mat4 a = out.back().pose.matrix(), b = wps[i].pose.matrix();
    const double d = (a.topRightCorner<3, 1>() - b.topRightCorner<3, 1>()).norm();
    const Mat3 rel = a.topLeftCorner<3, 3>().transpose() * b.topLeftCorner<3, 3>();
    const double ang = std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0)) * 180.0 / kPi;
    if (d >= d_min || ang >= a_min_deg) out.push_back(wps[i]);
  }
  out.push_back(wps.back());
  return out;
}

HandKeypoints hand(const Vec3& wrist, const Vec3& thumb, const Vec3& index) {
  HandKeypoints k;
  for (std::size_t i = 0; i < 21; ++i) k.points[i] = wrist + Vec3(0.01 * i, 0.02, 0.0);
  k.points[HandKeypoints::kWrist] = wrist;
  k.points[HandKeypoints::kThumbTip] = thumb;
  k.points[HandKeypoints::kIndexTip] = index;
  return k;
}

}  // namespace

TEST_SUITE("trajectory") {

TEST_CASE("normalize_to_reference examples") {
  Gen g(20);
  std::vector<Waypoint> raw;
  for (int i = 0; i < 5; ++i) raw.push_back({g.pose(), 0.1 * i});

  const auto same = normalize_to_reference(raw, Pose::identity());
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(testing::near(same[i].pose, raw[i].pose, 1e-15));

  const std::vector<Waypoint> one{{Pose::translate(0, 0, 0.1), 0.0}};
  CHECK(testing::near(normalize_to_reference(one, Pose::translate(0, 0, 0.1))[0].pose, Pose::identity(), 1e-15));

  const Pose ref = g.pose();
  const auto norm = normalize_to_reference(raw, ref);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Mat4 oracle = ref.matrix().inverse() * raw[i].pose.matrix();
    CHECK((norm[i].pose.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(norm[i].time == raw[i].time);
  }
  CHECK_THROWS_AS(normalize_to_reference({}, ref), EmptyTrajectory);
}

TEST_CASE("normalize then re-apply the reference recovers the input") {
  Gen g(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = g.dense_walk(30, 0.05, 0.2);
    const Pose ref = g.pose();
    const auto norm = normalize_to_reference(raw, ref);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(testing::near(compose(ref, norm[i].pose), raw[i].pose, 1e-9));
  }
}

TEST_CASE("subsample examples") {
  // 1 mm steps span 99 mm, so a greedy 2 cm scan keeps roughly every 20th.
  const auto dense = line_of(100, 0.001);
  const auto kept = subsample(dense);
  CHECK(kept == greedy_oracle(dense, 0.02, 5.0));
  CHECK(kept.size() == 6);

  // Within 2 cm end to end only the endpoints survive.
  const auto tight = line_of(100, 0.0001);
  const auto ends = subsample(tight);
  REQUIRE(ends.size() == 2);
  CHECK(ends.front() == tight.front());
  CHECK(ends.back() == tight.back());

  const auto sparse = line_of(3, 0.05);
  CHECK(subsample(sparse) == sparse);

  const std::vector<Waypoint> twins{{Pose::identity(), 0.0}, {Pose::identity(), 0.1}};
  CHECK(subsample(twins) == twins);

  CHECK_THROWS_AS(subsample(std::vector<Waypoint>{{Pose::identity(), 0.0}}), EmptyTrajectory);
}

TEST_CASE("subsample matches the greedy oracle on random walks") {
  Gen g(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = g.dense_walk(static_cast<std::size_t>(g.integer(2, 200)), 0.006, deg2rad(2.0));
    CHECK(subsample(raw) == greedy_oracle(raw, 0.02, 5.0));
  }
}

TEST_CASE("subsample keeps samples that only turn") {
  std::vector<Waypoint> spin;
  for (int i = 0; i <= 20; ++i) spin.push_back({{rot_z(deg2rad(1.01 * i)), Vec3::Zero()}, 0.1 * i});
  const auto kept = subsample(spin);
  REQUIRE(kept.size() == 5);
  CHECK(geodesic_angle(kept[0].pose.rotation, kept[1].pose.rotation) == doctest::Approx(deg2rad(5.05)));
}

TEST_CASE("subsample spacing and idempotence on random dense walks") {
  Gen g(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto raw = g.dense_walk(static_cast<std::size_t>(g.integer(2, 300)), 0.004, deg2rad(1.0));
    const auto once = subsample(raw);
    CHECK(once.front() == raw.front());
    CHECK(once.back() == raw.back());
    CHECK(spacing_holds(once, 0.02, deg2rad(5.0)));
    CHECK(subsample(once) == once);
  }
}

TEST_CASE("smooth examples") {
  Gen g(23);
  const auto walk = g.dense_walk(12, 0.01, 0.1);
  CHECK(smooth(walk, 1) == walk);

  std::vector<Waypoint> constant(9, Waypoint{g.pose(), 0.0});
  const auto c = smooth(constant, 5);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(testing::near(c[i].pose, constant[i].pose, 1e-12));

  const std::vector<Waypoint> zig{{Pose::identity(), 0}, {Pose::translate(1, 0, 0), 1}, {Pose::identity(), 2}};
  const auto z = smooth(zig, 3);
  CHECK(z[1].pose.translation.isApprox(Vec3(1.0 / 3.0, 0, 0)));
  CHECK(z[0] == zig[0]);
  CHECK(z[2] == zig[2]);

  CHECK_THROWS_AS(smooth(walk, 4), BadWindow);
  CHECK_THROWS_AS(smooth(walk, 0), BadWindow);
  CHECK_THROWS_AS(smooth(walk, -3), BadWindow);
}

TEST_CASE("smooth pins endpoints and stays inside each window's hull") {
  Gen g(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto raw = g.dense_walk(static_cast<std::size_t>(g.integer(2, 40)), 0.03, 0.3);
    const int window = 2 * g.integer(0, 4) + 1;
    const auto s = smooth(raw, window);
    REQUIRE(s.size() == raw.size());
    CHECK(s.front() == raw.front());
    CHECK(s.back() == raw.back());
    const auto n = static_cast<int>(raw.size());
    for (int i = 1; i + 1 < n; ++i) {
      const int h = std::min({window / 2, i, n - 1 - i});
      Vec3 lo = raw[static_cast<std::size_t>(i)].pose.translation, hi = lo;
      for (int k = i - h; k <= i + h; ++k) {
        lo = lo.cwiseMin(raw[static_cast<std::size_t>(k)].pose.translation);
        hi = hi.cwiseMax(raw[static_cast<std::size_t>(k)].pose.translation);
      }
      const Vec3 t = s[static_cast<std::size_t>(i)].pose.translation;
      CHECK(((t - lo).minCoeff() >= -1e-12 && (hi - t).minCoeff() >= -1e-12));
      CHECK(std::abs(s[static_cast<std::size_t>(i)].pose.rotation.quaternion().norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("smooth averages quaternions across the sign ambiguity") {
  // Near a half turn the canonical quaternions of +-(pi - 0.05) point opposite ways.
  const Rotation a = rot_z(kPi - 0.05), b = rot_z(-(kPi - 0.05));
  REQUIRE(a.quaternion().coeffs().dot(b.quaternion().coeffs()) < 0.0);
  const std::vector<Waypoint> in{{{a, Vec3::Zero()}, 0}, {{b, Vec3::Zero()}, 1}, {{a, Vec3::Zero()}, 2}};
  const auto out = smooth(in, 3);
  CHECK(geodesic_angle(out[1].pose.rotation, rot_z(kPi - 0.05 / 3.0)) < 1e-3);
}

TEST_CASE("wrist frame examples") {
  const Pose p = wrist_frame_from_keypoints(hand(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0)));
  const Vec3 z = p.rotation.matrix().col(2);
  CHECK(std::abs(std::abs(z.z()) - 1.0) < 1e-12);
  CHECK(p.translation.isApprox(Vec3(0.5, 0.5, 0)));
  // y is the mean finger direction (1,1,0)/sqrt2.
  CHECK(p.rotation.matrix().col(1).isApprox(Vec3(1, 1, 0).normalized(), 1e-12));

  CHECK_THROWS_AS(wrist_frame_from_keypoints(hand(Vec3::Zero(), Vec3(1, 0, 0), Vec3(2, 0, 0))), DegenerateHand);
  CHECK_THROWS_AS(wrist_frame_from_keypoints(hand(Vec3::Zero(), Vec3::Zero(), Vec3(0, 1, 0))), DegenerateHand);
}

TEST_CASE("wrist frame is orthonormal on random hands") {
  Gen g(25);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 w = g.vec(0.5);
    const Vec3 t = w + g.unit() * g.uniform(0.03, 0.2);
    const Vec3 x = w + g.unit() * g.uniform(0.03, 0.2);
    if ((t - w).normalized().cross((x - w).normalized()).norm() < 1e-3) continue;
    const Mat3 r = wrist_frame_from_keypoints(hand(w, t, x)).rotation.matrix();
    CHECK(testing::max_abs(r.transpose() * r - Mat3::Identity()) < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("process_demonstration honours the spacing invariant") {
  Gen g(26);
  for (int trial = 0; trial < 30; ++trial) {
    const auto raw = g.dense_walk(120, 0.003, deg2rad(0.8));
    const auto t = process_demonstration(raw, SkillKind::Pour, g.pose());
    CHECK(t.reference == ReferenceFrameKind::TargetContainer);
    CHECK(t.waypoints.size() >= 2);
    CHECK(spacing_holds(t.waypoints, 0.02, deg2rad(5.0)));
  }
  CHECK(reference_for(SkillKind::Pick) == ReferenceFrameKind::InitialObjectPose);
  CHECK(reference_for(SkillKind::Place) == ReferenceFrameKind::FinalObjectPose);
}

TEST_CASE("store round trip is exact") {
  Gen g(27);
  TrajectoryStore store;
  for (SkillKind k : {SkillKind::Pick, SkillKind::Place, SkillKind::Pour}) {
    SkillTrajectory t{k, reference_for(k), {}};
    for (int i = 0; i < 6; ++i) t.waypoints.push_back({g.pose(), 0.05 * i + 1e-3 * g.uniform(0, 1)});
    store.put(t);
  }
  const auto dir = scratch_dir("store");
  store.save(dir);
  const auto back = TrajectoryStore::load(dir);
  for (SkillKind k : {SkillKind::Pick, SkillKind::Place, SkillKind::Pour}) CHECK(back.get(k) == store.get(k));
}

TEST_CASE("store errors") {
  Gen g(28);
  const auto dir = scratch_dir("store_missing");
  TrajectoryStore store;
  store.put({SkillKind::Pick, ReferenceFrameKind::InitialObjectPose, {{g.pose(), 0}, {g.pose(), 1}}});
  store.save(dir);
  const auto back = TrajectoryStore::load(dir);
  CHECK_THROWS_AS(back.get(SkillKind::Pour), MissingSkill);

  std::string text = read_text_file(dir / "pick.json");
  text.resize(text.size() / 2);
  write_text_file(dir / "pick.json", text);
  CHECK_THROWS_AS(TrajectoryStore::load(dir), MalformedFile);
  try {
    TrajectoryStore::load(dir);
  } catch (const MalformedFile& e) {
    CHECK(e.line() > 0);
  }

  nlohmann::json bad = skill_trajectory_to_json(store.get(SkillKind::Pick));
  bad["waypoints"][1]["pose"]["q"] = {1, 0};
  write_text_file(dir / "pick.json", bad.dump());
  try {
    TrajectoryStore::load(dir);
    FAIL("expected MalformedFile");
  } catch (const MalformedFile& e) {
    CHECK(e.field() == "waypoints[1].pose");
  }
}

TEST_CASE("store keeps one trajectory per skill") {
  Gen g(29);
  TrajectoryStore store;
  store.put({SkillKind::Pick, ReferenceFrameKind::InitialObjectPose, {{g.pose(), 0}, {g.pose(), 1}}});
  const SkillTrajectory second{SkillKind::Pick, ReferenceFrameKind::InitialObjectPose, {{g.pose(), 0}, {g.pose(), 1}}};
  store.put(second);
  CHECK(store.size() == 1);
  CHECK(store.get(SkillKind::Pick) == second);
}

}  // TEST_SUITE
