#include <doctest.h>

#include "lastinch/motion.hpp"
#include "support.hpp"

using namespace lastinch;
using testing::Gen;

namespace {

// Yaw then pitch; one sphere half a metre out along the second link.
KinematicChain yaw_pitch() {
  KinematicChain c;
  c.joints.push_back({UnitVector(Vec3::UnitZ()), Pose{}, -kPi, kPi});
  c.joints.push_back({UnitVector(Vec3::UnitY()), Pose{}, -kPi / 2, kPi / 2});
  c.ee_offset = Pose::translate(0.5, 0, 0);
  c.spheres = {{1, Vec3(0.5, 0, 0), 0.05}};
  c.home = JointConfig::Zero(2);
  return c;
}

JointConfig q2(double a, double b) {
  JointConfig q(2);
  q << a, b;
  return q;
}

void check_path_free(const KinematicChain& c, const std::vector<JointConfig>& keys, const CollisionWorld& w) {
  for (const auto& q : densify(keys, kPathResolution)) CHECK_FALSE(collision_check(c, q, w));
}

// Straight tool-frame line from the arm's home pose.
std::vector<Pose> line_from_home(const KinematicChain& arm, std::size_t n, const Vec3& step) {
  std::vector<Pose> out;
  Pose p = forward_kinematics(arm, arm.home);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(p);
    p.translation += step;
  }
  return out;
}

}  // namespace

TEST_SUITE("motion") {

TEST_CASE("free space gives a straight segment") {
  const auto c = yaw_pitch();
  const auto path = plan_joint_path(c, q2(-1, 0), q2(1, 0), {});
  CHECK(path == std::vector<JointConfig>{q2(-1, 0), q2(1, 0)});

  const auto arm = make_test_arm();
  const Pose target = forward_kinematics(arm, arm.home + JointConfig::Constant(7, 0.1));
  const auto global = plan_global(arm, arm.home, target, {});
  REQUIRE(global.size() == 2);
  CHECK(global.front() == arm.home);
  CHECK(Tolerance{}.accepts(pose_error(forward_kinematics(arm, global.back()), target)));
}

TEST_CASE("an obstacle in the way forces a detour") {
  const auto c = yaw_pitch();
  CollisionWorld wall;
  wall.boxes.push_back({Vec3(0.4, -0.1, -0.1), Vec3(0.6, 0.1, 0.1)});
  REQUIRE_FALSE(segment_free(c, q2(-1, 0), q2(1, 0), wall));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MotionParams p;
    p.seed = seed;
    const auto path = plan_joint_path(c, q2(-1, 0), q2(1, 0), wall, p);
    CHECK(path.size() >= 3);
    CHECK(path.front() == q2(-1, 0));
    CHECK(path.back() == q2(1, 0));
    check_path_free(c, path, wall);
    CHECK(plan_joint_path(c, q2(-1, 0), q2(1, 0), wall, p) == path);
  }
}

TEST_CASE("blocked endpoints fail") {
  const auto c = yaw_pitch();
  CollisionWorld w;
  w.boxes.push_back({Vec3(0.4, -0.1, -0.1), Vec3(0.6, 0.1, 0.1)});
  CHECK_THROWS_AS(plan_joint_path(c, q2(-1, 0), q2(0, 0), w), PlanFailure);
  CHECK_THROWS_AS(plan_joint_path(c, q2(0, 0), q2(1, 0), w), PlanFailure);

  const auto arm = make_test_arm();
  const Pose target = forward_kinematics(arm, arm.home + JointConfig::Constant(7, 0.1));
  CollisionWorld around;
  around.boxes.push_back({target.translation - Vec3::Constant(0.05), target.translation + Vec3::Constant(0.05)});
  MotionParams p;
  p.ik.restarts = 2;
  CHECK_THROWS_AS(plan_global(arm, arm.home, target, around, p), PlanFailure);
  CHECK_THROWS_AS(plan_global(arm, arm.home, Pose::translate(5, 0, 0), {}, p), IKFailure);
}

TEST_CASE("tolerance schedule") {
  ToleranceSchedule s;
  CHECK(s.split(10) == 8);
  CHECK(&s.at(7, 10) == &s.loose);
  CHECK(&s.at(8, 10) == &s.tight);
  CHECK(s.split(1) == 0);
  CHECK(s.split(5) == 4);
  s.alpha = 1.0;
  CHECK(s.split(10) == 10);
  CHECK_NOTHROW(s.validate());
  for (double bad : {0.0, -0.1, 1.01}) {
    ToleranceSchedule b;
    b.alpha = bad;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
  ToleranceSchedule inverted;
  inverted.tight.position = 0.05;
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
}

TEST_CASE("tracking a single waypoint at the current pose") {
  const auto arm = make_test_arm();
  const Pose here = forward_kinematics(arm, arm.home);
  const std::vector<Pose> wps{here};
  const auto qs = track_trajectory(arm, arm.home, wps, {});
  REQUIRE(qs.size() == 1);
  CHECK(qs[0] == arm.home);
  CHECK_THROWS_AS(track_trajectory(arm, arm.home, std::vector<Pose>{}, {}), std::invalid_argument);
}

TEST_CASE("tracking meets the loose then tight tolerances") {
  const auto arm = make_test_arm();
  const auto wps = line_from_home(arm, 10, Vec3(0.0, 0.01, -0.005));
  const ToleranceSchedule s;
  const auto qs = track_trajectory(arm, arm.home, wps, {}, s);
  REQUIRE(qs.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto e = pose_error(forward_kinematics(arm, qs[i]), wps[i]);
    CHECK((i < 8 ? s.loose : s.tight).accepts(e));
  }
}

TEST_CASE("tracking reports the first blocked waypoint") {
  const auto arm = make_test_arm();
  const auto wps = line_from_home(arm, 6, Vec3(0.0, 0.08, 0.0));
  CollisionWorld w;
  w.boxes.push_back({wps[3].translation - Vec3::Constant(0.04), wps[3].translation + Vec3::Constant(0.04)});
  const std::vector<Pose> head(wps.begin(), wps.begin() + 3);
  REQUIRE_NOTHROW(track_trajectory(arm, arm.home, head, w));
  MotionParams p;
  p.ik.restarts = 2;
  try {
    track_trajectory(arm, arm.home, wps, w, {}, p);
    FAIL("expected TrackFailure");
  } catch (const TrackFailure& e) {
    CHECK(e.index() == 3);
  }
}

TEST_CASE("perturbation ladder") {
  const Pose base{rot_z(0.3), Vec3(0.5, 0.1, 0.2)};
  const double steps[] = {0.005, 0.01, 0.02};
  std::size_t attempt = 1;
  for (double d : steps)
    for (int axis = 0; axis < 3; ++axis)
      for (double sign : {1.0, -1.0}) {
        Pose want = base;
        want.translation[axis] += sign * d;
        CHECK(testing::near(perturb_object_pose(base, attempt), want, 1e-15));
        ++attempt;
      }
  for (double deg : {2.5, -2.5, 5.0, -5.0}) {
    const Pose got = perturb_object_pose(base, attempt++);
    CHECK(got.translation == base.translation);
    CHECK(testing::max_abs(got.rotation.matrix() - rot_z(0.3 + deg2rad(deg)).matrix()) < 1e-12);
  }
  CHECK(attempt == kPerturbationLadderSize + 1);
  CHECK_THROWS_AS(perturb_object_pose(base, 0), PerturbationExhausted);
  CHECK_THROWS_AS(perturb_object_pose(base, 23), PerturbationExhausted);
}

}  // TEST_SUITE
