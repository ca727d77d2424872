#include <doctest.h>

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <set>

#include "lastinch/collision.hpp"
#include "lastinch/io.hpp"
#include "lastinch/kinematics.hpp"
#include "support.hpp"

using namespace lastinch;
using testing::Gen;

namespace {

JointConfig random_q(const KinematicChain& c, Gen& g, double shrink = 1.0) {
  JointConfig q(static_cast<Eigen::Index>(c.dof()));
  for (std::size_t i = 0; i < c.dof(); ++i)
    q[static_cast<Eigen::Index>(i)] = shrink * g.uniform(c.joints[i].lower, c.joints[i].upper);
  return q;
}

// One joint about z with an identity offset; the tool sits `reach` along x.
KinematicChain single_joint(double reach) {
  KinematicChain c;
  c.joints.push_back({UnitVector(Vec3::UnitZ()), Pose{}, -kPi, kPi});
  c.ee_offset = Pose::translate(reach, 0, 0);
  c.home = JointConfig::Zero(1);
  return c;
}

// Rotation vector of a * b^T from an independent library routine.
Vec3 rotation_vector(const Mat3& a, const Mat3& b) {
  const Eigen::AngleAxisd aa(Mat3(a * b.transpose()));
  return aa.axis() * aa.angle();
}

}  // namespace

TEST_SUITE("kinematics") {

TEST_CASE("forward kinematics examples") {
  auto arm = make_test_arm();
  const Pose zero = forward_kinematics(arm, JointConfig::Zero(7));
  CHECK(zero.translation.isApprox(Vec3(0, 0, 0.15 + 0.13 + 0.21 + 0.21 + 0.20 + 0.10 + 0.10 + 0.12), 1e-12));
  CHECK(testing::max_abs(zero.rotation.matrix() - Mat3::Identity()) < 1e-12);

  KinematicChain bare;
  for (int i = 0; i < 3; ++i) bare.joints.push_back({UnitVector(Vec3::UnitZ()), Pose{}, -kPi, kPi});
  bare.ee_offset = Pose::translate(0.1, 0.2, 0.3);
  CHECK(testing::near(forward_kinematics(bare, JointConfig::Zero(3)), bare.ee_offset, 1e-15));

  const auto one = single_joint(1.0);
  JointConfig q(1);
  q << kPi / 2;
  CHECK(forward_kinematics(one, q).translation.isApprox(Vec3(0, 1, 0), 1e-12));

  Gen g(60);
  for (int i = 0; i < 50; ++i) {
    JointConfig a = random_q(arm, g, 0.3);
    JointConfig b = a;
    b[g.integer(0, 6)] += 2 * kPi;
    CHECK(testing::near(forward_kinematics(arm, a), forward_kinematics(arm, b), 1e-9));
  }
}

TEST_CASE("jacobian matches central differences") {
  const auto arm = make_test_arm();
  Gen g(61);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const JointConfig q = random_q(arm, g);
    const Jacobian j = jacobian(arm, q);
    for (Eigen::Index c = 0; c < 7; ++c) {
      JointConfig qp = q, qm = q;
      qp[c] += h;
      qm[c] -= h;
      const Pose p = forward_kinematics(arm, qp), m = forward_kinematics(arm, qm);
      const Vec3 lin = (p.translation - m.translation) / (2 * h);
      const Vec3 ang = rotation_vector(p.rotation.matrix(), m.rotation.matrix()) / (2 * h);
      CHECK((j.block<3, 1>(0, c) - lin).cwiseAbs().maxCoeff() < 1e-5);
      CHECK((j.block<3, 1>(3, c) - ang).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("jacobian of a single joint and a stretched arm") {
  const auto one = single_joint(1.0);
  JointConfig q(1);
  q << 0.3;
  const Jacobian j = jacobian(one, q);
  Eigen::Matrix<double, 6, 1> want;
  want << -std::sin(0.3), std::cos(0.3), 0, 0, 0, 1;
  CHECK((j.col(0) - want).cwiseAbs().maxCoeff() < 1e-12);

  const Jacobian straight = jacobian(make_test_arm(), JointConfig::Zero(7));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(straight);
  CHECK(svd.singularValues()[5] < 1e-9);
}

TEST_CASE("dimension mismatch") {
  const auto arm = make_test_arm();
  CHECK_THROWS_AS(forward_kinematics(arm, JointConfig::Zero(6)), DimensionMismatch);
  CHECK_THROWS_AS(jacobian(arm, JointConfig::Zero(8)), DimensionMismatch);
  CHECK_THROWS_AS(solve_ik(arm, JointConfig::Zero(3), Pose{}, {}), DimensionMismatch);
  CHECK_THROWS_AS(interpolate(JointConfig::Zero(2), JointConfig::Zero(3)), DimensionMismatch);
}

TEST_CASE("IK returns the seed when it already reaches the target") {
  const auto arm = make_test_arm();
  const JointConfig q = arm.home;
  CHECK(solve_ik(arm, q, forward_kinematics(arm, q), {}) == q);
}

TEST_CASE("IK reaches sampled targets and stays within limits") {
  const auto arm = make_test_arm();
  Gen g(62);
  const Tolerance tol;
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Pose target = forward_kinematics(arm, random_q(arm, g));
    IKParams p;
    p.seed = static_cast<std::uint64_t>(trial);
    try {
      const JointConfig q = solve_ik(arm, arm.home, target, tol, p);
      CHECK(arm.within_limits(q));
      CHECK(tol.accepts(pose_error(forward_kinematics(arm, q), target)));
      ++solved;
    } catch (const IKFailure&) {
    }
  }
  CHECK(solved >= 90);
}

TEST_CASE("IK failure reports the best residual") {
  const auto arm = make_test_arm();
  IKParams p;
  p.restarts = 2;
  try {
    solve_ik(arm, arm.home, Pose::translate(10, 0, 0), {}, p);
    FAIL("expected IKFailure");
  } catch (const IKFailure& e) {
    CHECK(e.best_residual().position > 8.0);
    CHECK_FALSE(e.collision_rejected());
  }
}

TEST_CASE("IK rejects colliding solutions") {
  const auto arm = make_test_arm();
  const Pose target = forward_kinematics(arm, arm.home);
  CollisionWorld world;
  world.boxes.push_back({target.translation - Vec3::Constant(0.05), target.translation + Vec3::Constant(0.05)});
  IKParams p;
  p.restarts = 2;
  try {
    solve_ik(arm, arm.home, target, {}, p, &world);
    FAIL("expected IKFailure");
  } catch (const IKFailure& e) {
    CHECK(e.collision_rejected());
  }
}

TEST_CASE("chain validation") {
  CHECK_NOTHROW(make_test_arm().validate());
  KinematicChain empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  auto limits = make_test_arm();
  limits.joints[2].lower = limits.joints[2].upper;
  CHECK_THROWS_AS(limits.validate(), std::invalid_argument);
  auto radius = make_test_arm();
  radius.spheres[0].radius = 0.0;
  CHECK_THROWS_AS(radius.validate(), std::invalid_argument);
  auto link = make_test_arm();
  link.spheres[0].link = 7;
  CHECK_THROWS_AS(link.validate(), std::invalid_argument);
  auto home = make_test_arm();
  home.home[1] = 3.0;
  CHECK_THROWS_AS(home.validate(), std::invalid_argument);
}

TEST_CASE("limits and clamping") {
  const auto arm = make_test_arm();
  JointConfig q = JointConfig::Constant(7, 5.0);
  CHECK_FALSE(arm.within_limits(q));
  const JointConfig c = arm.clamp(q);
  CHECK(arm.within_limits(c));
  CHECK(c[1] == doctest::Approx(2.2));
}

TEST_CASE("chain JSON round trip") {
  const auto arm = make_test_arm();
  const auto back = chain_from_json(chain_to_json(arm));
  CHECK(chain_to_json(back) == chain_to_json(arm));
  Gen g(63);
  for (int i = 0; i < 20; ++i) {
    const JointConfig q = random_q(arm, g);
    CHECK(testing::near(forward_kinematics(back, q), forward_kinematics(arm, q), 1e-12));
  }
  CHECK_THROWS_AS(chain_from_json(nlohmann::json::object()), MalformedFile);

  const auto shipped = load_chain(testing::data_dir() / "chains" / "arm7.json");
  CHECK_NOTHROW(shipped.validate());
  CHECK(shipped.dof() == 7);
}

}  // TEST_SUITE

TEST_SUITE("collision") {

TEST_CASE("sphere against box") {
  const Aabb box{Vec3(0.049, -1, -1), Vec3(1, 1, 1)};
  CHECK(sphere_intersects(box, Vec3::Zero(), 0.05));
  const Aabb far{Vec3(0.051, -1, -1), Vec3(1, 1, 1)};
  CHECK_FALSE(sphere_intersects(far, Vec3::Zero(), 0.05));
  CHECK(sphere_intersects(box, Vec3(0.5, 0, 0), 0.01));

  KinematicChain c = single_joint(0.0);
  c.spheres = {{-1, Vec3::Zero(), 0.05}};
  CollisionWorld world;
  CHECK_FALSE(collision_check(c, c.home, world));
  world.boxes = {box};
  CHECK(collision_check(c, c.home, world));
  world.boxes = {far};
  CHECK_FALSE(collision_check(c, c.home, world));
}

TEST_CASE("aabb_of bounds a rotated box") {
  const Aabb a = aabb_of(Pose{rot_z(kPi / 4), Vec3(1, 2, 3)}, Vec3(1, 1, 0.5));
  CHECK(a.max.x() - a.min.x() == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(a.max.z() - a.min.z() == doctest::Approx(1.0));
  CHECK(((a.min + a.max) / 2).isApprox(Vec3(1, 2, 3)));
}

TEST_CASE("point cloud voxelisation examples") {
  CHECK(world_from_pointcloud({}).empty());
  const std::vector<Vec3> one{Vec3(0.01, 0.01, 0.01)};
  const auto w1 = world_from_pointcloud(one, 0.03);
  REQUIRE(w1.boxes.size() == 1);
  CHECK(w1.boxes[0].min.isApprox(Vec3::Zero()));
  CHECK(w1.boxes[0].max.isApprox(Vec3::Constant(0.03)));
  const std::vector<Vec3> two{Vec3(0.01, 0.01, 0.01), Vec3(0.04, 0.01, 0.01)};
  const auto w2 = world_from_pointcloud(two, 0.03);
  REQUIRE(w2.boxes.size() == 1);
  CHECK(w2.boxes[0].max.isApprox(Vec3(0.06, 0.03, 0.03)));
  CHECK_THROWS_AS(world_from_pointcloud(one, 0.0), std::invalid_argument);
}

TEST_CASE("voxel boxes cover exactly the occupied voxels") {
  Gen g(64);
  for (int trial = 0; trial < 50; ++trial) {
    const double v = g.uniform(0.01, 0.05);
    std::vector<Vec3> pts;
    for (int i = g.integer(1, 300); i > 0; --i) pts.push_back(g.vec(0.15));
    std::set<std::array<long, 3>> voxels;
    for (const auto& p : pts)
      voxels.insert({static_cast<long>(std::floor(p.x() / v)), static_cast<long>(std::floor(p.y() / v)),
                     static_cast<long>(std::floor(p.z() / v))});
    const auto w = world_from_pointcloud(pts, v);
    double volume = 0.0;
    for (const auto& b : w.boxes) volume += (b.max - b.min).prod();
    CHECK(volume == doctest::Approx(static_cast<double>(voxels.size()) * v * v * v).epsilon(1e-9));
    for (const auto& p : pts) {
      const bool inside = std::any_of(w.boxes.begin(), w.boxes.end(), [&](const Aabb& b) {
        return (p.array() >= b.min.array() - 1e-12).all() && (p.array() <= b.max.array() + 1e-12).all();
      });
      CHECK(inside);
    }
    for (std::size_t i = 0; i < w.boxes.size(); ++i)
      for (std::size_t j = i + 1; j < w.boxes.size(); ++j) {
        const Vec3 lo = w.boxes[i].min.cwiseMax(w.boxes[j].min), hi = w.boxes[i].max.cwiseMin(w.boxes[j].max);
        CHECK(((hi - lo).array() <= 1e-12).any());
      }
  }
}

TEST_CASE("shipped point cloud loads") {
  const auto pts = load_pointcloud(testing::data_dir() / "clouds" / "clutter.xyz");
  CHECK_FALSE(pts.empty());
  CHECK_FALSE(world_from_pointcloud(pts).empty());
}

TEST_CASE("interpolation spacing and endpoints") {
  Gen g(65);
  for (int trial = 0; trial < 200; ++trial) {
    const JointConfig a = Eigen::VectorXd::Random(4) * 3, b = Eigen::VectorXd::Random(4) * 3;
    const auto s = interpolate(a, b, 0.05);
    CHECK(s.front() == a);
    CHECK(s.back() == b);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK((s[i] - s[i - 1]).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
  }
  const JointConfig a = JointConfig::Zero(2);
  CHECK(interpolate(a, a).size() == 2);
  JointConfig b(2);
  b << 0.1, 0.0;
  CHECK(interpolate(a, b, 0.05).size() == 3);

  const std::vector<JointConfig> keys{a, b, a};
  const auto d = densify(keys, 0.05);
  CHECK(d.size() == 5);
  CHECK(d[2] == b);
  CHECK(densify({}, 0.05).empty());
}

TEST_CASE("first collision along samples") {
  KinematicChain c = single_joint(0.0);
  c.spheres = {{0, Vec3(0.5, 0, 0), 0.05}};
  CollisionWorld world;
  world.boxes.push_back({Vec3(-0.1, 0.4, -0.1), Vec3(0.1, 0.6, 0.1)});
  JointConfig a(1), b(1);
  a << 0.0;
  b << kPi / 2;
  const auto samples = interpolate(a, b, 0.05);
  const auto hit = first_collision(c, samples, world);
  REQUIRE(hit.has_value());
  for (std::size_t i = 0; i < *hit; ++i) CHECK_FALSE(collision_check(c, samples[i], world));
  CHECK(collision_check(c, samples[*hit], world));
  CHECK_FALSE(segment_free(c, a, b, world));
  CHECK(segment_free(c, a, a, world));
}

}  // TEST_SUITE
