#include "lastinch/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "lastinch/collision.hpp"
#include "lastinch/io.hpp"

namespace lastinch {

namespace {

void check_dims(const KinematicChain& chain, const JointConfig& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof())
    throw DimensionMismatch("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                            std::to_string(chain.dof()) + " joints");
}

Pose joint_transform(const Joint& j, double angle) {
  return compose(j.offset, Pose{Rotation::from_axis_angle(j.axis.vec(), angle), Vec3::Zero()});
}

// [position error; rotation vector taking current onto target]
Eigen::Matrix<double, 6, 1> task_error(const Pose& current, const Pose& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.translation - current.translation;
  const Eigen::AngleAxisd aa(target.rotation.quaternion() * current.rotation.quaternion().conjugate());
  double angle = aa.angle();
  Vec3 axis = aa.axis();
  if (angle > kPi) {
    angle = 2.0 * kPi - angle;
    axis = -axis;
  }
  e.tail<3>() = axis * angle;
  return e;
}

JointConfig random_config(const KinematicChain& chain, std::mt19937_64& rng) {
  JointConfig q(static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    std::uniform_real_distribution<double> d(chain.joints[i].lower, chain.joints[i].upper);
    q[static_cast<Eigen::Index>(i)] = d(rng);
  }
  return q;
}

}  // namespace

void KinematicChain::validate() const {
  if (joints.empty()) throw std::invalid_argument("chain needs at least one joint");
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (!(joints[i].lower < joints[i].upper))
      throw std::invalid_argument("joint " + std::to_string(i) + ": lower limit must be below upper limit");
  for (const auto& s : spheres) {
    if (!(s.radius > 0.0)) throw std::invalid_argument("collision sphere radius must be positive");
    if (s.link < -1 || s.link >= static_cast<int>(joints.size()))
      throw std::invalid_argument("collision sphere link index out of range");
  }
  auto check_config = [&](const JointConfig& q, const std::string& what) {
    if (static_cast<std::size_t>(q.size()) != joints.size())
      throw std::invalid_argument(what + ": wrong number of joints");
    if (!within_limits(q, 1e-9)) throw std::invalid_argument(what + ": outside joint limits");
  };
  if (home.size() > 0) check_config(home, "home");
  for (const auto& [loc, q] : observation) check_config(q, "observation config '" + loc + "'");
}

bool KinematicChain::within_limits(const JointConfig& q, double slack) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (v < joints[i].lower - slack || v > joints[i].upper + slack) return false;
  }
  return true;
}

JointConfig KinematicChain::clamp(const JointConfig& q) const {
  JointConfig out = q;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(out[k], joints[i].lower, joints[i].upper);
  }
  return out;
}

std::vector<Pose> link_frames(const KinematicChain& chain, const JointConfig& q) {
  check_dims(chain, q);
  std::vector<Pose> frames;
  frames.reserve(chain.dof());
  Pose t;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    t = compose(t, joint_transform(chain.joints[i], q[static_cast<Eigen::Index>(i)]));
    frames.push_back(t);
  }
  return frames;
}

Pose forward_kinematics(const KinematicChain& chain, const JointConfig& q) {
  return compose(link_frames(chain, q).back(), chain.ee_offset);
}

Jacobian jacobian(const KinematicChain& chain, const JointConfig& q) {
  const auto frames = link_frames(chain, q);
  const Vec3 ee = compose(frames.back(), chain.ee_offset).translation;
  Jacobian j(6, static_cast<Eigen::Index>(chain.dof()));
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const Vec3 z = frames[i].rotation.apply(chain.joints[i].axis.vec());
    const auto c = static_cast<Eigen::Index>(i);
    j.block<3, 1>(0, c) = z.cross(ee - frames[i].translation);
    j.block<3, 1>(3, c) = z;
  }
  return j;
}

JointConfig solve_ik(const KinematicChain& chain, const JointConfig& q0, const Pose& target, const Tolerance& tol,
                     const IKParams& params, const CollisionWorld* world) {
  check_dims(chain, q0);
  if (!target.translation.allFinite()) throw std::invalid_argument("solve_ik: non-finite target");
  std::mt19937_64 rng(params.seed);
  PoseError best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  bool collision_rejected = false;
  const double lambda2 = params.damping * params.damping;

  for (int attempt = 0; attempt <= params.restarts; ++attempt) {
    JointConfig q = attempt == 0 ? chain.clamp(q0) : random_config(chain, rng);
    for (int it = 0; it <= params.max_iterations; ++it) {
      const Pose current = forward_kinematics(chain, q);
      const PoseError err = pose_error(current, target);
      if (err.position + err.angle < best.position + best.angle) best = err;
      if (tol.accepts(err)) {
        if (world && collision_check(chain, q, *world)) {
          collision_rejected = true;
          break;
        }
        return q;
      }
      if (it == params.max_iterations) break;
      const Jacobian jac = jacobian(chain, q);
      const Eigen::Matrix<double, 6, 6> jjt = jac * jac.transpose() + lambda2 * Eigen::Matrix<double, 6, 6>::Identity();
      JointConfig dq = jac.transpose() * jjt.ldlt().solve(task_error(current, target));
      const double peak = dq.cwiseAbs().maxCoeff();
      if (peak > params.step_clamp) dq *= params.step_clamp / peak;
      q = chain.clamp(q + dq);
    }
  }
  throw IKFailure("IK failed after " + std::to_string(params.restarts + 1) + " attempts (best residual " +
                      std::to_string(best.position) + " m, " + std::to_string(rad2deg(best.angle)) + " deg)",
                  best, collision_rejected);
}

nlohmann::json joints_to_json(const JointConfig& q) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < q.size(); ++i) a.push_back(q[i]);
  return a;
}

JointConfig joints_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of joint angles");
  JointConfig q(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("joint angle must be a number");
    q[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return q;
}

KinematicChain chain_from_json(const nlohmann::json& j, const std::string& source) {
  KinematicChain c;
  if (!j.is_object() || !j.contains("joints") || !j.at("joints").is_array())
    throw MalformedFile(source, 0, "joints", "expected an array");
  const auto& joints = j.at("joints");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const std::string field = "joints[" + std::to_string(i) + "]";
    const auto& jj = joints[i];
    Joint joint;
    joint.axis = with_field(source, field + ".axis", [&] { return UnitVector(vec_from_json(jj.at("axis"))); });
    joint.offset = with_field(source, field + ".offset", [&] { return pose_from_json(jj.at("offset")); });
    with_field(source, field + ".limits", [&] {
      const auto& lim = jj.at("limits");
      if (!lim.is_array() || lim.size() != 2) throw std::invalid_argument("expected [lower, upper] in radians");
      joint.lower = lim[0].get<double>();
      joint.upper = lim[1].get<double>();
      return 0;
    });
    c.joints.push_back(joint);
  }
  c.ee_offset = with_field(source, "ee_offset", [&] { return pose_from_json(j.at("ee_offset")); });
  if (j.contains("collision")) {
    const auto& spheres = j.at("collision");
    for (std::size_t i = 0; i < spheres.size(); ++i) {
      const std::string field = "collision[" + std::to_string(i) + "]";
      c.spheres.push_back(with_field(source, field, [&] {
        const auto& s = spheres[i];
        return CollisionSphere{s.at("link").get<int>(), vec_from_json(s.at("center")), s.at("radius").get<double>()};
      }));
    }
  }
  if (j.contains("home")) c.home = with_field(source, "home", [&] { return joints_from_json(j.at("home")); });
  if (j.contains("observation_configs")) {
    for (const auto& [loc, q] : j.at("observation_configs").items())
      c.observation[loc] = with_field(source, "observation_configs." + loc, [&] { return joints_from_json(q); });
  }
  with_field(source, "", [&] {
    c.validate();
    return 0;
  });
  return c;
}

nlohmann::json chain_to_json(const KinematicChain& chain) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& jt : chain.joints)
    joints.push_back({{"axis", vec_to_json(jt.axis.vec())},
                      {"offset", pose_to_json(jt.offset)},
                      {"limits", {jt.lower, jt.upper}}});
  nlohmann::json spheres = nlohmann::json::array();
  for (const auto& s : chain.spheres)
    spheres.push_back({{"link", s.link}, {"center", vec_to_json(s.center)}, {"radius", s.radius}});
  nlohmann::json obs = nlohmann::json::object();
  for (const auto& [loc, q] : chain.observation) obs[loc] = joints_to_json(q);
  return {{"joints", joints},
          {"ee_offset", pose_to_json(chain.ee_offset)},
          {"collision", spheres},
          {"home", joints_to_json(chain.home)},
          {"observation_configs", obs}};
}

KinematicChain load_chain(const std::filesystem::path& path) {
  return chain_from_json(load_json_file(path), path.string());
}

KinematicChain make_test_arm() {
  KinematicChain c;
  const Vec3 z = Vec3::UnitZ();
  const Vec3 y = Vec3::UnitY();
  struct Spec {
    Vec3 axis;
    double length;
    double limit;
  };
  const Spec specs[] = {{z, 0.15, 3.0}, {y, 0.13, 2.2}, {z, 0.21, 3.0}, {y, 0.21, 2.5},
                        {z, 0.20, 3.0}, {y, 0.10, 2.0}, {z, 0.10, 3.0}};
  for (const auto& s : specs) c.joints.push_back({UnitVector(s.axis), Pose::translate(0, 0, s.length), -s.limit, s.limit});
  c.ee_offset = Pose::translate(0, 0, 0.12);
  c.spheres = {
      {0, Vec3(0, 0, 0.07), 0.06},  {1, Vec3(0, 0, 0.07), 0.05},  {1, Vec3(0, 0, 0.15), 0.05},
      {2, Vec3(0, 0, 0.10), 0.05},  {3, Vec3(0, 0, 0.07), 0.045}, {3, Vec3(0, 0, 0.14), 0.045},
      {4, Vec3(0, 0, 0.06), 0.04},  {5, Vec3(0, 0, 0.06), 0.04},  {6, Vec3(0, 0, 0.05), 0.035},
      {6, Vec3(0, 0, 0.10), 0.03},
  };
  c.home = JointConfig::Zero(7);
  c.home << 0.0, 0.35, 0.0, 1.6, 0.0, 1.2, 0.0;
  return c;
}

}  // namespace lastinch
