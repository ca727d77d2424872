#include "lastinch/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

namespace lastinch {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out;
  for (const auto& e : errors) out += (out.empty() ? "" : "; ") + e;
  return out;
}

std::optional<std::string> observation_location(const ActionInstance& a, const World& world) {
  switch (a.type) {
    case ActionType::Face:
      return a.params[0];
    case ActionType::LookFor:
      return world.at(a.params[0]).location;
    case ActionType::LookForAt:
      return a.params[1];
    default:
      return std::nullopt;
  }
}

SkillKind skill_for(ActionType t) {
  if (t == ActionType::Pick) return SkillKind::Pick;
  if (t == ActionType::Pour) return SkillKind::Pour;
  return SkillKind::Place;
}

const MeshEntry* find_mesh(const std::vector<MeshEntry>& meshes, const std::string& id) {
  for (const auto& m : meshes)
    if (m.id == id) return &m;
  return nullptr;
}

const MeshEntry& mesh_for(const std::string& object, const World& world, SimContext& ctx) {
  std::vector<std::string> ids;
  for (const auto& m : *ctx.meshes) ids.push_back(m.id);
  try {
    return *find_mesh(*ctx.meshes, select_mesh(object, ids, ctx.mesh_backend));
  } catch (const NoMeshMatch&) {
    const auto it = world.find(object);
    if (it != world.end())
      if (const MeshEntry* m = find_mesh(*ctx.meshes, it->second.mesh)) return *m;
    throw;
  }
}

// The object follows the gripper.
void carry_held(ExecState& st, const SimContext& ctx) {
  if (!st.robot.held) return;
  const auto g = ctx.grasps.find(*st.robot.held);
  if (g == ctx.grasps.end()) return;
  st.world.at(*st.robot.held).pose = compose(forward_kinematics(*ctx.chain, st.robot.joints), g->second);
}

ActionLog move_to_configuration(const ActionInstance& a, ExecState& st, SimContext& ctx) {
  ActionLog log;
  log.action = a;
  const auto& env = ctx.scenario->env;
  JointConfig target = st.robot.joints;
  if (a.type == ActionType::InitPose) {
    target = env.home;
  } else if (const auto loc = observation_location(a, st.world)) {
    if (auto it = env.observation.find(*loc); it != env.observation.end()) target = it->second;
  }
  std::vector<JointConfig> path;
  try {
    path = plan_joint_path(*ctx.chain, st.robot.joints, target, ctx.collision, ctx.motion);
  } catch (const PlanFailure& e) {
    throw ActionExecutionFailure(a, {e.what()});
  }
  Transition t = apply_effect(a, st.robot, st.world, env);
  if (a.type == ActionType::LookFor || a.type == ActionType::LookForAt) {
    const std::string& x = a.params[0];
    t.robot.saved[x] = ctx.perception.observe_pose(x, st.world).pose;
    ctx.collision = build_collision_world(*ctx.scenario);
    ++ctx.collision_rebuilds;
  }
  t.robot.joints = path.back();
  st = ExecState{std::move(t.robot), std::move(t.world)};
  carry_held(st, ctx);
  log.status = "ok";
  log.joint_path = std::move(path);
  return log;
}

ActionLog run_skill(const ActionInstance& a, ExecState& st, SimContext& ctx) {
  ActionLog log;
  log.action = a;
  const KinematicChain& chain = *ctx.chain;
  const auto& env = ctx.scenario->env;
  const SkillTrajectory& skill = ctx.store->get(skill_for(a.type));
  if (skill.waypoints.size() < 2) throw EmptyTrajectory("skill trajectory needs at least two waypoints");
  const Pose demo_end_inv = invert(skill.waypoints.back().pose);

  // base: the pose the perturbation ladder acts on; to_anchor maps it to the
  // frame the demonstration is replayed in.
  Pose base;
  Pose end_effector_in_base = Pose::identity();
  bool anchor_is_base = false;
  switch (a.type) {
    case ActionType::Pick: {
      const MeshEntry& mesh = mesh_for(a.params[0], st.world, ctx);
      log.mesh = mesh.id;
      base = ctx.perception.observe_pose(a.params[0], st.world).pose;
      end_effector_in_base = mesh.grasp;
      break;
    }
    case ActionType::Pour: {
      log.mesh = mesh_for(a.params[1], st.world, ctx).id;
      base = ctx.perception.observe_pose(a.params[1], st.world).pose;
      anchor_is_base = true;
      break;
    }
    default: {
      const std::string& x = a.params[0];
      const auto g = ctx.grasps.find(x);
      if (g == ctx.grasps.end()) throw ActionExecutionFailure(a, {"no grasp recorded for '" + x + "'"});
      base = *placement_pose(a, st.robot, st.world, env);
      end_effector_in_base = invert(g->second);
      break;
    }
  }

  const JointConfig q0 = st.robot.joints;
  const Pose current_ee = forward_kinematics(chain, q0);
  std::vector<JointConfig> approach;
  std::vector<JointConfig> tracked;
  std::vector<Pose> aligned;
  bool done = false;
  for (std::size_t attempt = 0; attempt <= kPerturbationLadderSize && !done; ++attempt) {
    const Pose pose = attempt == 0 ? base : perturb_object_pose(base, attempt);
    const Pose anchor = anchor_is_base ? pose : compose(compose(pose, end_effector_in_base), demo_end_inv);
    aligned = align_trajectory(generate_initial_trajectory(skill, anchor), current_ee);
    MotionParams mp = ctx.motion;
    mp.seed = ctx.motion.seed + 7919 * attempt;
    try {
      approach = plan_global(chain, q0, aligned.front(), ctx.collision, mp, ctx.schedule.loose);
      tracked = track_trajectory(chain, approach.back(), aligned, ctx.collision, ctx.schedule, mp);
      log.perturbations = attempt;
      done = true;
    } catch (const PlanFailure& e) {
      log.errors.push_back("attempt " + std::to_string(attempt) + ": plan: " + e.what());
    } catch (const TrackFailure& e) {
      log.errors.push_back("attempt " + std::to_string(attempt) + ": track: " + e.what());
    } catch (const IKFailure& e) {
      log.errors.push_back("attempt " + std::to_string(attempt) + ": ik: " + e.what());
    }
  }
  if (!done) throw ActionExecutionFailure(a, log.errors);

  // Approach, last-inch tracking, then retreat back along the tracked path.
  std::vector<JointConfig> path = approach;
  path.insert(path.end(), tracked.begin(), tracked.end());
  for (std::size_t i = tracked.size() - 1; i-- > 0;) path.push_back(tracked[i]);

  const Pose ee_at_goal = forward_kinematics(chain, tracked.back());
  Transition t = apply_effect(a, st.robot, st.world, env);
  const std::string& x = a.params[0];
  if (a.type == ActionType::Pick) {
    ctx.grasps[x] = compose(invert(ee_at_goal), st.world.at(x).pose);
  } else if (a.type != ActionType::Pour) {
    const Pose achieved = compose(ee_at_goal, ctx.grasps.at(x));
    t.world.at(x).pose = achieved;
    t.robot.saved[x] = achieved;
    ctx.grasps.erase(x);
  }
  t.robot.joints = path.back();
  st = ExecState{std::move(t.robot), std::move(t.world)};
  carry_held(st, ctx);
  log.status = "ok";
  log.joint_path = std::move(path);
  log.waypoints = std::move(aligned);
  return log;
}

json action_log_to_json(const ActionLog& l, std::size_t index) {
  json path = json::array();
  for (const auto& q : l.joint_path) path.push_back(joints_to_json(q));
  json wps = json::array();
  for (const auto& p : l.waypoints) wps.push_back(pose_to_json(p));
  json out = {{"index", index},          {"action", to_string(l.action)}, {"status", l.status},
              {"perturbations", l.perturbations}, {"errors", l.errors},  {"joint_path", path},
              {"waypoints", wps}};
  if (!l.mesh.empty()) out["mesh"] = l.mesh;
  return out;
}

}  // namespace

ActionExecutionFailure::ActionExecutionFailure(const ActionInstance& action, std::vector<std::string> errors)
    : std::runtime_error(to_string(action) + " failed: " + join_errors(errors)),
      action_(action),
      errors_(std::move(errors)) {}

Perception::Perception(PerceptionNoise noise, std::uint64_t seed) : noise_(noise), rng_(seed) {}

PoseObservation Perception::observe_pose(const std::string& object, const World& world) {
  const auto it = world.find(object);
  if (it == world.end()) throw UnknownObject("unknown object '" + object + "'");
  clock_ += 1.0;
  Pose pose = it->second.pose;
  if (noise_.enabled) {
    std::normal_distribution<double> nt(0.0, noise_.sigma_t);
    std::normal_distribution<double> nr(0.0, noise_.sigma_r);
    const Vec3 dt(nt(rng_), nt(rng_), nt(rng_));
    const Vec3 w(nr(rng_), nr(rng_), nr(rng_));
    pose.translation += dt;
    if (w.norm() > 0.0) pose.rotation = Rotation::from_axis_angle(w, w.norm()) * pose.rotation;
  }
  return {object, pose, clock_};
}

std::vector<Pose> generate_initial_trajectory(const SkillTrajectory& skill, const Pose& object_pose) {
  if (skill.waypoints.size() < 2) throw EmptyTrajectory("skill trajectory needs at least two waypoints");
  std::vector<Pose> out;
  out.reserve(skill.waypoints.size());
  for (const auto& w : skill.waypoints) out.push_back(compose(object_pose, w.pose));
  return out;
}

std::vector<Pose> align_trajectory(std::span<const Pose> traj, const Pose& current_ee) {
  std::vector<Pose> out(traj.begin(), traj.end());
  if (traj.size() < 2) return out;
  const Vec3 target = traj.back().translation;
  Rotation r;
  try {
    r = rodrigues_rotation(unit_direction(traj.front().translation, target),
                           unit_direction(current_ee.translation, target));
  } catch (const DegenerateDirection&) {
    return out;
  }
  std::vector<Vec3> points;
  points.reserve(traj.size());
  for (const auto& p : traj) points.push_back(p.translation);
  const auto moved = rotate_about_fixed_point(points, r, target);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Pose{r * traj[i].rotation, moved[i]};
  return out;
}

ActionLog execute_action(const ActionInstance& a, ExecState& state, SimContext& ctx) {
  if (!ctx.chain || !ctx.store || !ctx.meshes || !ctx.scenario)
    throw std::invalid_argument("execute_action: simulation context is incomplete");
  if (auto f = check_preconditions(a, state.robot, state.world, ctx.scenario->env))
    throw PreconditionViolated(to_string(a) + ": unmet " + f->describe_unmet());
  switch (a.type) {
    case ActionType::Face:
    case ActionType::LookFor:
    case ActionType::LookForAt:
    case ActionType::InitPose:
      return move_to_configuration(a, state, ctx);
    default:
      return run_skill(a, state, ctx);
  }
}

ExecutionReport run_scenario(const Scenario& scenario, const KinematicChain& chain, const TrajectoryStore& store,
                             const RunConfig& cfg, PlannerBackend* backend) {
  using Clock = std::chrono::steady_clock;
  ExecutionReport rep;
  rep.scenario = scenario.name;
  rep.seed = cfg.seed;

  Scenario s = scenario;
  try {
    bind_chain(s, chain);
  } catch (const std::exception& e) {
    rep.error = e.what();
    return rep;
  }
  apply_jitter(s, cfg.seed);
  rep.final_world = s.world;
  rep.final_robot = s.robot;

  ScriptedPlanner scripted(s.planner_script);
  PlannerBackend& planner = backend ? *backend : scripted;
  TaskContext task{s.instruction, s.robot, s.world, s.env, {}};
  RefinementConfig rc;
  rc.max_iterations = cfg.max_iterations;
  rc.grounded_search = cfg.grounded_search;
  const auto t0 = Clock::now();
  try {
    rep.refinement = refine(task, planner, rc);
  } catch (const std::exception& e) {
    rep.error = std::string("planner: ") + e.what();
  }
  const auto t1 = Clock::now();
  if (cfg.timings) rep.refinement_seconds = std::chrono::duration<double>(t1 - t0).count();
  if (rep.error.empty() && !rep.refinement.success)
    rep.error = "no grounded plan after " + std::to_string(rep.refinement.iterations) + " planner iterations";

  const auto& plan = rep.refinement.plan.actions;
  if (rep.error.empty()) {
    PerceptionNoise noise = s.noise;
    if (cfg.perception_noise) noise.enabled = *cfg.perception_noise;
    SimContext ctx;
    ctx.chain = &chain;
    ctx.store = &store;
    ctx.meshes = &s.meshes;
    ctx.scenario = &s;
    ctx.perception = Perception(noise, cfg.seed);
    ctx.mesh_backend = backend;
    ctx.schedule = cfg.schedule;
    ExecState st{s.robot, s.world};
    try {
      ctx.collision = build_collision_world(s);
      if (collision_check(chain, st.robot.joints, ctx.collision))
        throw std::runtime_error("start configuration is in collision");
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (!rep.error.empty()) {
        ActionLog skipped;
        skipped.action = plan[i];
        rep.actions.push_back(std::move(skipped));
        continue;
      }
      ctx.motion = cfg.motion;
      ctx.motion.seed = cfg.seed * 1000003ULL + i;
      try {
        rep.actions.push_back(execute_action(plan[i], st, ctx));
      } catch (const ActionExecutionFailure& e) {
        ActionLog failed;
        failed.action = plan[i];
        failed.status = "failed";
        failed.perturbations = e.errors().empty() ? 0 : e.errors().size() - 1;
        failed.errors = e.errors();
        rep.actions.push_back(std::move(failed));
        rep.error = e.what();
      } catch (const std::exception& e) {
        ActionLog failed;
        failed.action = plan[i];
        failed.status = "failed";
        failed.errors = {e.what()};
        rep.actions.push_back(std::move(failed));
        rep.error = to_string(plan[i]) + " failed: " + e.what();
      }
    }
    rep.final_world = st.world;
    rep.final_robot = st.robot;
    rep.collision_rebuilds = ctx.collision_rebuilds;
    if (cfg.timings) rep.execution_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
  }

  rep.goals = evaluate_goals(s.goals, rep.final_world);
  rep.success = rep.error.empty() &&
                std::all_of(rep.goals.begin(), rep.goals.end(), [](const GoalResult& g) { return g.satisfied; });
  return rep;
}

json report_to_json(const ExecutionReport& r) {
  json plan = json::array();
  for (const auto& a : r.refinement.plan.actions) plan.push_back(to_string(a));
  json actions = json::array();
  for (std::size_t i = 0; i < r.actions.size(); ++i) actions.push_back(action_log_to_json(r.actions[i], i));
  json goals = json::array();
  for (const auto& g : r.goals) goals.push_back({{"clause", g.clause}, {"satisfied", g.satisfied}, {"detail", g.detail}});
  json out = {{"scenario", r.scenario},
              {"seed", r.seed},
              {"success", r.success},
              {"refinement",
               {{"success", r.refinement.success},
                {"iterations", r.refinement.iterations},
                {"feedback", r.refinement.feedback},
                {"plan", plan}}},
              {"actions", actions},
              {"final_world", world_to_json(r.final_world)},
              {"final_robot", robot_to_json(r.final_robot)},
              {"goals", goals},
              {"collision_rebuilds", r.collision_rebuilds},
              {"error", r.error}};
  if (r.refinement_seconds || r.execution_seconds) {
    out["timings"] = {{"refinement_s", r.refinement_seconds.value_or(0.0)},
                      {"execution_s", r.execution_seconds.value_or(0.0)}};
  }
  return out;
}

}  // namespace lastinch
