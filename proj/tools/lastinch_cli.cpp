#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lastinch/executor.hpp"
#include "lastinch/io.hpp"
#include "lastinch/kinematics.hpp"
#include "lastinch/plan_text.hpp"
#include "lastinch/refinement.hpp"
#include "lastinch/scenario.hpp"
#include "lastinch/trajectory.hpp"

using namespace lastinch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// A bare pose file, or a sidecar carrying "reference_pose" and "skill".
Pose load_reference(const fs::path& path, SkillKind skill) {
  const json j = load_json_file(path);
  if (!j.contains("reference_pose"))
    return with_field(path.string(), "", [&] { return pose_from_json(j); });
  if (j.contains("skill")) {
    const auto declared = parse_skill(j.at("skill").get<std::string>());
    if (declared != skill) throw MalformedFile(path.string(), 0, "skill", "does not match --skill");
  }
  return with_field(path.string(), "reference_pose", [&] { return pose_from_json(j.at("reference_pose")); });
}

std::unique_ptr<PlannerBackend> make_backend(const std::string& kind, const Scenario& s) {
  if (kind == "external") return std::make_unique<ExternalPlanner>(ExternalPlannerConfig::from_environment());
  return std::make_unique<ScriptedPlanner>(s.planner_script);
}

int ingest(const std::string& poses, const std::string& skill_name, const std::string& reference,
           const std::string& out) {
  const auto skill = parse_skill(skill_name);
  if (!skill) throw std::invalid_argument("unknown skill '" + skill_name + "'");
  TrajectoryStore store;
  if (fs::exists(out)) store = TrajectoryStore::load(out);
  const auto raw = load_raw_waypoints(poses);
  auto traj = process_demonstration(raw, *skill, load_reference(reference, *skill));
  std::printf("%s: %zu raw samples -> %zu waypoints\n", skill_name.c_str(), raw.size(), traj.waypoints.size());
  store.put(std::move(traj));
  store.save(out);
  return 0;
}

int plan(const std::string& scenario_path, const std::string& backend_kind) {
  Scenario s = load_scenario(scenario_path);
  bind_chain(s, load_chain(s.chain_file));
  auto backend = make_backend(backend_kind, s);
  const auto outcome = refine({s.instruction, s.robot, s.world, s.env, {}}, *backend, RefinementConfig{});
  for (const auto& f : outcome.feedback) std::cerr << f << "\n";
  if (!outcome.success) {
    std::cerr << "no grounded plan after " << outcome.iterations << " iteration(s)\n";
    return 1;
  }
  std::cout << serialize_plan(outcome.plan.actions);
  return 0;
}

int execute(const std::string& scenario_path, std::string store_dir, std::string chain_file, std::uint64_t seed,
            const std::string& backend_kind, const std::string& out, bool no_search, bool timings, bool noise) {
  const Scenario s = load_scenario(scenario_path);
  if (store_dir.empty()) {
    if (!s.store_dir) throw std::invalid_argument("no --store given and the scenario names none");
    store_dir = s.store_dir->string();
  }
  const KinematicChain chain = load_chain(chain_file.empty() ? s.chain_file : fs::path(chain_file));
  const TrajectoryStore store = TrajectoryStore::load(store_dir);
  RunConfig cfg;
  cfg.seed = seed;
  cfg.grounded_search = !no_search;
  cfg.timings = timings;
  if (noise) cfg.perception_noise = true;
  std::unique_ptr<PlannerBackend> backend;
  if (backend_kind == "external") backend = make_backend(backend_kind, s);
  const ExecutionReport rep = run_scenario(s, chain, store, cfg, backend.get());
  const std::string text = report_to_json(rep).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
  std::cerr << rep.scenario << " seed " << seed << ": " << (rep.success ? "success" : "failure");
  if (!rep.error.empty()) std::cerr << " (" << rep.error << ")";
  std::cerr << "\n";
  return rep.success ? 0 : 1;
}

int dump(const std::string& report_path, const std::string& what) {
  const json r = load_json_file(report_path);
  const auto& actions = r.at("actions");
  if (what == "joints") {
    std::size_t dof = 0;
    for (const auto& a : actions)
      if (!a.at("joint_path").empty()) dof = a.at("joint_path")[0].size();
    std::cout << "action,step";
    for (std::size_t i = 0; i < dof; ++i) std::cout << ",q" << i;
    std::cout << "\n";
    for (const auto& a : actions) {
      std::size_t step = 0;
      for (const auto& q : a.at("joint_path")) {
        std::cout << a.at("index").get<std::size_t>() << "," << step++;
        for (const auto& v : q) std::cout << "," << v.get<double>();
        std::cout << "\n";
      }
    }
    return 0;
  }
  std::cout << "action,step,x,y,z,qw,qx,qy,qz\n";
  for (const auto& a : actions) {
    std::size_t step = 0;
    for (const auto& p : a.at("waypoints")) {
      std::cout << a.at("index").get<std::size_t>() << "," << step++;
      for (const auto& v : p.at("t")) std::cout << "," << v.get<double>();
      for (const auto& v : p.at("q")) std::cout << "," << v.get<double>();
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demonstration-guided last-inch manipulation in a simulated arm cell"};
  app.require_subcommand(1);

  std::string poses, skill, reference, store_out;
  auto* ing = app.add_subcommand("ingest-demo", "Process a raw demonstration into a trajectory store");
  ing->add_option("--poses", poses, "JSON list of {t, pose}")->required()->check(CLI::ExistingFile);
  ing->add_option("--skill", skill, "pick, place or pour")->required()->check(CLI::IsMember({"pick", "place", "pour"}));
  ing->add_option("--reference", reference, "Reference pose or sidecar file")->required()->check(CLI::ExistingFile);
  ing->add_option("--out", store_out, "Store directory")->required();

  std::string scenario, backend = "scripted";
  auto* pl = app.add_subcommand("plan", "Print the grounded plan for a scenario");
  pl->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  pl->add_option("--backend", backend)->check(CLI::IsMember({"scripted", "external"}));

  std::string store, chain, report_out;
  std::uint64_t seed = 0;
  bool no_search = false, timings = false, noise = false;
  auto* ex = app.add_subcommand("execute", "Plan and execute a scenario, writing the report as JSON");
  ex->add_option("--scenario", scenario)->required()->check(CLI::ExistingFile);
  ex->add_option("--store", store, "Trajectory store directory");
  ex->add_option("--chain", chain, "Chain configuration file");
  ex->add_option("--seed", seed);
  ex->add_option("--backend", backend)->check(CLI::IsMember({"scripted", "external"}));
  ex->add_option("--out", report_out, "Report file (stdout when omitted)");
  ex->add_flag("--no-search", no_search, "Validator-only refinement");
  ex->add_flag("--timings", timings, "Include wall-clock timings in the report");
  ex->add_flag("--noise", noise, "Enable perception noise");

  std::string report, what;
  auto* dp = app.add_subcommand("dump", "Emit CSV from an execution report");
  dp->add_option("--report", report)->required()->check(CLI::ExistingFile);
  dp->add_option("--what", what)->required()->check(CLI::IsMember({"joints", "waypoints"}));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*ing) return ingest(poses, skill, reference, store_out);
    if (*pl) return plan(scenario, backend);
    if (*ex) return execute(scenario, store, chain, seed, backend, report_out, no_search, timings, noise);
    if (*dp) return dump(report, what);
  } catch (const MalformedFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
