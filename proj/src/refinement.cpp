#include "lastinch/refinement.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#ifdef LASTINCH_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace lastinch {

namespace {

std::string fmt_vec(const Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.3f, %.3f, %.3f)", v.x(), v.y(), v.z());
  return buf;
}

std::string param_list(ActionType t) {
  std::string out;
  const auto& sig = signature(t);
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ", ";
    out += sig[i] == ParamKind::Object ? "object" : "location";
  }
  return out;
}

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '_' || c == ' ' || c == '-') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'`.");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'`.");
  return s.substr(b, e - b + 1);
}

}  // namespace

ScriptedPlanner::ScriptedPlanner(std::vector<std::string> responses) : responses_(std::move(responses)) {}

PlannerResponse ScriptedPlanner::query(const PlannerQuery& q) {
  history_.push_back(q);
  const std::size_t i = calls_++;
  if (responses_.empty()) return {""};
  return {responses_[std::min(i, responses_.size() - 1)]};
}

ExternalPlannerConfig ExternalPlannerConfig::from_environment() {
  ExternalPlannerConfig cfg;
  if (const char* v = std::getenv("LASTINCH_PLANNER_URL")) cfg.endpoint = v;
  if (const char* v = std::getenv("LASTINCH_PLANNER_MODEL")) cfg.model = v;
  if (const char* v = std::getenv("LASTINCH_PLANNER_API_KEY")) cfg.api_key = v;
  return cfg;
}

ExternalPlanner::ExternalPlanner(ExternalPlannerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) throw BackendUnavailable("external planner: no endpoint configured (LASTINCH_PLANNER_URL)");
}

PlannerResponse ExternalPlanner::query(const PlannerQuery& q) {
  const auto scheme_end = cfg_.endpoint.find("://");
  const auto path_start = cfg_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string host = cfg_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);

  httplib::Client client(host);
  client.set_connection_timeout(cfg_.timeout);
  client.set_read_timeout(cfg_.timeout);
  client.set_write_timeout(cfg_.timeout);
  httplib::Headers headers;
  if (!cfg_.model.empty()) headers.emplace("X-Model", cfg_.model);
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    auto res = client.Post(path, headers, q.prompt, "text/plain");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return {res->body};
    last_error = "HTTP " + std::to_string(res->status);
  }
  throw BackendUnavailable("external planner at " + cfg_.endpoint + " unavailable: " + last_error);
}

PlannerQuery build_prompt(const TaskContext& task, const std::vector<std::string>& feedback) {
  std::ostringstream p;
  p << "You are the task planner for a single-arm robot with an eye-in-hand camera.\n\n";
  p << "## Goal\n" << task.instruction << "\n\n";

  const RobotState& r = task.robot;
  p << "## Robot state\n";
  p << "- facing: " << r.facing.value_or("none") << "\n";
  p << "- holding: " << r.held.value_or("nothing") << "\n";
  p << "- saved objects:";
  if (r.saved.empty()) p << " none";
  for (const auto& [id, pose] : r.saved) p << " " << id;
  p << "\n\n";

  p << "## Known locations\n";
  for (const auto& [id, loc] : task.env.locations) p << "- " << id << " at " << fmt_vec(loc.pose.translation) << "\n";
  p << "\n## Known objects\n";
  for (const auto& [id, obj] : task.world) {
    p << "- " << id << ": " << (obj.location.empty() ? "in gripper" : "on " + obj.location);
    if (!obj.contents.empty()) {
      p << ", contains";
      for (const auto& c : obj.contents) p << " " << c;
    }
    p << "\n";
  }

  p << "\n## Available actions\n";
  for (ActionType t : kAllActionTypes) p << "- " << action_name(t) << "(" << param_list(t) << ")\n";

  p << "\n## Output format\n"
       "Answer with a numbered list, one action per line, for example:\n"
       "1. LookFor(object)\n"
       "2. Pick(object)\n"
       "Use only the actions and symbols listed above.\n";

  if (!feedback.empty()) {
    p << "\n## Errors from previous attempts\n";
    for (std::size_t i = 0; i < feedback.size(); ++i) p << i + 1 << ". " << feedback[i] << "\n";
  }
  return {task.instruction, p.str(), task.images};
}

RefinementOutcome refine(const TaskContext& task, PlannerBackend& backend, const RefinementConfig& cfg) {
  if (cfg.max_iterations < 1) throw std::invalid_argument("refinement needs at least one iteration");
  RefinementOutcome out;
  const SymbolTable symbols = SymbolTable::from(task.world, task.env);
  auto push_feedback = [&](const std::string& msg) { out.feedback.push_back(truncate_feedback(msg, cfg.max_feedback_chars)); };

  while (out.iterations < cfg.max_iterations) {
    ++out.iterations;
    const PlannerResponse resp = backend.query(build_prompt(task, out.feedback));
    out.responses.push_back(resp.text);
    auto parsed = parse_plan(resp.text, symbols);
    if (const auto* err = std::get_if<TranslationError>(&parsed)) {
      push_feedback(format_feedback(*err));
      continue;
    }
    const auto& plan = std::get<std::vector<ActionInstance>>(parsed);

    if (!cfg.grounded_search) {
      const auto v = validate_plan(plan, task.robot, task.world, task.env);
      if (v.valid) {
        out.success = true;
        out.plan = GroundedPlan{plan};
        return out;
      }
      std::vector<ActionInstance> prefix(plan.begin(), plan.begin() + static_cast<std::ptrdiff_t>(v.failed_index));
      push_feedback(format_feedback(SearchFailure{v.failure->action, v.failure->unmet, std::move(prefix)}));
      continue;
    }

    auto result = ground_plan(plan, task.robot, task.world, task.env, cfg.search);
    if (auto* grounded = std::get_if<GroundedPlan>(&result)) {
      out.success = true;
      out.plan = std::move(*grounded);
      return out;
    }
    push_feedback(format_feedback(std::get<SearchFailure>(result)));
  }
  return out;
}

std::string select_mesh(const std::string& parameter, const std::vector<std::string>& mesh_names,
                        PlannerBackend* backend) {
  if (mesh_names.empty()) throw std::invalid_argument("select_mesh: empty mesh list");
  if (backend && backend->answers_free_text()) {
    std::ostringstream p;
    p << "Select the object mesh that matches the action parameter.\n"
      << "Parameter: " << parameter << "\nCandidates:";
    for (const auto& m : mesh_names) p << " " << m;
    p << "\nAnswer with exactly one candidate name.\n";
    try {
      const std::string answer = trim_copy(backend->query({parameter, p.str(), {}}).text);
      if (std::find(mesh_names.begin(), mesh_names.end(), answer) != mesh_names.end()) return answer;
    } catch (const BackendUnavailable&) {
      // fall through to the overlap heuristic
    }
  }
  const auto param_tokens = tokens(parameter);
  const std::set<std::string> wanted(param_tokens.begin(), param_tokens.end());
  std::vector<std::string> sorted = mesh_names;
  std::sort(sorted.begin(), sorted.end());
  std::string best;
  std::size_t best_score = 0;
  for (const auto& name : sorted) {
    const auto mt = tokens(name);
    const std::set<std::string> have(mt.begin(), mt.end());
    std::size_t score = 0;
    for (const auto& t : have) score += wanted.contains(t) ? 1 : 0;
    if (score > best_score) {
      best_score = score;
      best = name;
    }
  }
  if (best_score == 0) throw NoMeshMatch("no mesh matches parameter '" + parameter + "'");
  return best;
}

}  // namespace lastinch
