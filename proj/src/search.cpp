#include "lastinch/search.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>

namespace lastinch {

namespace {

constexpr int kMaxUsesPerAction = 2;

struct Node {
  std::vector<ActionInstance> plan;
  std::map<ActionInstance, int> used;
};

void sort_by_text(std::vector<ActionInstance>& actions) {
  std::sort(actions.begin(), actions.end(),
            [](const ActionInstance& a, const ActionInstance& b) { return to_string(a) < to_string(b); });
  actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
}

// Candidate predecessors for the first failing action of `feas`.
std::vector<ActionInstance> insertion_candidates(const Feasibility& feas, const std::vector<ActionInstance>& connecting,
                                                 const EnvironmentInfo& env) {
  std::vector<ActionInstance> out = connecting;
  out.insert(out.end(), feas.suggestions.begin(), feas.suggestions.end());
  const RobotState& before = feas.validation.end.robot;
  if (before.held) out.push_back({ActionType::Place, {*before.held, env.default_place_location}});
  for (const auto& p : feas.validation.failure->unmet) {
    if (p.kind == Predicate::Kind::Saved) out.push_back({ActionType::LookFor, {p.arg}});
    if (p.kind == Predicate::Kind::Facing && !p.subject.empty()) out.push_back({ActionType::LookFor, {p.subject}});
  }
  sort_by_text(out);
  return out;
}

}  // namespace

Subtasks split_into_subtasks(const std::vector<ActionInstance>& plan) {
  Subtasks out;
  std::vector<ActionInstance> current;
  for (const auto& a : plan) {
    current.push_back(a);
    if (is_placement(a.type)) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

ActionClassification classify(const std::vector<ActionInstance>& subtask) {
  ActionClassification c;
  for (const auto& a : subtask) (is_key(a.type) ? c.key : c.connecting).push_back(a);
  std::sort(c.connecting.begin(), c.connecting.end());
  c.connecting.erase(std::unique(c.connecting.begin(), c.connecting.end()), c.connecting.end());
  return c;
}

Feasibility check_feasible(const std::vector<ActionInstance>& plan, const EnvironmentInfo& env,
                           const RobotState& s_init, const World& world) {
  Feasibility f;
  f.validation = validate_plan(plan, s_init, world, env);
  f.feasible = f.validation.valid;
  if (f.feasible) return f;
  for (const auto& p : f.validation.failure->unmet) {
    if (p.kind != Predicate::Kind::Facing) continue;
    if (env.locations.contains(p.arg)) f.suggestions.push_back({ActionType::Face, {p.arg}});
    if (!env.home_facing.empty() && env.home_facing == p.arg) f.suggestions.push_back({ActionType::InitPose, {}});
  }
  sort_by_text(f.suggestions);
  return f;
}

SearchResult grounded_plan_search(const Subtasks& subtasks, const RobotState& s_init, const World& world,
                                  const EnvironmentInfo& env, const SearchBudget& budget, SearchStats* stats) {
  if (budget.max_nodes == 0) throw std::invalid_argument("search budget must be positive");
  std::vector<ActionInstance> grounded;
  Transition current{s_init, world};

  for (const auto& subtask : subtasks) {
    if (auto as_given = validate_plan(subtask, current.robot, current.world, env); as_given.valid) {
      grounded.insert(grounded.end(), subtask.begin(), subtask.end());
      current = std::move(as_given.end);
      continue;
    }
    const ActionClassification cls = classify(subtask);
    std::vector<ActionInstance> pi_c;
    for (const auto& key : cls.key) {
      std::vector<ActionInstance> seed = pi_c;
      seed.push_back(key);
      std::deque<Node> queue{Node{std::move(seed), {}}};
      std::set<std::string> visited;
      std::size_t expansions = 0;
      bool found = false;
      std::optional<PreconditionFailure> blocking;

      while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        if (!visited.insert(serialize_plan(node.plan)).second) continue;
        const Feasibility feas = check_feasible(node.plan, env, current.robot, current.world);
        if (feas.feasible) {
          pi_c = std::move(node.plan);
          found = true;
          break;
        }
        if (!blocking) blocking = feas.validation.failure;
        const std::size_t at = feas.validation.failed_index;
        for (const auto& cand : insertion_candidates(feas, cls.connecting, env)) {
          auto it = node.used.find(cand);
          if (it != node.used.end() && it->second >= kMaxUsesPerAction) continue;
          Node child{node.plan, node.used};
          child.plan.insert(child.plan.begin() + static_cast<std::ptrdiff_t>(at), cand);
          ++child.used[cand];
          if (visited.contains(serialize_plan(child.plan))) continue;
          queue.push_back(std::move(child));
        }
        if (++expansions >= budget.max_nodes) break;
      }
      if (stats) stats->expansions.push_back(expansions);
      if (!found) return SearchFailure{blocking->action, blocking->unmet, grounded};
    }
    auto end = validate_plan(pi_c, current.robot, current.world, env);
    if (!end.valid) throw std::logic_error("grounded subtask failed re-validation");
    grounded.insert(grounded.end(), pi_c.begin(), pi_c.end());
    current = std::move(end.end);
  }
  if (!validate_plan(grounded, s_init, world, env).valid) throw std::logic_error("grounded plan failed re-validation");
  return GroundedPlan{std::move(grounded)};
}

SearchResult ground_plan(const std::vector<ActionInstance>& plan, const RobotState& s_init, const World& world,
                         const EnvironmentInfo& env, const SearchBudget& budget) {
  return grounded_plan_search(split_into_subtasks(plan), s_init, world, env, budget);
}

}  // namespace lastinch
