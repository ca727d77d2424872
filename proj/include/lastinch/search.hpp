#pragma once

// Grounding of a planner-produced action list: split it into subtasks at
// placement actions, keep the key (manipulation) actions in order, and repair
// each failing key action by backward breadth-first insertion of connecting
// actions.

#include <cstddef>
#include <variant>
#include <vector>

#include "lastinch/actions.hpp"
#include "lastinch/plan_text.hpp"

namespace lastinch {

using Subtasks = std::vector<std::vector<ActionInstance>>;

// Splits after every Place-family action; concatenating the result gives
// back `plan`.
Subtasks split_into_subtasks(const std::vector<ActionInstance>& plan);

struct ActionClassification {
  std::vector<ActionInstance> key;
  // Sorted, duplicates removed.
  std::vector<ActionInstance> connecting;
};

ActionClassification classify(const std::vector<ActionInstance>& subtask);

struct Feasibility {
  bool feasible = true;
  // Order-independent actions (InitPose, Face(L)) whose effect satisfies an
  // unmet predicate of the first failing action. Sorted.
  std::vector<ActionInstance> suggestions;
  PlanValidation validation;
};

Feasibility check_feasible(const std::vector<ActionInstance>& plan, const EnvironmentInfo& env,
                           const RobotState& s_init, const World& world);

struct SearchBudget {
  std::size_t max_nodes = 1000;
};

struct GroundedPlan {
  std::vector<ActionInstance> actions;
};

struct SearchStats {
  // Expansions spent on each key action that needed a search, in order.
  std::vector<std::size_t> expansions;
};

using SearchResult = std::variant<GroundedPlan, SearchFailure>;

SearchResult grounded_plan_search(const Subtasks& subtasks, const RobotState& s_init, const World& world,
                                  const EnvironmentInfo& env, const SearchBudget& budget = {},
                                  SearchStats* stats = nullptr);

// Convenience: split then search.
SearchResult ground_plan(const std::vector<ActionInstance>& plan, const RobotState& s_init, const World& world,
                         const EnvironmentInfo& env, const SearchBudget& budget = {});

}  // namespace lastinch
