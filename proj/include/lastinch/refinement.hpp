#pragma once

// Outer loop binding a high-level planner backend to plan translation,
// grounded search and error feedback.

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lastinch/actions.hpp"
#include "lastinch/plan_text.hpp"
#include "lastinch/search.hpp"

namespace lastinch {

struct PlannerQuery {
  std::string task;
  // Fully rendered prompt text sent to the backend.
  std::string prompt;
  // Opaque attachments (image paths), passed through untouched.
  std::vector<std::string> images;
};

struct PlannerResponse {
  std::string text;
};

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoMeshMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlannerBackend {
 public:
  virtual ~PlannerBackend() = default;
  virtual PlannerResponse query(const PlannerQuery& q) = 0;
  // Whether single-name answers (mesh selection) should be requested.
  virtual bool answers_free_text() const { return false; }
};

// Replays canned responses in order, repeating the last one once exhausted.
class ScriptedPlanner : public PlannerBackend {
 public:
  explicit ScriptedPlanner(std::vector<std::string> responses);
  PlannerResponse query(const PlannerQuery& q) override;

  std::size_t calls() const { return calls_; }
  const std::vector<PlannerQuery>& history() const { return history_; }

 private:
  std::vector<std::string> responses_;
  std::size_t calls_ = 0;
  std::vector<PlannerQuery> history_;
};

struct ExternalPlannerConfig {
  // http(s)://host[:port]/path; the prompt is POSTed as text/plain.
  std::string endpoint;
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{30};
  int retries = 2;

  // LASTINCH_PLANNER_URL, LASTINCH_PLANNER_MODEL, LASTINCH_PLANNER_API_KEY.
  static ExternalPlannerConfig from_environment();
};

class ExternalPlanner : public PlannerBackend {
 public:
  explicit ExternalPlanner(ExternalPlannerConfig cfg);
  // Throws BackendUnavailable after all retries fail.
  PlannerResponse query(const PlannerQuery& q) override;
  bool answers_free_text() const override { return true; }

 private:
  ExternalPlannerConfig cfg_;
};

enum class BackendKind { Scripted, External };

struct RefinementConfig {
  std::size_t max_iterations = 10;
  SearchBudget search;
  BackendKind backend = BackendKind::Scripted;
  // false: validator-only ablation, no grounded search.
  bool grounded_search = true;
  std::size_t max_feedback_chars = 2000;
};

struct TaskContext {
  std::string instruction;
  RobotState robot;
  World world;
  EnvironmentInfo env;
  std::vector<std::string> images;
};

// Deterministic prompt: goal, robot state, locations, objects, available
// actions with arities, output format, then prior errors oldest first.
PlannerQuery build_prompt(const TaskContext& task, const std::vector<std::string>& feedback);

struct RefinementOutcome {
  bool success = false;
  GroundedPlan plan;
  std::size_t iterations = 0;
  std::vector<std::string> feedback;
  std::vector<std::string> responses;
};

// Never throws for planner mistakes; BackendUnavailable propagates.
RefinementOutcome refine(const TaskContext& task, PlannerBackend& backend, const RefinementConfig& cfg);

// Maps an action parameter (e.g. "cola_on_the_shelf") to a mesh name by
// underscore-token overlap, ties broken lexicographically. A free-text
// backend is asked first and its answer is used when it names a listed mesh.
std::string select_mesh(const std::string& parameter, const std::vector<std::string>& mesh_names,
                        PlannerBackend* backend = nullptr);

}  // namespace lastinch
