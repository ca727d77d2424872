#pragma once

// Textual plan format exchanged with the high-level planner:
//
//   [N.] ActionName(param, param, ...)
//
// one action per line, blank lines ignored. Parameters are identifiers
// [a-z0-9_]+ after lowercasing.

#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lastinch/actions.hpp"

namespace lastinch {

struct SymbolTable {
  std::set<std::string> objects;
  std::set<std::string> locations;

  static SymbolTable from(const World& world, const EnvironmentInfo& env);
  bool known(const std::string& s) const { return objects.contains(s) || locations.contains(s); }
};

struct TranslationError {
  std::size_t line = 0;  // 1-based
  std::string action;
  std::string error;

  // "Failed to create {action} instance: {error}."
  std::string message() const;
};

using ParseResult = std::variant<std::vector<ActionInstance>, TranslationError>;

ParseResult parse_plan(std::string_view text, const SymbolTable& symbols);

// Numbered, one action per line; parse_plan reads it back unchanged.
std::string serialize_plan(const std::vector<ActionInstance>& plan);

// Produced by grounded search when no repair is found.
struct SearchFailure {
  ActionInstance blocking;
  std::vector<Predicate> unmet;
  std::vector<ActionInstance> partial;
};

std::string format_feedback(const TranslationError& err);
std::string format_feedback(const SearchFailure& failure);

// Drops whole trailing lines until `text` fits in `max_chars`, marking the cut.
std::string truncate_feedback(const std::string& text, std::size_t max_chars);

}  // namespace lastinch
