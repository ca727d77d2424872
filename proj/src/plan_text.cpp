#include "lastinch/plan_text.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace lastinch {

namespace {

constexpr std::size_t kMaxShownName = 40;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Printable ASCII only, so messages stay valid UTF-8 whatever the input.
std::string printable(std::string_view s) {
  std::string out;
  for (char c : s.substr(0, kMaxShownName)) {
    const auto u = static_cast<unsigned char>(c);
    out += (u >= 0x20 && u < 0x7f) ? c : '?';
  }
  if (s.size() > kMaxShownName) out += "...";
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool valid_param(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string_view strip_numbering(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i > 0 && i < s.size() && s[i] == '.') return trim(s.substr(i + 1));
  return s;
}

std::string ordinal(std::size_t i) { return std::to_string(i + 1); }

// Returns the instance or the error for one non-blank line.
std::variant<ActionInstance, TranslationError> parse_line(std::string_view line, std::size_t line_no,
                                                           const SymbolTable& symbols) {
  auto fail = [&](std::string action, std::string error) {
    return TranslationError{line_no, std::move(action), std::move(error)};
  };
  const std::string_view body = strip_numbering(line);
  const auto open = body.find('(');
  // Without a parenthesis the first word is taken as the name.
  const std::string_view head = trim(body.substr(0, open));
  const std::string_view name = open == std::string_view::npos ? head.substr(0, head.find_first_of(" \t")) : head;
  if (name.empty()) return fail(printable(body), "missing action name");
  if (!std::all_of(name.begin(), name.end(), is_ident_char)) return fail(printable(name), "malformed action name");
  const auto type = parse_action_name(name);
  if (!type) return fail(printable(name), "unknown action");
  const std::string canonical(action_name(*type));
  if (open == std::string_view::npos) return fail(canonical, "missing '('");
  const auto close = body.find(')', open);
  if (close == std::string_view::npos) return fail(canonical, "missing ')'");
  if (!trim(body.substr(close + 1)).empty()) return fail(canonical, "unexpected text after ')'");

  std::vector<std::string> params;
  const std::string_view inner = trim(body.substr(open + 1, close - open - 1));
  if (!inner.empty()) {
    std::size_t start = 0;
    while (true) {
      const auto comma = inner.find(',', start);
      const std::string_view raw = trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start));
      if (raw.empty()) return fail(canonical, "empty parameter");
      std::string p = lower(raw);
      if (!valid_param(p)) return fail(canonical, "invalid parameter '" + printable(raw) + "'");
      params.push_back(std::move(p));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  const auto& sig = signature(*type);
  if (params.size() != sig.size())
    return fail(canonical, "expected " + std::to_string(sig.size()) + " parameter" + (sig.size() == 1 ? "" : "s") +
                               ", got " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!symbols.known(p)) return fail(canonical, "unknown symbol '" + p + "'");
    if (sig[i] == ParamKind::Object && !symbols.objects.contains(p))
      return fail(canonical, "parameter " + ordinal(i) + " must be an object, got '" + p + "'");
    if (sig[i] == ParamKind::Location && !symbols.locations.contains(p))
      return fail(canonical, "parameter " + ordinal(i) + " must be a location, got '" + p + "'");
  }
  return ActionInstance{*type, std::move(params)};
}

}  // namespace

SymbolTable SymbolTable::from(const World& world, const EnvironmentInfo& env) {
  SymbolTable t;
  for (const auto& [id, rec] : world) t.objects.insert(id);
  for (const auto& [id, loc] : env.locations) t.locations.insert(id);
  return t;
}

std::string TranslationError::message() const { return "Failed to create " + action + " instance: " + error + "."; }

ParseResult parse_plan(std::string_view text, const SymbolTable& symbols) {
  std::vector<ActionInstance> plan;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    ++line_no;
    if (!line.empty()) {
      auto parsed = parse_line(line, line_no, symbols);
      if (auto* err = std::get_if<TranslationError>(&parsed)) return *err;
      plan.push_back(std::get<ActionInstance>(std::move(parsed)));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return plan;
}

std::string serialize_plan(const std::vector<ActionInstance>& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.size(); ++i) out += std::to_string(i + 1) + ". " + to_string(plan[i]) + "\n";
  return out;
}

std::string format_feedback(const TranslationError& err) { return err.message(); }

std::string format_feedback(const SearchFailure& failure) {
  std::string out = "Failed to ground plan: " + to_string(failure.blocking) + " has unsatisfied preconditions: ";
  for (std::size_t i = 0; i < failure.unmet.size(); ++i) {
    if (i) out += ", ";
    out += failure.unmet[i].describe();
  }
  out += ".\nPartial grounded plan:";
  if (failure.partial.empty()) {
    out += " (no actions grounded)\n";
  } else {
    out += "\n" + serialize_plan(failure.partial);
  }
  return out;
}

std::string truncate_feedback(const std::string& text, std::size_t max_chars) {
  if (text.size() <= max_chars) return text;
  static constexpr std::string_view kMarker = "\n... (truncated)";
  if (max_chars <= kMarker.size()) return text.substr(0, max_chars);
  const std::size_t budget = max_chars - kMarker.size();
  std::size_t cut = text.rfind('\n', budget);
  if (cut == std::string::npos || cut == 0) cut = budget;
  return text.substr(0, cut) + std::string(kMarker);
}

}  // namespace lastinch
