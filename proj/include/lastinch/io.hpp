#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace lastinch {

// Parse/validation failure in an input file. `line` is 0 when unknown.
class MalformedFile : public std::runtime_error {
 public:
  MalformedFile(std::string file, std::size_t line, std::string field, const std::string& detail);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Parse errors become MalformedFile carrying the offending line.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);
nlohmann::json load_json_file(const std::filesystem::path& path);

// Runs `fn`, rethrowing std::invalid_argument / json type errors as
// MalformedFile tagged with `field`.
template <class Fn>
auto with_field(const std::string& source, const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw MalformedFile(source, 0, field, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(source, 0, field, e.what());
  }
}

}  // namespace lastinch
