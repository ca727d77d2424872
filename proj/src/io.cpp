#include "lastinch/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lastinch {

namespace {

std::string describe(const std::string& file, std::size_t line, const std::string& field, const std::string& detail) {
  std::string msg = file;
  if (line > 0) msg += ":" + std::to_string(line);
  if (!field.empty()) msg += ": " + field;
  msg += ": " + detail;
  return msg;
}

}  // namespace

MalformedFile::MalformedFile(std::string file, std::size_t line, std::string field, const std::string& detail)
    : std::runtime_error(describe(file, line, field, detail)),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw MalformedFile(source, line, "", e.what());
  }
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

}  // namespace lastinch
