#include "vton/cli/config.hpp"

#include <algorithm>
#include <fstream>

#include "vton/core/error.hpp"

namespace vton::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
  values_ = {
      {"seed", "0"},
      {"workers", "4"},
      {"allow_partial", "false"},
      {"clusters.k", "20"},
      {"curate.target_n", "0"},
      {"curate.check_resolution", "true"},
      {"split.train", "0.8"},
      {"split.validation", "0.1"},
      {"split.test", "0.1"},
      {"erosion.levels", "4"},
      {"erosion.element", "square3"},
      {"backend.kind", "builtin"},
      {"vlm.model", "qwen-vl-plus"},
      {"vlm.temperature", "0"},
      {"vlm.max_attempts", "3"},
      {"vlm.max_in_flight", "4"},
      {"vlm.backoff_ms", "500"},
      {"correlation.level", "method"},
      {"correlation.human_column", "s_avg"},
      {"study.host", "127.0.0.1"},
      {"study.port", "8080"},
      {"study.expiry_minutes", "30"},
  };
}

Config Config::load(const std::filesystem::path& path) {
  Config c;
  c.merge_file(path);
  return c;
}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos) {
      fail(ErrorCode::kParse, path.filename().string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    set_assignment(line);
  }
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorCode::kParse, "expected key=value, got '" + assignment + "'");
  const auto key = trim(assignment.substr(0, eq));
  if (key.empty()) fail(ErrorCode::kParse, "empty config key in '" + assignment + "'");
  values_[key] = trim(assignment.substr(eq + 1));
}

bool Config::has(const std::string& key) const {
  auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    fail(ErrorCode::kInvalidArgument, "missing configuration key '" + key + "'");
  }
  return it->second;
}

std::string Config::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? values_.at(key) : fallback;
}

long long Config::integer(const std::string& key) const {
  const auto v = str(key);
  try {
    std::size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, "'" + key + "' is not an integer: " + v);
  }
}

double Config::real(const std::string& key) const {
  const auto v = str(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, "'" + key + "' is not a number: " + v);
  }
}

bool Config::boolean(const std::string& key) const {
  auto v = str_or(key, "false");
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::kParse, "'" + key + "' is not a boolean: " + v);
}

std::filesystem::path Config::path(const std::string& key) const { return str(key); }

std::uint64_t Config::seed() const { return static_cast<std::uint64_t>(integer("seed")); }

}  // namespace vton::cli
