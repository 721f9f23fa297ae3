#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace vton::cli {

/// Flat key = value configuration. '#' starts a comment; keys are dotted
/// (e.g. clusters.k). Later sets override earlier ones, so CLI flags applied
/// after the file win.
class Config {
 public:
  Config();  // defaults
  static Config load(const std::filesystem::path& path);

  void merge_file(const std::filesystem::path& path);
  /// "key=value".
  void set_assignment(const std::string& assignment);
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;
  std::uint64_t seed() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vton::cli
