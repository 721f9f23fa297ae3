#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <fstream>
#include <string>
#include <string_view>
#include <chrono>
#include <vector>

#include <json.hpp>

namespace vton {

/// Calls fn(json, line_number) for each non-blank line. Parse failures throw
/// kParse naming the line.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& fn);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& rows);

/// Thread-safe appender; each append writes one line and flushes.
class JsonlAppender {
 public:
  explicit JsonlAppender(const std::filesystem::path& path);
  void append(const nlohmann::json& row);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

std::string format_utc(std::chrono::system_clock::time_point tp);
std::chrono::system_clock::time_point parse_utc(const std::string& text);

std::string sha256_hex(std::string_view data);

}  // namespace vton
