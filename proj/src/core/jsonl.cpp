#include "vton/core/jsonl.hpp"

#include <ctime>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "vton/core/error.hpp"

namespace vton {

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kNotFound, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kParse, path.filename().string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
    }
    try {
      fn(row, line_no);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, path.filename().string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
    } catch (const Error& e) {
      const std::string where = path.filename().string() + ":" + std::to_string(line_no) + ": ";
      if (std::string_view(e.what()).starts_with(where)) throw;
      fail(e.code(), where + e.what());
    }
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

JsonlAppender::JsonlAppender(const std::filesystem::path& path)
    : out_(path, std::ios::app) {
  if (!out_) fail(ErrorCode::kIo, "cannot open " + path.string() + " for appending");
}

void JsonlAppender::append(const nlohmann::json& row) {
  std::lock_guard lock(mutex_);
  out_ << row.dump() << '\n';
  out_.flush();
}

std::string format_utc(std::chrono::system_clock::time_point tp) {
  const auto secs = std::chrono::time_point_cast<std::chrono::seconds>(tp);
  const std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::chrono::system_clock::time_point parse_utc(const std::string& text) {
  std::tm tm{};
  std::istringstream is(text);
  is >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  if (is.fail()) fail(ErrorCode::kParse, "bad UTC timestamp '" + text + "'");
  return std::chrono::system_clock::from_time_t(timegm(&tm));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIo, "sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

}  // namespace vton
