#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "vton/core/types.hpp"
#include "vton/vlm/client.hpp"

namespace vton::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "vton");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Raster random_raster(int width, int height, std::mt19937_64& rng);
BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng);
BinaryMask rect_mask(int width, int height, int x0, int y0, int x1, int y1);

/// Synthetic benchmark on disk: manifest.jsonl, results.jsonl and images.
/// Method "good" perturbs the garment region slightly, "poor" replaces much
/// of its texture and shifts colours, so every metric should prefer "good".
struct SyntheticBenchmark {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::filesystem::path results;
  std::vector<std::string> triplet_ids;
  std::vector<std::string> methods;
};

SyntheticBenchmark write_benchmark(const std::filesystem::path& root, int triplets, int size = 64,
                                   std::uint64_t seed = 7,
                                   const std::vector<std::string>& methods = {"good", "poor"});

/// Judges by decoding the ground-truth and generated attachments and mapping
/// their mean absolute difference to 1-5 scores. Optionally fails the first
/// `flaky_calls` calls with a malformed reply.
class PixelJudgeTransport final : public vlm::Transport {
 public:
  explicit PixelJudgeTransport(int flaky_calls = 0) : flaky_(flaky_calls) {}
  vlm::TransportResponse post(const std::string& json_body) override;
  int calls() const { return calls_; }

 private:
  std::mutex mutex_;
  int flaky_;
  int calls_ = 0;
};

/// Wraps `content` as a chat-completions reply.
std::string chat_reply(const std::string& content);

/// Mean absolute per-pixel difference in [0, 255].
double mean_abs_diff(const Raster& a, const Raster& b);

std::string base64_decode(const std::string& text);

}  // namespace vton::testing
