#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vton/core/error.hpp"
#include "vton/core/jsonl.hpp"
#include "vton/core/types.hpp"

namespace vton::vlm {

struct PromptPair {
  std::string system;
  std::string user;
};

inline constexpr const char* kPromptVersion = "v1";

/// The judge rubric: five dimensions and the strict JSON response block.
PromptPair build_judge_prompt();
/// SHA-256 over the versioned prompt assets; changes only when they change.
std::string prompt_asset_hash();

enum class GarmentCategory { kUpperBody, kLowerBody };

std::string to_string(GarmentCategory category);
PromptPair build_caption_prompt(GarmentCategory category);
/// Binary upper/lower decision; dresses count as upper-body.
std::string classify_garment_prompt();
/// Reads "upper" / "lower" out of a free-text answer.
GarmentCategory parse_garment_category(std::string_view answer);

/// Parses a judge reply. Tolerates surrounding whitespace and code fences.
/// Throws kMalformedResponse (no parseable object, wrong types), kMissingField
/// or kScoreOutOfRange so callers can account retries per cause.
VlmScoreVector parse_judge_response(std::string_view text);

struct ImageAttachment {
  std::string label;
  std::string mime;
  std::string bytes;  // encoded file contents
};

ImageAttachment attachment_from_file(std::string label, const std::filesystem::path& path);

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::string system;
  std::string user;
  std::vector<ImageAttachment> images;
};

/// Chat-completions request body; each image is preceded by a text part
/// carrying its label.
std::string encode_chat_request(const ChatRequest& request);
/// choices[0].message.content of a chat-completions response.
std::string extract_message_content(std::string_view response_body);

struct TransportResponse {
  int status = 0;
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws kTransport when no response could be obtained.
  virtual TransportResponse post(const std::string& json_body) = 0;
};

/// POSTs to an http(s) chat-completions endpoint with a bearer credential.
class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string endpoint_url, std::string api_key,
                std::chrono::seconds timeout = std::chrono::seconds(120));
  TransportResponse post(const std::string& json_body) override;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

inline constexpr const char* kApiKeyEnv = "VTON_EVAL_API_KEY";

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{500};
};

struct JudgeRequest {
  std::string triplet_id;
  std::string method_id;
  std::filesystem::path garment_image;
  std::filesystem::path ground_truth_image;
  std::filesystem::path generated_image;
  std::string model_name;
  double temperature = 0.0;
};

/// Attachment order is always garment, ground truth, generated.
ChatRequest make_judge_chat(const JudgeRequest& request);

struct JudgeOutcome {
  std::string triplet_id;
  std::string method_id;
  std::optional<VlmScoreVector> scores;
  int attempts = 0;
  std::vector<ErrorCode> failures;  // one per failed attempt
  std::optional<ErrorCode> final_error;
  std::string raw_response;
};

struct CaptionOutcome {
  std::optional<GarmentCategory> category;
  std::optional<std::string> caption;
  std::optional<ErrorCode> error;
};

class VlmClient {
 public:
  /// `archive` receives one line per attempt; may be null.
  VlmClient(Transport& transport, RetryPolicy policy = {}, JsonlAppender* archive = nullptr);

  /// At most policy.max_attempts attempts. Parse failures are retried
  /// immediately, transport failures after exponential backoff, auth
  /// failures are not retried. Never throws for per-request failures.
  JudgeOutcome score_triplet(const JudgeRequest& request);

  /// Scores all requests with at most `max_in_flight` concurrent calls.
  /// Outcomes are returned in request order.
  std::vector<JudgeOutcome> score_all(std::span<const JudgeRequest> requests, int max_in_flight = 4);

  /// Classify upper/lower, then caption with the category-specific prompt.
  CaptionOutcome caption_garment(const std::string& record_id, const std::filesystem::path& garment,
                                 const std::string& model_name);

 private:
  struct Attempt {
    std::optional<std::string> content;
    std::optional<ErrorCode> error;
    std::string raw;
  };
  Attempt call(const ChatRequest& chat);
  // One archive line per attempt, written once the reply has been parsed.
  void archive(const std::string& record_id, const std::string& method_id, int attempt, const Attempt& result);
  void backoff(int attempt) const;

  Transport& transport_;
  RetryPolicy policy_;
  JsonlAppender* archive_;
};

}  // namespace vton::vlm
