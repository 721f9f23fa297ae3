#include "vton/vlm/client.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace vton::vlm {

using nlohmann::json;

ImageAttachment attachment_from_file(std::string label, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kNotFound, "cannot open image " + path.string());
  ImageAttachment a;
  a.label = std::move(label);
  a.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  a.mime = (ext == ".jpg" || ext == ".jpeg") ? "image/jpeg"
           : ext == ".webp"                  ? "image/webp"
                                             : "image/png";
  return a;
}

std::string encode_chat_request(const ChatRequest& request) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.user}});
  for (const auto& image : request.images) {
    content.push_back({{"type", "text"}, {"text", image.label}});
    content.push_back(
        {{"type", "image_url"},
         {"image_url",
          {{"url", "data:" + image.mime + ";base64," + httplib::detail::base64_encode(image.bytes)}}}});
  }
  json body{{"model", request.model},
            {"temperature", request.temperature},
            {"messages",
             json::array({{{"role", "system"}, {"content", request.system}},
                          {{"role", "user"}, {"content", content}}})}};
  return body.dump();
}

std::string extract_message_content(std::string_view response_body) {
  const json doc = json::parse(response_body, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kMalformedResponse, "endpoint reply is not JSON");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some endpoints return a list of typed parts.
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  } catch (const json::exception&) {
    fail(ErrorCode::kMalformedResponse, "endpoint reply has no choices[0].message.content");
  }
}

HttpTransport::HttpTransport(std::string endpoint_url, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kInvalidArgument, "vlm.endpoint must be an http(s) URL");
  }
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  base_ = endpoint_url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : endpoint_url.substr(path_start);
}

TransportResponse HttpTransport::post(const std::string& json_body) {
  if (api_key_.empty()) fail(ErrorCode::kAuth, std::string("no credential: set ") + kApiKeyEnv);
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_bearer_token_auth(api_key_);
  auto res = client.Post(path_, json_body, "application/json");
  if (!res) fail(ErrorCode::kTransport, "request failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

ChatRequest make_judge_chat(const JudgeRequest& request) {
  const auto prompt = build_judge_prompt();
  ChatRequest chat;
  chat.model = request.model_name;
  chat.temperature = request.temperature;
  chat.system = prompt.system;
  chat.user = prompt.user;
  chat.images.push_back(attachment_from_file("[Garment Image]", request.garment_image));
  chat.images.push_back(attachment_from_file("[Ground Truth Image]", request.ground_truth_image));
  chat.images.push_back(attachment_from_file("[Generated Image]", request.generated_image));
  return chat;
}

VlmClient::VlmClient(Transport& transport, RetryPolicy policy, JsonlAppender* archive)
    : transport_(transport), policy_(policy), archive_(archive) {
  if (policy_.max_attempts < 1) fail(ErrorCode::kInvalidArgument, "max_attempts must be >= 1");
}

void VlmClient::backoff(int attempt) const {
  if (policy_.base_backoff.count() <= 0) return;
  std::this_thread::sleep_for(policy_.base_backoff * (1 << std::min(attempt - 1, 10)));
}

VlmClient::Attempt VlmClient::call(const ChatRequest& chat) {
  Attempt out;
  try {
    const auto response = transport_.post(encode_chat_request(chat));
    out.raw = response.body;
    if (response.status == 401 || response.status == 403) {
      out.error = ErrorCode::kAuth;
    } else if (response.status < 200 || response.status >= 300) {
      out.error = ErrorCode::kTransport;
    } else {
      out.content = extract_message_content(response.body);
    }
  } catch (const Error& e) {
    out.error = e.code();
  }
  return out;
}

void VlmClient::archive(const std::string& record_id, const std::string& method_id, int attempt,
                        const Attempt& result) {
  if (!archive_) return;
  json row{{"triplet_id", record_id},
           {"attempt", attempt},
           {"timestamp", format_utc(Clock::now())},
           {"payload_hash", sha256_hex(result.raw)},
           {"outcome", result.error ? std::string(to_string(*result.error)) : std::string("ok")},
           {"response", result.raw}};
  if (!method_id.empty()) row["method_id"] = method_id;
  archive_->append(row);
}

JudgeOutcome VlmClient::score_triplet(const JudgeRequest& request) {
  JudgeOutcome outcome;
  outcome.triplet_id = request.triplet_id;
  outcome.method_id = request.method_id;
  ChatRequest chat;
  try {
    chat = make_judge_chat(request);
  } catch (const Error& e) {
    outcome.final_error = e.code();
    return outcome;
  }
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    ++outcome.attempts;
    auto result = call(chat);
    outcome.raw_response = result.raw;
    if (result.content) {
      try {
        outcome.scores = parse_judge_response(*result.content);
        archive(request.triplet_id, request.method_id, attempt, result);
        outcome.final_error.reset();
        return outcome;
      } catch (const Error& e) {
        result.error = e.code();
      }
    }
    archive(request.triplet_id, request.method_id, attempt, result);
    outcome.failures.push_back(*result.error);
    if (*result.error == ErrorCode::kAuth) {
      outcome.final_error = ErrorCode::kAuth;
      return outcome;
    }
    if (*result.error == ErrorCode::kTransport && attempt < policy_.max_attempts) backoff(attempt);
  }
  outcome.final_error = ErrorCode::kExhausted;
  return outcome;
}

std::vector<JudgeOutcome> VlmClient::score_all(std::span<const JudgeRequest> requests, int max_in_flight) {
  std::vector<JudgeOutcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  const int workers =
      std::clamp(max_in_flight, 1, static_cast<int>(std::max<std::size_t>(requests.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
          outcomes[i] = score_triplet(requests[i]);
        }
      });
    }
  }
  return outcomes;
}

CaptionOutcome VlmClient::caption_garment(const std::string& record_id,
                                          const std::filesystem::path& garment,
                                          const std::string& model_name) {
  CaptionOutcome outcome;
  ImageAttachment image;
  try {
    image = attachment_from_file("[Garment Image]", garment);
  } catch (const Error& e) {
    outcome.error = e.code();
    return outcome;
  }
  auto ask = [&](const PromptPair& prompt, auto parse) -> bool {
    ChatRequest chat{model_name, 0.0, prompt.system, prompt.user, {image}};
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
      auto result = call(chat);
      if (result.content) {
        try {
          parse(*result.content);
          archive(record_id, "", attempt, result);
          return true;
        } catch (const Error& e) {
          result.error = e.code();
        }
      }
      archive(record_id, "", attempt, result);
      outcome.error = *result.error;
      if (*result.error == ErrorCode::kAuth) return false;
      if (*result.error == ErrorCode::kTransport && attempt < policy_.max_attempts) backoff(attempt);
    }
    return false;
  };

  if (!ask({"You are a professional fashion analyst.", classify_garment_prompt()},
           [&](const std::string& text) { outcome.category = parse_garment_category(text); })) {
    return outcome;
  }
  if (!ask(build_caption_prompt(*outcome.category), [&](const std::string& text) {
        const auto b = text.find_first_not_of(" \t\r\n\"'");
        const auto e = text.find_last_not_of(" \t\r\n\"'");
        if (b == std::string::npos) fail(ErrorCode::kMalformedResponse, "empty caption");
        outcome.caption = text.substr(b, e - b + 1);
      })) {
    return outcome;
  }
  outcome.error.reset();
  return outcome;
}

}  // namespace vton::vlm
