#include <deque>
#include <fstream>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "vton/core/error.hpp"
#include "vton/core/image_io.hpp"
#include "vton/vlm/client.hpp"

namespace vton::vlm {
namespace {

using nlohmann::json;

// The example response printed with the judge prompt.
constexpr const char* kExamplePayload = R"({
  "reasoning": {
    "background_analysis": "Brief analysis...",
    "person_analysis": "Brief analysis...",
    "garment_analysis": "Brief analysis...",
    "realism_analysis": "Brief analysis..."
  },
  "scores": {
    "background_consistency": 4.5,
    "person_consistency": 4.0,
    "texture_fidelity": 3.5,
    "shape_preservation": 4.0,
    "overall_realism": 4.0
  },
  "final_weighted_score": 4.0
})";

ErrorCode parse_error(const std::string& text) {
  try {
    parse_judge_response(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::kIo;
}

TEST(Prompt, RubricAndResponseBlock) {
  const auto p = build_judge_prompt();
  const std::string all = p.system + "\n" + p.user;
  EXPECT_NE(all.find("final_weighted_score"), std::string::npos);
  EXPECT_NE(all.find("Background is identical to Ground Truth."), std::string::npos);
  std::size_t pos = 0;
  for (const char* header : {"Dimension 1: Background Consistency", "Dimension 2: Person Identity & Body Consistency",
                             "Dimension 3: Texture Fidelity", "Dimension 4: Shape Preservation",
                             "Dimension 5: Overall Realism"}) {
    const auto found = p.user.find(header, pos);
    ASSERT_NE(found, std::string::npos) << header;
    pos = found;
  }
  const auto order_g = p.system.find("[Garment Image]");
  const auto order_gt = p.system.find("[Ground Truth Image]");
  const auto order_gen = p.system.find("[Generated Image]:");
  EXPECT_LT(order_g, order_gt);
  EXPECT_LT(order_gt, order_gen);
  EXPECT_EQ(prompt_asset_hash(), prompt_asset_hash());
  EXPECT_EQ(prompt_asset_hash().size(), 64u);
}

TEST(Prompt, CaptionAndClassification) {
  EXPECT_NE(build_caption_prompt(GarmentCategory::kUpperBody).user,
            build_caption_prompt(GarmentCategory::kLowerBody).user);
  EXPECT_FALSE(classify_garment_prompt().empty());
  EXPECT_EQ(parse_garment_category("Upper body"), GarmentCategory::kUpperBody);
  EXPECT_EQ(parse_garment_category("  lower\n"), GarmentCategory::kLowerBody);
  EXPECT_THROW(parse_garment_category("a dress"), Error);
  EXPECT_THROW(parse_garment_category("upper or lower"), Error);
}

TEST(Parse, ExamplePayload) {
  const auto v = parse_judge_response(kExamplePayload);
  EXPECT_DOUBLE_EQ(v.s_bg(), 4.5);
  EXPECT_DOUBLE_EQ(v.s_id(), 4.0);
  EXPECT_DOUBLE_EQ(v.s_tex(), 3.5);
  EXPECT_DOUBLE_EQ(v.s_shape(), 4.0);
  EXPECT_DOUBLE_EQ(v.s_real(), 4.0);
  EXPECT_NEAR(v.s_avg(), 4.0, 1e-9);
  EXPECT_EQ(v.reported_final(), 4.0);
  EXPECT_EQ(v.reasoning()[0], "Brief analysis...");
}

TEST(Parse, CodeFencesAndWhitespace) {
  const std::string fenced = std::string("```json\n") + kExamplePayload + "\n```\n";
  EXPECT_DOUBLE_EQ(parse_judge_response(fenced).s_bg(), 4.5);
  EXPECT_DOUBLE_EQ(parse_judge_response(std::string("\n  ") + kExamplePayload + "  ").s_tex(), 3.5);
}

TEST(Parse, DistinctErrorCodes) {
  json doc = json::parse(kExamplePayload);
  EXPECT_EQ(parse_error("not json at all"), ErrorCode::kMalformedResponse);
  EXPECT_EQ(parse_error("[1, 2, 3]"), ErrorCode::kMalformedResponse);

  auto without = [&](const std::string& key) {
    json d = doc;
    d.erase(key);
    return d.dump();
  };
  EXPECT_EQ(parse_error(without("scores")), ErrorCode::kMissingField);
  EXPECT_EQ(parse_error(without("reasoning")), ErrorCode::kMissingField);
  EXPECT_EQ(parse_error(without("final_weighted_score")), ErrorCode::kMissingField);
  json no_texture = doc;
  no_texture["scores"].erase("texture_fidelity");
  EXPECT_EQ(parse_error(no_texture.dump()), ErrorCode::kMissingField);

  json high = doc;
  high["scores"]["background_consistency"] = 6;
  EXPECT_EQ(parse_error(high.dump()), ErrorCode::kScoreOutOfRange);
  json low = doc;
  low["scores"]["overall_realism"] = 0.5;
  EXPECT_EQ(parse_error(low.dump()), ErrorCode::kScoreOutOfRange);
  json text_score = doc;
  text_score["scores"]["person_consistency"] = "four";
  EXPECT_EQ(parse_error(text_score.dump()), ErrorCode::kMalformedResponse);
}

/// Replies from a fixed script and keeps every request body.
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::deque<TransportResponse> script) : script_(std::move(script)) {}
  TransportResponse post(const std::string& body) override {
    bodies.push_back(body);
    if (script_.empty()) fail(ErrorCode::kTransport, "connection refused");
    auto r = script_.front();
    script_.pop_front();
    if (r.status == 0) fail(ErrorCode::kTransport, "connection reset");
    return r;
  }
  std::vector<std::string> bodies;

 private:
  std::deque<TransportResponse> script_;
};

struct Images {
  testing::TempDir dir;
  JudgeRequest request;
  Images() {
    std::mt19937_64 rng(1);
    for (const char* name : {"garment", "gt", "gen"}) {
      save_image(testing::random_raster(8, 8, rng), dir / (std::string(name) + ".png"));
    }
    request = {"t1", "m1", dir / "garment.png", dir / "gt.png", dir / "gen.png", "judge-model", 0.0};
  }
};

constexpr RetryPolicy kNoWait{3, std::chrono::milliseconds(0)};

TEST(Client, RequestShape) {
  Images images;
  ScriptedTransport transport({{200, testing::chat_reply(kExamplePayload)}});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.score_triplet(images.request);
  ASSERT_TRUE(outcome.scores);
  const auto body = json::parse(transport.bodies.at(0));
  EXPECT_EQ(body.at("model"), "judge-model");
  EXPECT_EQ(body.at("temperature"), 0.0);
  const auto& content = body.at("messages").at(1).at("content");
  std::vector<std::string> labels;
  for (const auto& part : content) {
    if (part.at("type") == "text" && part.at("text").get<std::string>().front() == '[') {
      labels.push_back(part.at("text"));
    }
  }
  EXPECT_EQ(labels, (std::vector<std::string>{"[Garment Image]", "[Ground Truth Image]", "[Generated Image]"}));
  EXPECT_EQ(std::count_if(content.begin(), content.end(), [](const json& p) { return p.at("type") == "image_url"; }),
            3);
}

TEST(Client, RetriesThenSucceeds) {
  Images images;
  ScriptedTransport transport({{200, testing::chat_reply("no json here")},
                               {0, ""},
                               {200, testing::chat_reply(kExamplePayload)}});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.score_triplet(images.request);
  ASSERT_TRUE(outcome.scores);
  EXPECT_EQ(outcome.attempts, 3);
  EXPECT_EQ(outcome.failures, (std::vector<ErrorCode>{ErrorCode::kMalformedResponse, ErrorCode::kTransport}));
  EXPECT_FALSE(outcome.final_error);
}

TEST(Client, ExhaustionAfterThreeAttempts) {
  Images images;
  json high = json::parse(kExamplePayload);
  high["scores"]["overall_realism"] = 7;
  ScriptedTransport transport({{200, testing::chat_reply(high.dump())},
                               {500, "oops"},
                               {200, "{}"},
                               {200, testing::chat_reply(kExamplePayload)}});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.score_triplet(images.request);
  EXPECT_FALSE(outcome.scores);
  EXPECT_EQ(outcome.attempts, 3);
  EXPECT_EQ(outcome.final_error, ErrorCode::kExhausted);
  EXPECT_EQ(outcome.failures, (std::vector<ErrorCode>{ErrorCode::kScoreOutOfRange, ErrorCode::kTransport,
                                                      ErrorCode::kMalformedResponse}));
  EXPECT_EQ(transport.bodies.size(), 3u);
}

TEST(Client, AuthFailureIsNotRetried) {
  Images images;
  ScriptedTransport transport({{401, "{}"}, {200, testing::chat_reply(kExamplePayload)}});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.score_triplet(images.request);
  EXPECT_EQ(outcome.final_error, ErrorCode::kAuth);
  EXPECT_EQ(outcome.attempts, 1);
}

TEST(Client, MissingImageIsAFailureNotACall) {
  Images images;
  images.request.generated_image = images.dir / "absent.png";
  ScriptedTransport transport({});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.score_triplet(images.request);
  EXPECT_EQ(outcome.final_error, ErrorCode::kNotFound);
  EXPECT_TRUE(transport.bodies.empty());
}

TEST(Client, ArchiveHasOneLinePerAttempt) {
  Images images;
  const auto path = images.dir / "archive.jsonl";
  {
    JsonlAppender archive(path);
    ScriptedTransport transport({{200, testing::chat_reply("garbage")}, {200, testing::chat_reply(kExamplePayload)}});
    VlmClient client(transport, kNoWait, &archive);
    client.score_triplet(images.request);
  }
  std::vector<json> rows;
  read_jsonl(path, [&](const json& row, std::size_t) { rows.push_back(row); });
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("attempt"), 1);
  EXPECT_EQ(rows[0].at("outcome"), "malformed_response");
  EXPECT_EQ(rows[1].at("outcome"), "ok");
  EXPECT_EQ(rows[1].at("triplet_id"), "t1");
  EXPECT_EQ(rows[1].at("method_id"), "m1");
  EXPECT_EQ(rows[1].at("payload_hash").get<std::string>(), sha256_hex(rows[1].at("response").get<std::string>()));
}

TEST(Client, ScoreAllWithFlakyJudgeKeepsOrder) {
  testing::TempDir dir;
  const auto bench = testing::write_benchmark(dir.path(), 10);
  std::vector<JudgeRequest> requests;
  for (const auto& t : bench.triplet_ids) {
    for (const auto& m : bench.methods) {
      requests.push_back({t, m, bench.root / "images" / (t + "_garment.png"), bench.root / "images" / (t + "_gt.png"),
                          bench.root / "images" / (m + "_" + t + ".png"), "judge", 0.0});
    }
  }
  // Two bad replies can never exhaust one request's three attempts.
  testing::PixelJudgeTransport transport(2);
  VlmClient client(transport, kNoWait);
  const auto outcomes = client.score_all(requests, 4);
  ASSERT_EQ(outcomes.size(), requests.size());
  int attempts = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    EXPECT_EQ(outcomes[i].triplet_id, requests[i].triplet_id);
    EXPECT_EQ(outcomes[i].method_id, requests[i].method_id);
    ASSERT_TRUE(outcomes[i].scores) << i;
    attempts += outcomes[i].attempts;
  }
  EXPECT_EQ(attempts, 22);
  EXPECT_EQ(transport.calls(), 22);
  for (std::size_t i = 0; i + 1 < outcomes.size(); i += 2) {
    EXPECT_GE(outcomes[i].scores->s_avg(), outcomes[i + 1].scores->s_avg()) << "good should not trail poor";
  }
}

TEST(Client, CaptionFlow) {
  Images images;
  ScriptedTransport transport({{200, testing::chat_reply("Lower")},
                               {200, testing::chat_reply("\"Slim black denim jeans with a high waist.\"")}});
  VlmClient client(transport, kNoWait);
  const auto outcome = client.caption_garment("t1", images.request.garment_image, "captioner");
  EXPECT_FALSE(outcome.error);
  EXPECT_EQ(outcome.category, GarmentCategory::kLowerBody);
  EXPECT_EQ(outcome.caption, "Slim black denim jeans with a high waist.");
  ASSERT_EQ(transport.bodies.size(), 2u);
  const auto second = json::parse(transport.bodies[1]);
  EXPECT_EQ(second.at("messages").at(1).at("content").at(0).at("text"),
            build_caption_prompt(GarmentCategory::kLowerBody).user);

  ScriptedTransport refusing({{200, testing::chat_reply("cannot tell")},
                              {200, testing::chat_reply("cannot tell")},
                              {200, testing::chat_reply("cannot tell")}});
  VlmClient failing(refusing, kNoWait);
  const auto failed = failing.caption_garment("t1", images.request.garment_image, "captioner");
  EXPECT_EQ(failed.error, ErrorCode::kMalformedResponse);
  EXPECT_FALSE(failed.caption);
}

TEST(Http, LocalEndpointWithBearerCredential) {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    if (seen_auth != "Bearer sk-test") {
      res.status = 401;
      return;
    }
    res.set_content(testing::chat_reply(kExamplePayload), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  Images images;
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  HttpTransport good(url, "sk-test", std::chrono::seconds(5));
  VlmClient client(good, kNoWait);
  const auto ok = client.score_triplet(images.request);
  ASSERT_TRUE(ok.scores);
  EXPECT_DOUBLE_EQ(ok.scores->s_bg(), 4.5);
  EXPECT_EQ(seen_auth, "Bearer sk-test");

  HttpTransport wrong(url, "sk-wrong", std::chrono::seconds(5));
  VlmClient denied(wrong, kNoWait);
  EXPECT_EQ(denied.score_triplet(images.request).final_error, ErrorCode::kAuth);

  HttpTransport missing(url, "", std::chrono::seconds(5));
  VlmClient no_key(missing, kNoWait);
  const auto none = no_key.score_triplet(images.request);
  EXPECT_EQ(none.final_error, ErrorCode::kAuth);
  EXPECT_EQ(none.attempts, 1);

  server.stop();
  thread.join();
  HttpTransport closed(url, "sk-test", std::chrono::seconds(1));
  EXPECT_THROW(closed.post("{}"), Error);
  EXPECT_THROW(HttpTransport("localhost:80", "k"), Error);
}

}  // namespace
}  // namespace vton::vlm
