#include <chrono>
#include <fstream>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "vton/core/error.hpp"
#include "vton/study/study.hpp"

namespace vton::study {
namespace {

using nlohmann::json;

std::vector<StudyItem> make_items(int triplets, const std::vector<std::string>& methods) {
  std::vector<StudyItem> items;
  for (int t = 0; t < triplets; ++t) {
    for (const auto& m : methods) {
      const std::string id = "t" + std::to_string(t);
      items.push_back({id, m, "/images/" + id + "_garment.png", "/images/" + id + "_gt.png",
                       "/images/" + m + "_" + id + ".png"});
    }
  }
  return items;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

constexpr std::array<int, kVlmDimensions> kScores = {4, 4, 3, 5, 4};

TEST(Study, CoverageFirstGoesToTheLessRatedItem) {
  Study study(make_items(1, {"a", "b"}), {});
  const auto first = study.next_assignment("r1");
  study.submit_rating(first.assignment_id, "r1", kScores);
  // r2 must get the other item: it has no ratings and nothing in flight.
  const auto second = study.next_assignment("r2");
  EXPECT_NE(second.method_id, first.method_id);
}

TEST(Study, InFlightAssignmentsCountTowardLoad) {
  Study study(make_items(1, {"a", "b"}), {});
  const auto r1 = study.next_assignment("r1");
  const auto r2 = study.next_assignment("r2");
  EXPECT_NE(r1.method_id, r2.method_id);
  // Asking again returns the live assignment.
  EXPECT_EQ(study.next_assignment("r1").assignment_id, r1.assignment_id);
}

TEST(Study, ThreeRatersCoverEveryItemTwice) {
  Study study(make_items(5, {"a", "b"}), {.seed = 3});
  const std::vector<std::string> raters = {"r1", "r2", "r3"};
  std::map<std::string, std::set<std::pair<std::string, std::string>>> seen;
  for (int round = 0; round < 7; ++round) {
    for (const auto& r : raters) {
      const auto a = study.next_assignment(r);
      EXPECT_TRUE(seen[r].insert({a.triplet_id, a.method_id}).second) << "rater saw an item twice";
      study.submit_rating(a.assignment_id, r, kScores);
    }
  }
  const auto p = study.progress();
  EXPECT_EQ(p.total_ratings, 21u);
  EXPECT_GE(p.min_ratings, 2u);
  EXPECT_EQ(p.complete_items, 10u);
  EXPECT_EQ(study.export_ratings().size(), 21u);
}

TEST(Study, ExhaustedRaterIsSignalled) {
  Study study(make_items(1, {"a", "b"}), {});
  for (int i = 0; i < 2; ++i) {
    const auto a = study.next_assignment("r1");
    study.submit_rating(a.assignment_id, "r1", kScores);
  }
  EXPECT_EQ(code_of([&] { study.next_assignment("r1"); }), ErrorCode::kNoRemainingItems);
  EXPECT_EQ(code_of([&] { study.next_assignment(""); }), ErrorCode::kInvalidArgument);
}

TEST(Study, SubmissionErrors) {
  auto now = Clock::now();
  StudyOptions options;
  options.expiry = std::chrono::minutes(30);
  options.now = [&now] { return now; };
  Study study(make_items(2, {"a"}), options);

  const auto a = study.next_assignment("r1");
  EXPECT_EQ(code_of([&] { study.submit_rating("a999", "r1", kScores); }), ErrorCode::kUnknownAssignment);
  EXPECT_EQ(code_of([&] { study.submit_rating(a.assignment_id, "r2", kScores); }), ErrorCode::kNotOwner);
  EXPECT_EQ(code_of([&] { study.submit_rating(a.assignment_id, "r1", {4, 4, 6, 4, 4}); }),
            ErrorCode::kOutOfRange);
  study.submit_rating(a.assignment_id, "r1", kScores);
  EXPECT_EQ(code_of([&] { study.submit_rating(a.assignment_id, "r1", kScores); }),
            ErrorCode::kDoubleSubmission);

  const auto b = study.next_assignment("r1");
  now += std::chrono::minutes(31);
  EXPECT_EQ(code_of([&] { study.submit_rating(b.assignment_id, "r1", kScores); }),
            ErrorCode::kExpiredAssignment);
  // The expired item is free again for someone else.
  const auto c = study.next_assignment("r2");
  EXPECT_EQ(study.progress().total_ratings, 1u);
  EXPECT_NE(c.assignment_id, b.assignment_id);
}

TEST(Study, LogReplayRestoresState) {
  testing::TempDir dir;
  const auto log = dir / "study_log.jsonl";
  std::string pending_id;
  {
    Study study(make_items(3, {"a", "b"}), {.seed = 1, .log_path = log});
    for (const auto& r : {"r1", "r2"}) {
      const auto a = study.next_assignment(r);
      study.submit_rating(a.assignment_id, r, kScores);
    }
    pending_id = study.next_assignment("r3").assignment_id;
  }
  Study restored(make_items(3, {"a", "b"}), {.seed = 1, .log_path = log});
  EXPECT_EQ(restored.export_ratings().size(), 2u);
  EXPECT_EQ(restored.progress().total_ratings, 2u);
  // The pending assignment survives and new ids do not collide.
  EXPECT_EQ(restored.next_assignment("r3").assignment_id, pending_id);
  const auto fresh = restored.next_assignment("r4");
  EXPECT_NE(fresh.assignment_id, pending_id);
  restored.submit_rating(pending_id, "r3", kScores);
  EXPECT_EQ(restored.export_ratings().size(), 3u);
}

TEST(Study, DuplicateItemsRejected) {
  auto items = make_items(1, {"a"});
  items.push_back(items.front());
  EXPECT_EQ(code_of([&] { Study s(items, {}); }), ErrorCode::kDuplicateId);
}

TEST(StudyHttp, EndpointContract) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "images");
  std::ofstream(dir / "images" / "t0_gt.png") << "png-bytes";
  std::filesystem::create_directories(dir / "ui");
  std::ofstream(dir / "ui" / "index.html") << "<html></html>";

  Study study(make_items(1, {"a"}), {});
  StudyServer server(study, dir / "images", dir / "ui");
  const int port = server.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);

  auto task = client.Get("/api/task?rater=r1");
  ASSERT_TRUE(task);
  ASSERT_EQ(task->status, 200);
  const auto body = json::parse(task->body);
  const auto id = body.at("assignment_id").get<std::string>();
  EXPECT_EQ(body.at("images").at("ground_truth"), "/images/t0_gt.png");
  EXPECT_EQ(body.at("dimensions").size(), 5u);
  EXPECT_EQ(body.at("dimensions")[0].at("key"), "s_bg");

  auto post = [&](const json& j) { return client.Post("/api/rating", j.dump(), "application/json"); };
  const json good{{"assignment_id", id}, {"rater_id", "r1"}, {"scores", {5, 4, 4, 3, 5}}};

  EXPECT_EQ(post({{"assignment_id", "a77"}, {"rater_id", "r1"}, {"scores", {5, 4, 4, 3, 5}}})->status, 404);
  EXPECT_EQ(post({{"assignment_id", id}, {"rater_id", "r2"}, {"scores", {5, 4, 4, 3, 5}}})->status, 403);
  EXPECT_EQ(post({{"assignment_id", id}, {"rater_id", "r1"}, {"scores", {5, 4}}})->status, 400);
  EXPECT_EQ(post({{"assignment_id", id}, {"rater_id", "r1"}, {"scores", {5, 4, 9, 3, 5}}})->status, 400);
  EXPECT_EQ(client.Post("/api/rating", "{not json", "application/json")->status, 400);
  auto ok = post(good);
  ASSERT_EQ(ok->status, 200);
  EXPECT_TRUE(json::parse(ok->body).at("ok").get<bool>());
  EXPECT_EQ(post(good)->status, 409);

  EXPECT_EQ(client.Get("/api/task?rater=r1")->status, 404);
  const auto progress = json::parse(client.Get("/api/progress")->body);
  EXPECT_EQ(progress.at("total_ratings"), 1);
  const auto exported = json::parse(client.Get("/api/export")->body);
  ASSERT_EQ(exported.size(), 1u);
  EXPECT_EQ(exported[0].at("rater_id"), "r1");

  auto image = client.Get("/images/t0_gt.png");
  ASSERT_TRUE(image);
  EXPECT_EQ(image->body, "png-bytes");
  EXPECT_EQ(client.Get("/index.html")->status, 200);
  server.stop();
}

TEST(StudyHttp, ExpiredAssignmentIsGone) {
  auto now = Clock::now();
  StudyOptions options;
  options.now = [&now] { return now; };
  Study study(make_items(1, {"a"}), options);
  StudyServer server(study, {});
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  const auto id = json::parse(client.Get("/api/task?rater=r1")->body).at("assignment_id").get<std::string>();
  now += std::chrono::hours(1);
  const json body{{"assignment_id", id}, {"rater_id", "r1"}, {"scores", {5, 4, 4, 3, 5}}};
  EXPECT_EQ(client.Post("/api/rating", body.dump(), "application/json")->status, 410);
  server.stop();
}

}  // namespace
}  // namespace vton::study
