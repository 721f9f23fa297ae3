#include <httplib.h>

#include "vton/core/error.hpp"
#include "vton/core/manifest.hpp"
#include "vton/study/study.hpp"

namespace vton::study {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownAssignment:
    case ErrorCode::kNoRemainingItems:
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kNotOwner: return 403;
    case ErrorCode::kDoubleSubmission: return 409;
    case ErrorCode::kExpiredAssignment: return 410;
    default: return 400;
  }
}

void reply_error(httplib::Response& res, const Error& e) {
  res.status = status_for(e.code());
  res.set_content(json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump(),
                  "application/json");
}

json assignment_json(const Assignment& a, const StudyItem& item) {
  json dims = json::array();
  for (const auto& d : dimensions()) {
    dims.push_back({{"key", d.key}, {"title", d.title}, {"definition", d.definition}});
  }
  return {{"assignment_id", a.assignment_id},
          {"rater_id", a.rater_id},
          {"triplet_id", a.triplet_id},
          {"method_id", a.method_id},
          {"issued_at", format_utc(a.issued_at)},
          {"state", to_string(a.state)},
          {"images",
           {{"garment", item.garment_url},
            {"ground_truth", item.ground_truth_url},
            {"generated", item.generated_url}}},
          {"dimensions", dims}};
}

}  // namespace

struct StudyServer::Impl {
  explicit Impl(Study& s) : study(s) {}
  Study& study;
  httplib::Server server;
  std::thread thread;
};

StudyServer::StudyServer(Study& study, std::filesystem::path image_root, std::filesystem::path ui_root)
    : impl_(std::make_unique<Impl>(study)) {
  auto& server = impl_->server;
  auto& s = impl_->study;

  server.Get("/api/task", [&s](const httplib::Request& req, httplib::Response& res) {
    const auto rater = req.get_param_value("rater");
    try {
      const auto a = s.next_assignment(rater);
      res.set_content(assignment_json(a, s.item(a.triplet_id, a.method_id)).dump(), "application/json");
    } catch (const Error& e) {
      reply_error(res, e);
    }
  });

  server.Post("/api/rating", [&s](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body, nullptr, false);
    try {
      if (body.is_discarded() || !body.is_object()) fail(ErrorCode::kParse, "rating body is not JSON");
      const auto& scores = body.at("scores");
      if (!scores.is_array() || scores.size() != kVlmDimensions) {
        fail(ErrorCode::kOutOfRange, "exactly five scores are required");
      }
      std::array<int, kVlmDimensions> values{};
      for (int i = 0; i < kVlmDimensions; ++i) {
        if (!scores[i].is_number_integer()) fail(ErrorCode::kOutOfRange, "scores must be integers");
        values[i] = scores[i].get<int>();
      }
      const auto rating = s.submit_rating(body.at("assignment_id").get<std::string>(),
                                          body.at("rater_id").get<std::string>(), values);
      res.set_content(json{{"ok", true}, {"rating", to_json(rating)}}.dump(), "application/json");
    } catch (const Error& e) {
      reply_error(res, e);
    } catch (const json::exception& e) {
      reply_error(res, Error(ErrorCode::kParse, e.what()));
    }
  });

  server.Get("/api/progress", [&s](const httplib::Request&, httplib::Response& res) {
    const auto p = s.progress();
    json items = json::array();
    for (const auto& i : p.items) {
      items.push_back({{"triplet_id", i.triplet_id}, {"method_id", i.method_id},
                       {"ratings", i.ratings}, {"pending", i.pending}});
    }
    res.set_content(json{{"items", items},
                         {"total_ratings", p.total_ratings},
                         {"min_ratings", p.min_ratings},
                         {"complete_items", p.complete_items}}
                        .dump(),
                    "application/json");
  });

  server.Get("/api/export", [&s](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : s.export_ratings()) out.push_back(to_json(r));
    res.set_content(out.dump(), "application/json");
  });

  if (!image_root.empty()) server.set_mount_point("/images", image_root.string());
  if (!ui_root.empty()) server.set_mount_point("/", ui_root.string());
}

StudyServer::~StudyServer() { stop(); }

int StudyServer::start(const std::string& host, int port) {
  auto& server = impl_->server;
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return bound;
}

void StudyServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void StudyServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace vton::study
