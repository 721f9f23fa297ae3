#include "vton/cli/store.hpp"

#include <algorithm>
#include <set>

#include "vton/core/error.hpp"
#include "vton/core/numeric.hpp"
#include "vton/rep_metrics.hpp"

namespace vton::cli {

using nlohmann::json;

namespace metric {
std::string vlm(int dimension) { return std::string("vlm.") + kDimensionNames[dimension]; }
std::string rep_level(int k) { return "rep.s_rep_" + std::to_string(k); }
}  // namespace metric

ResultsStore::ResultsStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ResultsStore::load_index() const {
  if (index_) return;
  index_.emplace();
  if (!std::filesystem::exists(scores_path())) return;
  read_jsonl(scores_path(), [&](const json& row, std::size_t) {
    ScoreRecord r;
    r.triplet_id = row.at("triplet_id").get<std::string>();
    r.method_id = row.at("method_id").get<std::string>();
    r.metric = row.at("metric").get<std::string>();
    if (!row.at("value").is_null()) r.value = row["value"].get<double>();
    r.flag = row.value("flag", "");
    (*index_)[{r.triplet_id, r.method_id, r.metric}] = std::move(r);
  });
}

void ResultsStore::append(const std::vector<ScoreRecord>& records) {
  if (records.empty()) return;
  load_index();
  if (!appender_) appender_ = std::make_unique<JsonlAppender>(scores_path());
  for (const auto& r : records) {
    json row{{"triplet_id", r.triplet_id}, {"method_id", r.method_id}, {"metric", r.metric}};
    row["value"] = r.value ? json(*r.value) : json(nullptr);
    if (!r.flag.empty()) row["flag"] = r.flag;
    appender_->append(row);
    (*index_)[{r.triplet_id, r.method_id, r.metric}] = r;
  }
}

std::vector<ScoreRecord> ResultsStore::load() const {
  load_index();
  std::vector<ScoreRecord> out;
  out.reserve(index_->size());
  for (const auto& [key, r] : *index_) out.push_back(r);
  std::stable_sort(out.begin(), out.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
    return std::tie(a.method_id, a.triplet_id, a.metric) < std::tie(b.method_id, b.triplet_id, b.metric);
  });
  return out;
}

bool ResultsStore::has(const std::string& triplet_id, const std::string& method_id,
                       const std::string& metric) const {
  load_index();
  return index_->contains({triplet_id, method_id, metric});
}

const ScoreRecord* ResultsStore::find(const std::string& triplet_id, const std::string& method_id,
                                      const std::string& metric) const {
  load_index();
  auto it = index_->find({triplet_id, method_id, metric});
  return it == index_->end() ? nullptr : &it->second;
}

std::vector<PairRecords> group_pairs(const std::vector<ScoreRecord>& records) {
  std::map<std::pair<std::string, std::string>, PairRecords> groups;
  for (const auto& r : records) {
    if (r.triplet_id == kMethodLevel) continue;
    auto& g = groups[{r.method_id, r.triplet_id}];
    g.triplet_id = r.triplet_id;
    g.method_id = r.method_id;
    g.metrics[r.metric] = r;
  }
  std::vector<PairRecords> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

AggregateBuild build_aggregates(const std::vector<ScoreRecord>& records) {
  AggregateBuild build;
  std::set<std::string> methods;
  for (const auto& r : records) methods.insert(r.method_id);
  for (const auto& r : records) {
    const std::string prefix = "rep.s_rep_";
    if (r.metric.rfind(prefix, 0) == 0 && r.metric != metric::kRepMean) {
      const auto digits = r.metric.substr(prefix.size());
      if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
        build.levels = std::max(build.levels, std::stoi(digits) + 1);
      }
    }
  }

  const auto pairs = group_pairs(records);
  for (const auto& method : methods) {
    MethodAggregate agg;
    agg.method_id = method;
    std::array<std::vector<double>, kVlmDimensions + 1> vlm;
    std::vector<RepScoreSet> rep;
    std::vector<double> psnr, ssim, lpips;
    std::set<std::string> triplets;
    for (const auto& p : pairs) {
      if (p.method_id != method) continue;
      triplets.insert(p.triplet_id);
      auto value = [&](const std::string& name) -> std::optional<double> {
        auto it = p.metrics.find(name);
        return it == p.metrics.end() ? std::nullopt : it->second.value;
      };
      auto present = [&](const std::string& name) { return p.metrics.contains(name); };
      if (present(metric::kVlmFailure) && !p.metrics.at(metric::kVlmFailure).flag.empty()) {
        ++build.failures[method];
      }
      if (value(metric::kVlmAvg)) {
        for (int d = 0; d < kVlmDimensions; ++d) vlm[d].push_back(*value(metric::vlm(d)));
        vlm[kVlmDimensions].push_back(*value(metric::kVlmAvg));
      }
      if (value(metric::kGlobal)) {
        std::vector<std::optional<double>> levels(build.levels);
        for (int k = 0; k < build.levels; ++k) levels[k] = value(metric::rep_level(k));
        rep.push_back(rep::complete(*value(metric::kGlobal), std::move(levels)));
      }
      if (present(metric::kPsnr)) {
        if (auto v = value(metric::kPsnr)) {
          psnr.push_back(*v);
        } else if (p.metrics.at(metric::kPsnr).flag == "inf") {
          ++build.psnr_infinite[method];
        }
      }
      if (auto v = value(metric::kSsim)) ssim.push_back(*v);
      if (auto v = value(metric::kLpips)) lpips.push_back(*v);
    }
    agg.sample_count = triplets.size();
    if (!vlm[0].empty()) {
      std::array<double, kVlmDimensions + 1> means{};
      for (std::size_t d = 0; d < means.size(); ++d) means[d] = mean(vlm[d]);
      agg.vlm = means;
    }
    if (!rep.empty()) {
      auto summary = rep::summarize(rep, build.levels);
      agg.rep = summary.mean;
      build.rep_excluded[method] = summary.excluded_per_level;
    }
    if (!psnr.empty()) agg.psnr = mean(psnr);
    if (!ssim.empty()) agg.ssim = mean(ssim);
    if (!lpips.empty()) agg.lpips = mean(lpips);
    for (const auto& r : records) {
      if (r.method_id == method && r.triplet_id == kMethodLevel && r.metric == metric::kFid) agg.fid = r.value;
    }
    build.methods.push_back(std::move(agg));
  }
  return build;
}

}  // namespace vton::cli
