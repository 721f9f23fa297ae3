#include "vton/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vton/cli/report.hpp"
#include "vton/core/error.hpp"
#include "vton/core/image_io.hpp"
#include "vton/core/manifest.hpp"
#include "vton/core/tensor_io.hpp"
#include "vton/curation.hpp"
#include "vton/embedding.hpp"
#include "vton/meta_eval.hpp"
#include "vton/pixel_metrics.hpp"
#include "vton/rep_metrics.hpp"
#include "vton/study/study.hpp"

namespace vton::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ostream& out(const Context& ctx) { return ctx.out ? *ctx.out : std::cout; }
std::ostream& err(const Context& ctx) { return ctx.err ? *ctx.err : std::cerr; }

int coverage_exit(const Context& ctx, std::size_t incomplete) {
  if (incomplete == 0 || ctx.config.boolean("allow_partial")) return kExitOk;
  err(ctx) << "incomplete coverage: " << incomplete << " item(s); pass --allow-partial to accept\n";
  return kExitIncomplete;
}

int workers(const Context& ctx) { return static_cast<int>(std::max(1LL, ctx.config.integer("workers"))); }
bool force(const Context& ctx) { return ctx.config.boolean("force"); }

std::string gen_source_id(const GeneratedResult& r) { return r.method_id + "--" + r.triplet_id; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
}

/// Triplets by id plus the generated results, with every path resolved.
struct Inputs {
  std::map<std::string, TripletRecord> triplets;
  std::vector<GeneratedResult> results;
};

Inputs load_inputs(const Context& ctx) {
  const auto manifest = ctx.config.path("paths.manifest");
  const auto results_path = ctx.config.path("paths.results");
  Inputs in;
  for (auto t : load_manifest(manifest)) {
    t.garment_path = resolve_path(manifest, t.garment_path).string();
    t.ground_truth_path = resolve_path(manifest, t.ground_truth_path).string();
    t.masked_person_path = resolve_path(manifest, t.masked_person_path).string();
    t.gt_mask_path = resolve_path(manifest, t.gt_mask_path).string();
    in.triplets.emplace(t.id, std::move(t));
  }
  for (auto r : load_results(results_path)) {
    if (!in.triplets.contains(r.triplet_id)) {
      fail(ErrorCode::kNotFound, "result for unknown triplet '" + r.triplet_id + "'");
    }
    r.image_path = resolve_path(results_path, r.image_path).string();
    if (r.gen_mask_path) r.gen_mask_path = resolve_path(results_path, *r.gen_mask_path).string();
    in.results.push_back(std::move(r));
  }
  std::sort(in.results.begin(), in.results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.method_id, a.triplet_id) < std::tie(b.method_id, b.triplet_id);
  });
  return in;
}

bool scored(const ResultsStore& store, const std::string& t, const std::string& m, const std::string& metric) {
  const auto* r = store.find(t, m, metric);
  return r && (r->value || r->flag == "inf");
}

std::unique_ptr<vlm::Transport> make_transport(const Context& ctx, vlm::Transport*& transport) {
  if (transport) return nullptr;
  const char* key = std::getenv(vlm::kApiKeyEnv);
  auto owned = std::make_unique<vlm::HttpTransport>(ctx.config.str("vlm.endpoint"), key ? key : "");
  transport = owned.get();
  return owned;
}

vlm::RetryPolicy retry_policy(const Context& ctx) {
  return {static_cast<int>(ctx.config.integer("vlm.max_attempts")),
          std::chrono::milliseconds(ctx.config.integer("vlm.backoff_ms"))};
}

std::vector<std::vector<double>> rows_of(const TensorBlob& blob, const fs::path& path) {
  if (blob.shape.size() != 2) fail(ErrorCode::kDimensionMismatch, path.string() + ": expected [N, D]");
  std::vector<std::vector<double>> rows(blob.shape[0], std::vector<double>(blob.shape[1]));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < blob.shape[1]; ++j) rows[i][j] = blob.data[i * blob.shape[1] + j];
  }
  return rows;
}

std::vector<study::StudyItem> study_items(const Context& ctx, const Inputs& in) {
  const fs::path root = fs::weakly_canonical(
      fs::absolute(ctx.config.str_or("paths.images", ctx.config.path("paths.manifest").parent_path().string())));
  auto url = [&](const std::string& file) {
    const auto rel = fs::weakly_canonical(fs::absolute(file)).lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") {
      fail(ErrorCode::kInvalidArgument, file + " is outside the image root " + root.string());
    }
    return "/images/" + rel.generic_string();
  };
  std::vector<study::StudyItem> items;
  for (const auto& r : in.results) {
    const auto& t = in.triplets.at(r.triplet_id);
    items.push_back({r.triplet_id, r.method_id, url(t.garment_path), url(t.ground_truth_path), url(r.image_path)});
  }
  return items;
}

study::StudyOptions study_options(const Context& ctx) {
  study::StudyOptions o;
  o.seed = ctx.config.seed();
  o.expiry = std::chrono::minutes(ctx.config.integer("study.expiry_minutes"));
  if (ctx.config.has("paths.study_log")) {
    o.log_path = ctx.config.path("paths.study_log");
  } else if (ctx.config.has("paths.store")) {
    o.log_path = ctx.config.path("paths.store") / "study_log.jsonl";
  }
  return o;
}

json aggregate_json(const MethodAggregate& m) {
  json j{{"method_id", m.method_id}, {"sample_count", m.sample_count}};
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto dims = [](const std::array<double, kVlmDimensions + 1>& a) {
    json o;
    for (int d = 0; d < kVlmDimensions; ++d) o[kDimensionNames[d]] = a[d];
    o["s_avg"] = a[kVlmDimensions];
    return o;
  };
  j["vlm"] = m.vlm ? dims(*m.vlm) : json(nullptr);
  j["human"] = m.human ? dims(*m.human) : json(nullptr);
  if (m.rep) {
    json levels = json::array();
    for (const auto& v : m.rep->s_rep) levels.push_back(opt(v));
    j["rep"] = {{"s_global", m.rep->s_global},
                {"s_rep", levels},
                {"s_rep_mean", opt(m.rep->s_rep_mean)},
                {"s_overall", opt(m.rep->s_overall)}};
  } else {
    j["rep"] = nullptr;
  }
  j["psnr"] = opt(m.psnr);
  j["ssim"] = opt(m.ssim);
  j["lpips"] = opt(m.lpips);
  j["fid"] = opt(m.fid);
  return j;
}

std::array<double, kVlmDimensions + 1> as_array(const std::array<double, kVlmDimensions + 1>& a) { return a; }

}  // namespace

morphology::StructuringElement parse_element(const std::string& name) {
  const std::string prefix = "square";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) {
    const auto digits = name.substr(prefix.size());
    if (std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      return morphology::StructuringElement::square(std::stoi(digits));
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown structuring element '" + name + "' (expected square<N>)");
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::clamp<long long>(workers, 1, static_cast<long long>(std::max<std::size_t>(n, 1))));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (!first) first = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (first) std::rethrow_exception(first);
}

int cmd_curate(Context& ctx) {
  const auto& cfg = ctx.config;
  const auto candidates_path = cfg.path("paths.candidates");
  const auto output = cfg.path("paths.output");
  const auto out_dir = output.parent_path().empty() ? fs::path(".") : output.parent_path();
  fs::create_directories(out_dir);

  struct Candidate {
    TripletRecord record;
    std::optional<std::vector<double>> embedding;
    std::optional<std::pair<int, int>> size;
  };
  std::vector<Candidate> candidates;
  std::set<std::string> ids;
  read_jsonl(candidates_path, [&](const json& row, std::size_t line) {
    Candidate c;
    auto& r = c.record;
    try {
      r.id = row.at("id").get<std::string>();
      r.garment_path = resolve_path(candidates_path, row.at("garment_path").get<std::string>()).string();
      r.ground_truth_path = resolve_path(candidates_path, row.at("ground_truth_path").get<std::string>()).string();
      r.gt_mask_path = resolve_path(candidates_path, row.at("gt_mask_path").get<std::string>()).string();
      if (row.contains("masked_person_path")) {
        r.masked_person_path =
            resolve_path(candidates_path, row["masked_person_path"].get<std::string>()).string();
      }
      r.caption = row.value("caption", "");
      r.verified = row.value("verified", false);
      if (row.contains("width") && row.contains("height")) {
        c.size = std::pair{row["width"].get<int>(), row["height"].get<int>()};
      }
      if (row.contains("embedding")) c.embedding = row["embedding"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, candidates_path.filename().string() + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!ids.insert(r.id).second) {
      fail(ErrorCode::kDuplicateId, candidates_path.filename().string() + ":" + std::to_string(line) +
                                        ": duplicate id '" + r.id + "'");
    }
    candidates.push_back(std::move(c));
  });

  std::vector<Candidate> accepted;
  for (auto& c : candidates) {
    if (cfg.boolean("curate.check_resolution")) {
      const auto [w, h] = c.size ? *c.size : image_size(c.record.ground_truth_path);
      if (!curation::resolution_filter(w, h)) continue;
    }
    accepted.push_back(std::move(c));
  }
  out(ctx) << "curate: " << accepted.size() << " of " << candidates.size() << " candidates pass the resolution gate\n";

  std::vector<std::vector<double>> points(accepted.size());
  parallel_for(accepted.size(), workers(ctx), [&](std::size_t i) {
    points[i] = accepted[i].embedding ? *accepted[i].embedding
                                      : embedding::embed_builtin(load_image(accepted[i].record.garment_path)).vector;
  });

  curation::KMeansOptions km;
  km.k = static_cast<int>(cfg.integer("clusters.k"));
  km.seed = cfg.seed();
  const auto clusters = curation::kmeans_cluster(points, km);
  std::vector<int> labels;
  for (const auto& a : clusters.assignments) labels.push_back(a.cluster);

  std::vector<json> cluster_rows;
  std::vector<std::size_t> counts(static_cast<std::size_t>(km.k), 0);
  for (const auto& a : clusters.assignments) {
    cluster_rows.push_back({{"id", accepted[a.index].record.id}, {"cluster", a.cluster}, {"distance", a.distance}});
    ++counts[a.cluster];
  }
  write_jsonl(out_dir / "clusters.jsonl", cluster_rows);
  std::ostringstream csv;
  csv << "cluster,count\n";
  for (std::size_t c = 0; c < counts.size(); ++c) csv << c << ',' << counts[c] << '\n';
  write_text(out_dir / "cluster_counts.csv", csv.str());

  const auto target = static_cast<std::size_t>(cfg.integer("curate.target_n"));
  const auto selected = curation::stratified_sample(labels, km.k, target == 0 ? accepted.size() : target, cfg.seed());

  std::vector<TripletRecord> records;
  std::vector<int> categories;
  for (auto i : selected) {
    auto r = accepted[i].record;
    r.category_id = labels[i];
    records.push_back(std::move(r));
    categories.push_back(labels[i]);
  }
  const curation::SplitRatios ratios{cfg.real("split.train"), cfg.real("split.validation"), cfg.real("split.test")};
  const auto splits = curation::make_splits(categories, ratios, cfg.seed());

  parallel_for(records.size(), workers(ctx), [&](std::size_t i) {
    auto& r = records[i];
    r.split = splits[i];
    if (r.masked_person_path.empty()) {
      const auto path = out_dir / "masked" / (r.id + ".png");
      fs::create_directories(path.parent_path());
      save_image(curation::build_masked_person(load_image(r.ground_truth_path), load_mask(r.gt_mask_path)), path);
      r.masked_person_path = path.string();
    }
  });

  const auto base = fs::weakly_canonical(fs::absolute(out_dir));
  auto relative = [&](std::string& p) { p = fs::weakly_canonical(fs::absolute(p)).lexically_relative(base).generic_string(); };
  for (auto& r : records) {
    relative(r.garment_path);
    relative(r.ground_truth_path);
    relative(r.masked_person_path);
    relative(r.gt_mask_path);
  }
  save_manifest(records, output);
  out(ctx) << "curate: wrote " << records.size() << " triplets in " << km.k << " clusters to " << output.string()
           << '\n';
  return kExitOk;
}

int cmd_caption(Context& ctx) {
  const auto manifest = ctx.config.path("paths.manifest");
  const auto output = ctx.config.has("paths.output") ? ctx.config.path("paths.output") : manifest;
  auto records = load_manifest(manifest);
  vlm::Transport* transport = ctx.transport;
  auto owned = make_transport(ctx, transport);
  std::unique_ptr<JsonlAppender> archive;
  if (ctx.config.has("paths.archive")) archive = std::make_unique<JsonlAppender>(ctx.config.path("paths.archive"));
  vlm::VlmClient client(*transport, retry_policy(ctx), archive.get());

  std::atomic<std::size_t> failed{0};
  const auto model = ctx.config.str("vlm.model");
  parallel_for(records.size(), static_cast<int>(ctx.config.integer("vlm.max_in_flight")), [&](std::size_t i) {
    auto& r = records[i];
    if (!r.caption.empty() && !r.caption_failed && !force(ctx)) return;
    const auto outcome = client.caption_garment(r.id, resolve_path(manifest, r.garment_path), model);
    if (outcome.caption) {
      r.caption = *outcome.caption;
      r.caption_failed = false;
    } else {
      r.caption_failed = true;
      ++failed;
    }
  });
  save_manifest(records, output);
  out(ctx) << "caption: " << records.size() - failed << " captioned, " << failed << " failed\n";
  return coverage_exit(ctx, failed);
}

int cmd_judge(Context& ctx) {
  const auto in = load_inputs(ctx);
  ResultsStore store(ctx.config.path("paths.store"));
  vlm::Transport* transport = ctx.transport;
  auto owned = make_transport(ctx, transport);
  JsonlAppender archive(store.dir() / "vlm_archive.jsonl");
  vlm::VlmClient client(*transport, retry_policy(ctx), &archive);

  std::vector<vlm::JudgeRequest> requests;
  for (const auto& r : in.results) {
    if (!force(ctx) && scored(store, r.triplet_id, r.method_id, metric::kVlmAvg)) continue;
    const auto& t = in.triplets.at(r.triplet_id);
    requests.push_back({r.triplet_id, r.method_id, t.garment_path, t.ground_truth_path, r.image_path,
                        ctx.config.str("vlm.model"), ctx.config.real("vlm.temperature")});
  }
  const auto outcomes = client.score_all(requests, static_cast<int>(ctx.config.integer("vlm.max_in_flight")));

  std::vector<ScoreRecord> records;
  std::size_t failed = 0;
  int attempts = 0;
  for (const auto& o : outcomes) {
    attempts += o.attempts;
    records.push_back({o.triplet_id, o.method_id, metric::kVlmAttempts, static_cast<double>(o.attempts), ""});
    if (o.scores) {
      for (int d = 0; d < kVlmDimensions; ++d) {
        records.push_back({o.triplet_id, o.method_id, metric::vlm(d), o.scores->scores()[d], ""});
      }
      records.push_back({o.triplet_id, o.method_id, metric::kVlmAvg, o.scores->s_avg(), ""});
      if (o.scores->reported_final()) {
        records.push_back({o.triplet_id, o.method_id, metric::kVlmReported, o.scores->reported_final(), ""});
      }
      records.push_back({o.triplet_id, o.method_id, metric::kVlmFailure, 0.0, ""});
    } else {
      ++failed;
      const auto code = o.final_error ? to_string(*o.final_error) : std::string_view("unknown");
      records.push_back({o.triplet_id, o.method_id, metric::kVlmFailure, std::nullopt, "failed:" + std::string(code)});
      err(ctx) << "judge: " << o.method_id << "/" << o.triplet_id << " failed (" << code << ") after "
               << o.attempts << " attempt(s)\n";
    }
  }
  store.append(records);
  out(ctx) << "judge: " << outcomes.size() - failed << " scored, " << failed << " failed, " << attempts
           << " attempts, " << in.results.size() - outcomes.size() << " already scored\n";
  return coverage_exit(ctx, failed);
}

int cmd_rep_eval(Context& ctx) {
  const auto in = load_inputs(ctx);
  ResultsStore store(ctx.config.path("paths.store"));
  const auto backend = embedding::make_backend(ctx.config.str("backend.kind"),
                                               ctx.config.str_or("paths.embeddings", ""));
  const auto elem = parse_element(ctx.config.str("erosion.element"));
  const int levels = static_cast<int>(ctx.config.integer("erosion.levels"));
  const bool emit = ctx.config.boolean("rep.emit_masks");
  const fs::path masks_out = ctx.config.has("paths.masks_out") ? ctx.config.path("paths.masks_out")
                                                               : store.dir() / "masks";
  const bool pixels = backend->computes_from_pixels();

  std::vector<const GeneratedResult*> todo;
  for (const auto& r : in.results) {
    if (force(ctx) || !scored(store, r.triplet_id, r.method_id, metric::kGlobal)) todo.push_back(&r);
  }
  std::vector<std::vector<ScoreRecord>> rows(todo.size());
  std::atomic<std::size_t> failed{0};
  std::mutex emit_mutex;
  std::set<std::string> emitted;

  parallel_for(todo.size(), workers(ctx), [&](std::size_t i) {
    const auto& r = *todo[i];
    const auto& t = in.triplets.at(r.triplet_id);
    auto& out_rows = rows[i];
    try {
      rep::PairInputs pair;
      pair.gt_source_id = t.id;
      pair.gen_source_id = gen_source_id(r);
      const std::string gen_mask_file = r.gen_mask_path ? *r.gen_mask_path : t.gt_mask_path;
      if (pixels || fs::exists(t.gt_mask_path)) pair.gt_mask = load_mask(t.gt_mask_path);
      if (pixels || fs::exists(gen_mask_file)) pair.gen_mask = load_mask(gen_mask_file);
      if (pixels) {
        pair.gt_image = load_image(t.ground_truth_path);
        pair.gen_image = load_image(r.image_path);
      }
      if (emit) {
        auto write_levels = [&](const std::string& id, const std::optional<BinaryMask>& mask) {
          if (!mask) return;
          {
            std::lock_guard lock(emit_mutex);
            if (!emitted.insert(id).second) return;
          }
          const auto h = morphology::erosion_hierarchy(*mask, elem, levels);
          for (int k = 0; k < levels; ++k) {
            save_mask(h.levels[k], masks_out / (id + ".mask_level_" + std::to_string(k) + ".png"));
          }
        };
        fs::create_directories(masks_out);
        write_levels(pair.gt_source_id, pair.gt_mask);
        write_levels(pair.gen_source_id, pair.gen_mask);
      }
      const auto scores = rep::multi_scale_fidelity(pair, elem, levels, *backend);
      out_rows.push_back({r.triplet_id, r.method_id, metric::kGlobal, scores.scores.s_global, ""});
      for (int k = 0; k < levels; ++k) {
        const auto& v = scores.scores.s_rep[k];
        out_rows.push_back({r.triplet_id, r.method_id, metric::rep_level(k), v, v ? "" : "degenerate"});
      }
      out_rows.push_back({r.triplet_id, r.method_id, metric::kRepMean, scores.scores.s_rep_mean,
                          scores.scores.s_rep_mean ? "" : "degenerate"});
      out_rows.push_back({r.triplet_id, r.method_id, metric::kRepOverall, scores.scores.s_overall,
                          scores.scores.s_overall ? "" : "degenerate"});
    } catch (const Error& e) {
      ++failed;
      out_rows = {{r.triplet_id, r.method_id, metric::kGlobal, std::nullopt,
                   "failed:" + std::string(to_string(e.code()))}};
      std::lock_guard lock(emit_mutex);
      err(ctx) << "rep-eval: " << r.method_id << "/" << r.triplet_id << ": " << e.what() << '\n';
    }
  });
  for (const auto& r : rows) store.append(r);
  out(ctx) << "rep-eval: " << todo.size() - failed << " pairs scored with " << backend->descriptor().backend_id
           << ", " << failed << " failed\n";
  return coverage_exit(ctx, failed);
}

int cmd_pixel_eval(Context& ctx) {
  const auto in = load_inputs(ctx);
  ResultsStore store(ctx.config.path("paths.store"));
  std::vector<std::string> layers;
  std::vector<TensorBlob> weights;
  fs::path lpips_dir;
  if (ctx.config.has("paths.lpips")) {
    lpips_dir = ctx.config.path("paths.lpips");
    for (const auto& entry : fs::directory_iterator(lpips_dir)) {
      const auto name = entry.path().filename().string();
      const std::string prefix = "lpips_w_";
      if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".vten") {
        layers.push_back(name.substr(prefix.size(), name.size() - prefix.size() - 5));
      }
    }
    std::sort(layers.begin(), layers.end());
    if (layers.empty()) fail(ErrorCode::kNotFound, "no lpips_w_<layer>.vten files in " + lpips_dir.string());
    for (const auto& l : layers) weights.push_back(read_tensor(lpips_dir / ("lpips_w_" + l + ".vten")));
  }

  std::vector<const GeneratedResult*> todo;
  for (const auto& r : in.results) {
    if (force(ctx) || !scored(store, r.triplet_id, r.method_id, metric::kSsim)) todo.push_back(&r);
  }
  std::vector<std::vector<ScoreRecord>> rows(todo.size());
  std::atomic<std::size_t> failed{0};
  std::mutex err_mutex;
  parallel_for(todo.size(), workers(ctx), [&](std::size_t i) {
    const auto& r = *todo[i];
    const auto& t = in.triplets.at(r.triplet_id);
    try {
      const auto gen = load_image(r.image_path);
      const auto gt = load_image(t.ground_truth_path);
      const auto p = pixel::psnr(gen, gt);
      rows[i].push_back({r.triplet_id, r.method_id, metric::kPsnr, p, p ? "" : "inf"});
      rows[i].push_back({r.triplet_id, r.method_id, metric::kSsim, pixel::ssim(gen, gt), ""});
      if (!layers.empty()) {
        std::vector<TensorBlob> fa, fb;
        for (const auto& l : layers) {
          fa.push_back(read_tensor(lpips_dir / (gen_source_id(r) + ".lpips_" + l + ".vten")));
          fb.push_back(read_tensor(lpips_dir / (t.id + ".lpips_" + l + ".vten")));
        }
        rows[i].push_back({r.triplet_id, r.method_id, metric::kLpips, pixel::lpips_aggregate(fa, fb, weights), ""});
      }
    } catch (const Error& e) {
      ++failed;
      rows[i] = {{r.triplet_id, r.method_id, metric::kSsim, std::nullopt, "failed:" + std::string(to_string(e.code()))}};
      std::lock_guard lock(err_mutex);
      err(ctx) << "pixel-eval: " << r.method_id << "/" << r.triplet_id << ": " << e.what() << '\n';
    }
  });
  for (const auto& r : rows) store.append(r);
  out(ctx) << "pixel-eval: " << todo.size() - failed << " pairs scored" << (layers.empty() ? " (no LPIPS features)" : "")
           << ", " << failed << " failed\n";
  return coverage_exit(ctx, failed);
}

int cmd_fid(Context& ctx) {
  const auto& cfg = ctx.config;
  if (cfg.has("fid.set_a") || cfg.has("fid.set_b")) {
    const auto a = cfg.path("fid.set_a");
    const auto b = cfg.path("fid.set_b");
    const auto value = pixel::fid(pixel::gaussian_stats(rows_of(read_tensor(a), a)),
                                  pixel::gaussian_stats(rows_of(read_tensor(b), b)));
    out(ctx) << "fid: " << value << '\n';
    return kExitOk;
  }
  const auto in = load_inputs(ctx);
  ResultsStore store(cfg.path("paths.store"));
  std::map<std::string, std::vector<const GeneratedResult*>> by_method;
  for (const auto& r : in.results) by_method[r.method_id].push_back(&r);

  std::vector<ScoreRecord> records;
  for (const auto& [method, results] : by_method) {
    if (!force(ctx) && scored(store, kMethodLevel, method, metric::kFid)) continue;
    std::vector<std::vector<double>> gen, gt;
    if (cfg.has("paths.fid")) {
      const auto dir = cfg.path("paths.fid");
      const auto gen_path = dir / (method + ".fid.vten");
      const auto gt_path = dir / "ground_truth.fid.vten";
      gen = rows_of(read_tensor(gen_path), gen_path);
      gt = rows_of(read_tensor(gt_path), gt_path);
    } else {
      gen.resize(results.size());
      gt.resize(results.size());
      parallel_for(results.size(), workers(ctx), [&](std::size_t i) {
        gen[i] = embedding::embed_builtin(load_image(results[i]->image_path)).vector;
        gt[i] = embedding::embed_builtin(load_image(in.triplets.at(results[i]->triplet_id).ground_truth_path)).vector;
      });
    }
    const double value = pixel::fid(pixel::gaussian_stats(gen), pixel::gaussian_stats(gt));
    records.push_back({kMethodLevel, method, metric::kFid, value, ""});
    out(ctx) << "fid: " << method << " " << value << '\n';
  }
  store.append(records);
  return kExitOk;
}

AggregateBuild load_aggregates(const Context& ctx, std::size_t* incomplete_human) {
  ResultsStore store(ctx.config.path("paths.store"));
  auto build = build_aggregates(store.load());
  if (incomplete_human) *incomplete_human = 0;
  if (!ctx.config.has("paths.ratings")) return build;
  const auto ratings = load_ratings(ctx.config.path("paths.ratings"));
  const auto items = meta::aggregate_human(ratings);
  for (const auto& h : meta::human_method_means(items)) {
    if (incomplete_human) *incomplete_human += h.incomplete_items;
    auto it = std::find_if(build.methods.begin(), build.methods.end(),
                           [&](const MethodAggregate& m) { return m.method_id == h.method_id; });
    if (it == build.methods.end()) {
      MethodAggregate m;
      m.method_id = h.method_id;
      build.methods.push_back(std::move(m));
      it = std::prev(build.methods.end());
    }
    if (h.items > h.incomplete_items) it->human = as_array(h.means);
  }
  std::sort(build.methods.begin(), build.methods.end(),
            [](const auto& a, const auto& b) { return a.method_id < b.method_id; });
  return build;
}

CorrelationReport compute_correlations(const Context& ctx, std::size_t* incomplete_human) {
  const auto level = ctx.config.str("correlation.level");
  const auto column = ctx.config.str("correlation.human_column");
  if (!ctx.config.has("paths.ratings")) fail(ErrorCode::kInvalidArgument, "meta-eval needs paths.ratings");
  if (level == "method") {
    const auto build = load_aggregates(ctx, incomplete_human);
    std::vector<MethodAggregate> rated;
    for (const auto& m : build.methods) {
      if (m.human) rated.push_back(m);
    }
    return meta::correlate_all(rated, column);
  }
  if (level != "sample") fail(ErrorCode::kInvalidArgument, "correlation.level must be 'method' or 'sample'");

  // One pseudo-aggregate per (triplet, method) so the same column logic applies.
  ResultsStore store(ctx.config.path("paths.store"));
  const auto records = store.load();
  int levels = 0;
  for (const auto& m : build_aggregates(records).methods) {
    if (m.rep) levels = std::max(levels, static_cast<int>(m.rep->s_rep.size()));
  }
  std::map<std::pair<std::string, std::string>, PairRecords> pairs;
  for (auto& p : group_pairs(records)) pairs[{p.triplet_id, p.method_id}] = std::move(p);
  const auto items = meta::aggregate_human(load_ratings(ctx.config.path("paths.ratings")));
  if (incomplete_human) *incomplete_human = 0;
  std::vector<MethodAggregate> samples;
  for (const auto& h : items) {
    if (!h.complete) {
      if (incomplete_human) ++*incomplete_human;
      continue;
    }
    auto it = pairs.find({h.triplet_id, h.method_id});
    if (it == pairs.end()) continue;
    const auto& metrics = it->second.metrics;
    auto value = [&](const std::string& name) -> std::optional<double> {
      auto m = metrics.find(name);
      return m == metrics.end() ? std::nullopt : m->second.value;
    };
    MethodAggregate a;
    a.method_id = h.method_id + "/" + h.triplet_id;
    a.sample_count = 1;
    a.human = as_array(h.means);
    if (value(metric::kVlmAvg)) {
      std::array<double, kVlmDimensions + 1> v{};
      for (int d = 0; d < kVlmDimensions; ++d) v[d] = value(metric::vlm(d)).value_or(0.0);
      v[kVlmDimensions] = *value(metric::kVlmAvg);
      a.vlm = v;
    }
    if (value(metric::kGlobal)) {
      std::vector<std::optional<double>> rep(levels);
      for (int k = 0; k < levels; ++k) rep[k] = value(metric::rep_level(k));
      a.rep = rep::complete(*value(metric::kGlobal), std::move(rep));
    }
    a.psnr = value(metric::kPsnr);
    a.ssim = value(metric::kSsim);
    a.lpips = value(metric::kLpips);
    samples.push_back(std::move(a));
  }
  auto report = meta::correlate_all(samples, column);
  return report;
}

int cmd_meta_eval(Context& ctx) {
  std::size_t incomplete = 0;
  const auto report = compute_correlations(ctx, &incomplete);
  const auto table = correlation_table(report);
  const fs::path dir = ctx.config.has("paths.report") ? ctx.config.path("paths.report") : ctx.config.path("paths.store");
  write_text(dir / "correlation.csv", render_csv(table));
  write_text(dir / "correlation.txt", render_text(table));
  out(ctx) << render_text(table);
  if (incomplete) out(ctx) << "note: " << incomplete << " human item(s) with fewer than 2 ratings excluded\n";
  return coverage_exit(ctx, incomplete);
}

int cmd_report(Context& ctx) {
  std::size_t incomplete = 0;
  const auto build = load_aggregates(ctx, &incomplete);
  if (build.methods.empty()) {
    fail(ErrorCode::kNoResults, "no results in " + ctx.config.path("paths.store").string());
  }
  const fs::path dir = ctx.config.has("paths.report") ? ctx.config.path("paths.report") : ctx.config.path("paths.store");
  const auto& methods = build.methods;
  auto any = [&](auto pred) { return std::any_of(methods.begin(), methods.end(), pred); };

  std::vector<std::pair<std::string, Table>> tables;
  if (any([](const auto& m) { return m.vlm || m.human; })) tables.emplace_back("table1_semantic", semantic_table(methods));
  if (any([](const auto& m) { return m.rep.has_value(); })) {
    tables.emplace_back("table2_representation", representation_table(methods, build.levels));
  }
  if (any([](const auto& m) { return m.psnr || m.ssim || m.lpips || m.fid; })) {
    tables.emplace_back("table3_pixel", pixel_table(methods));
  }
  std::string correlation_note;
  if (ctx.config.has("paths.ratings")) {
    try {
      tables.emplace_back("table4_correlation", correlation_table(compute_correlations(ctx)));
    } catch (const Error& e) {
      correlation_note = std::string("correlation skipped: ") + e.what();
    }
  }

  std::ostringstream text;
  for (const auto& [name, table] : tables) {
    write_text(dir / (name + ".csv"), render_csv(table));
    write_text(dir / (name + ".txt"), render_text(table));
    text << render_text(table) << '\n';
  }
  json aggregates = json::array();
  for (const auto& m : methods) {
    auto j = aggregate_json(m);
    if (build.rep_excluded.contains(m.method_id)) j["rep_excluded_per_level"] = build.rep_excluded.at(m.method_id);
    if (build.psnr_infinite.contains(m.method_id)) j["psnr_infinite"] = build.psnr_infinite.at(m.method_id);
    if (build.failures.contains(m.method_id)) j["vlm_failures"] = build.failures.at(m.method_id);
    aggregates.push_back(std::move(j));
  }
  write_text(dir / "aggregates.json", aggregates.dump(2) + "\n");

  std::size_t failures = 0;
  for (const auto& [method, n] : build.failures) {
    failures += n;
    text << "note: " << method << " has " << n << " unscored VLM pair(s)\n";
  }
  for (const auto& [method, n] : build.psnr_infinite) {
    text << "note: " << method << " has " << n << " identical pair(s) with unbounded PSNR, excluded from the mean\n";
  }
  for (const auto& [method, excluded] : build.rep_excluded) {
    for (std::size_t k = 0; k < excluded.size(); ++k) {
      if (excluded[k]) text << "note: " << method << " level " << k << " excludes " << excluded[k] << " empty region(s)\n";
    }
  }
  if (!correlation_note.empty()) text << "note: " << correlation_note << '\n';
  write_text(dir / "report.txt", text.str());
  out(ctx) << text.str();
  return coverage_exit(ctx, failures + incomplete);
}

int cmd_serve_study(Context& ctx) {
  const auto in = load_inputs(ctx);
  study::Study s(study_items(ctx, in), study_options(ctx));
  const fs::path images = ctx.config.str_or("paths.images", ctx.config.path("paths.manifest").parent_path().string());
  study::StudyServer server(s, images, ctx.config.str_or("paths.ui", ""));
  const auto host = ctx.config.str("study.host");
  const auto port = static_cast<int>(ctx.config.integer("study.port"));
  out(ctx) << "serve-study: " << in.results.size() << " items on http://" << host << ":" << port << '\n';
  out(ctx).flush();
  server.run(host, port);
  return kExitOk;
}

int cmd_export_study(Context& ctx) {
  const auto in = load_inputs(ctx);
  auto options = study_options(ctx);
  if (options.log_path.empty() || !fs::exists(options.log_path)) {
    fail(ErrorCode::kNotFound, "no study log to export (set paths.study_log)");
  }
  study::Study s(study_items(ctx, in), options);
  const auto ratings = s.export_ratings();
  save_ratings(ratings, ctx.config.path("paths.ratings"));
  const auto progress = s.progress();
  out(ctx) << "export-study: " << ratings.size() << " ratings, " << progress.complete_items << " of "
           << progress.items.size() << " items have at least 2\n";
  return coverage_exit(ctx, progress.items.size() - progress.complete_items);
}

}  // namespace vton::cli
