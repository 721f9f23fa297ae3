#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "vton/cli/commands.hpp"
#include "vton/core/error.hpp"

namespace vton::cli {
namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kManifest{"--manifest", "paths.manifest", "triplet manifest (jsonl)"};
constexpr FlagSpec kResults{"--results", "paths.results", "generated results manifest (jsonl)"};
constexpr FlagSpec kStore{"--store", "paths.store", "results store directory"};
constexpr FlagSpec kRatings{"--ratings", "paths.ratings", "human ratings (jsonl)"};
constexpr FlagSpec kOutput{"--output", "paths.output", "output manifest"};
constexpr FlagSpec kEndpoint{"--endpoint", "vlm.endpoint", "chat-completions URL"};
constexpr FlagSpec kModel{"--model", "vlm.model", "VLM model name"};
constexpr FlagSpec kInFlight{"--max-in-flight", "vlm.max_in_flight", "concurrent VLM calls"};
constexpr FlagSpec kLog{"--log", "paths.study_log", "study event log"};

struct Command {
  const char* name;
  const char* help;
  int (*run)(Context&);
  std::vector<FlagSpec> flags;
  std::vector<FlagSpec> switches;  // boolean, value "true" when given
};

std::vector<Command> commands() {
  return {
      {"curate", "filter, cluster, sample and split candidates into a manifest", cmd_curate,
       {{"--candidates", "paths.candidates", "candidate triplets (jsonl)"},
        kOutput,
        {"--k", "clusters.k", "number of clusters"},
        {"--target-n", "curate.target_n", "samples to keep (0 = all)"}},
       {}},
      {"caption", "two-stage garment captioning", cmd_caption,
       {kManifest, kOutput, kEndpoint, kModel, kInFlight, {"--archive", "paths.archive", "raw response log"}},
       {}},
      {"judge", "VLM scoring of every (triplet, method) pair", cmd_judge,
       {kManifest, kResults, kStore, kEndpoint, kModel, kInFlight},
       {}},
      {"rep-eval", "global and multi-scale representation scores", cmd_rep_eval,
       {kManifest,
        kResults,
        kStore,
        {"--backend", "backend.kind", "builtin | file"},
        {"--embeddings", "paths.embeddings", "embedding directory for the file backend"},
        {"--levels", "erosion.levels", "erosion levels"},
        {"--element", "erosion.element", "structuring element, e.g. square3"},
        {"--masks-out", "paths.masks_out", "where --emit-masks writes eroded masks"}},
       {{"--emit-masks", "rep.emit_masks", "write the eroded masks of every level"}}},
      {"pixel-eval", "PSNR, SSIM and LPIPS per pair", cmd_pixel_eval,
       {kManifest, kResults, kStore, {"--lpips", "paths.lpips", "LPIPS feature directory"}},
       {}},
      {"fid", "FID per method, or between two feature files", cmd_fid,
       {kManifest,
        kResults,
        kStore,
        {"--features", "paths.fid", "directory with <method>.fid.vten and ground_truth.fid.vten"},
        {"--set-a", "fid.set_a", "[N, D] feature file"},
        {"--set-b", "fid.set_b", "[N, D] feature file"}},
       {}},
      {"meta-eval", "correlation of metrics with human judgment", cmd_meta_eval,
       {kStore,
        kRatings,
        {"--level", "correlation.level", "method | sample"},
        {"--human-column", "correlation.human_column", "human column to correlate against"},
        {"--out", "paths.report", "output directory"}},
       {}},
      {"report", "method tables with best and second-best marked", cmd_report,
       {kStore, kRatings, {"--out", "paths.report", "output directory"}},
       {}},
      {"serve-study", "run the human study HTTP service", cmd_serve_study,
       {kManifest,
        kResults,
        kStore,
        kLog,
        {"--images", "paths.images", "image root served under /images"},
        {"--ui", "paths.ui", "rating UI bundle served under /"},
        {"--host", "study.host", "bind address"},
        {"--port", "study.port", "port"}},
       {}},
      {"export-study", "export ratings from the study log", cmd_export_study,
       {kManifest, kResults, kStore, kLog, kRatings, {"--images", "paths.images", "image root"}},
       {}},
  };
}

}  // namespace

int run_cli(int argc, const char* const* argv, Context ctx) {
  std::ostream& err = ctx.err ? *ctx.err : std::cerr;
  CLI::App app{"VTON evaluation engine"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> given;
  std::map<std::string, bool> switched;
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_option("--set", assignments, "override a config key (key=value), repeatable");
  const std::vector<FlagSpec> global_flags = {{"--seed", "seed", "random seed"},
                                              {"--workers", "workers", "worker threads"}};
  const std::vector<FlagSpec> global_switches = {
      {"--allow-partial", "allow_partial", "exit 0 despite incomplete coverage"},
      {"--force", "force", "recompute pairs already in the store"}};
  for (const auto& f : global_flags) app.add_option(f.flag, given[f.key], f.help);
  for (const auto& f : global_switches) app.add_flag(f.flag, switched[f.key], f.help);

  const auto table = commands();
  std::map<std::string, const Command*> by_name;
  for (const auto& c : table) {
    auto* sub = app.add_subcommand(c.name, c.help);
    by_name[c.name] = &c;
    for (const auto& f : c.flags) sub->add_option(f.flag, given[f.key], f.help);
    for (const auto& f : c.switches) sub->add_flag(f.flag, switched[f.key], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, ctx.out ? *ctx.out : std::cout, err);
  }

  try {
    if (!config_file.empty()) ctx.config.merge_file(config_file);
    for (const auto& a : assignments) ctx.config.set_assignment(a);
    for (const auto& [key, value] : given) {
      if (!value.empty()) ctx.config.set(key, value);
    }
    for (const auto& [key, on] : switched) {
      if (on) ctx.config.set(key, "true");
    }
    const auto* sub = app.get_subcommands().front();
    return by_name.at(sub->get_name())->run(ctx);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace vton::cli
