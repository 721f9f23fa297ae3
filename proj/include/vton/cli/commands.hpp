#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vton/cli/config.hpp"
#include "vton/cli/store.hpp"
#include "vton/morphology.hpp"
#include "vton/vlm/client.hpp"

namespace vton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitIncomplete = 2;

struct Context {
  Config config;
  std::ostream* out = nullptr;  // null: std::cout
  std::ostream* err = nullptr;  // null: std::cerr
  /// Replaces the HTTP transport for caption/judge (tests, offline runs).
  vlm::Transport* transport = nullptr;
};

/// Each command returns an exit code: 0 ok, 2 incomplete coverage (unless
/// allow_partial), and throws vton::Error on hard failures.
int cmd_curate(Context& ctx);
int cmd_caption(Context& ctx);
int cmd_judge(Context& ctx);
int cmd_rep_eval(Context& ctx);
int cmd_pixel_eval(Context& ctx);
int cmd_fid(Context& ctx);
int cmd_meta_eval(Context& ctx);
int cmd_report(Context& ctx);
int cmd_serve_study(Context& ctx);
int cmd_export_study(Context& ctx);

/// Parses "square<N>" into an N x N element.
morphology::StructuringElement parse_element(const std::string& name);

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Method aggregates from the store, with human means merged in when
/// paths.ratings is set.
AggregateBuild load_aggregates(const Context& ctx, std::size_t* incomplete_human = nullptr);

/// Table-4-style correlations at the configured level ("method" or "sample").
CorrelationReport compute_correlations(const Context& ctx, std::size_t* incomplete_human = nullptr);

/// Full command-line entry point (CLI11). Catches vton::Error and returns 1.
int run_cli(int argc, const char* const* argv, Context ctx = {});

}  // namespace vton::cli
