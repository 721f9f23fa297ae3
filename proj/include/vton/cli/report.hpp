#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vton/core/types.hpp"

namespace vton::cli {

enum class Better { kNone, kHigher, kLower };

struct Table {
  std::string title;
  std::vector<std::string> header;  // first entry labels the row column
  std::vector<Better> direction;    // one per value column
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> cells;
  int precision = 3;
};

/// Plain CSV; missing cells are empty, +inf is written as "inf".
std::string render_csv(const Table& table);
/// Aligned text; best value per column in **bold**, second best _underlined_.
std::string render_text(const Table& table);

/// Index of the best and second-best row for a column, by direction.
std::pair<std::optional<std::size_t>, std::optional<std::size_t>> best_two(const Table& table,
                                                                           std::size_t column);

/// Five VLM dimensions + s_avg, each with VLM and Human sub-columns.
Table semantic_table(std::span<const MethodAggregate> methods);
/// S_global, S_rep^(k), S̄_rep, S̄.
Table representation_table(std::span<const MethodAggregate> methods, int levels);
/// PSNR, SSIM, LPIPS, FID.
Table pixel_table(std::span<const MethodAggregate> methods);
/// ρ_s, ρ_k, ρ_p per metric.
Table correlation_table(const CorrelationReport& report);

}  // namespace vton::cli
