#include "vton/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace vton::cli {
namespace {

std::string format_value(const std::optional<double>& v, int precision) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::pair<std::optional<std::size_t>, std::optional<std::size_t>> best_two(const Table& table,
                                                                           std::size_t column) {
  const auto dir = table.direction.at(column);
  if (dir == Better::kNone) return {};
  std::vector<std::pair<double, std::size_t>> present;
  for (std::size_t r = 0; r < table.cells.size(); ++r) {
    if (const auto& v = table.cells[r][column]) present.emplace_back(dir == Better::kHigher ? -*v : *v, r);
  }
  std::stable_sort(present.begin(), present.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::pair<std::optional<std::size_t>, std::optional<std::size_t>> out;
  if (!present.empty()) out.first = present[0].second;
  if (present.size() > 1) out.second = present[1].second;
  return out;
}

std::string render_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    os << (i ? "," : "") << csv_escape(table.header[i]);
  }
  os << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    os << csv_escape(table.rows[r]);
    for (const auto& cell : table.cells[r]) os << ',' << format_value(cell, table.precision);
    os << '\n';
  }
  return os.str();
}

std::string render_text(const Table& table) {
  const std::size_t columns = table.header.size();
  std::vector<std::vector<std::string>> grid;
  grid.push_back(table.header);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> line{table.rows[r]};
    for (std::size_t c = 0; c < table.cells[r].size(); ++c) {
      auto text = format_value(table.cells[r][c], table.precision);
      if (text.empty()) text = "-";
      const auto [best, second] = best_two(table, c);
      // Equal values share the mark.
      auto same_as = [&](const std::optional<std::size_t>& row) {
        return row && table.cells[*row][c] && table.cells[r][c] &&
               format_value(table.cells[*row][c], table.precision) == text;
      };
      if (same_as(best)) {
        text = "**" + text + "**";
      } else if (same_as(second)) {
        text = "_" + text + "_";
      }
      line.push_back(text);
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(columns, 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < columns && c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::ostringstream os;
  if (!table.title.empty()) os << table.title << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < columns; ++c) {
      const auto& cell = c < grid[i].size() ? grid[i][c] : std::string();
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(widths[c])) << cell;
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(widths[c])) << cell;
      }
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

Table semantic_table(std::span<const MethodAggregate> methods) {
  Table t;
  t.title = "Semantic evaluation (VLM and human, scale 1-5)";
  t.header = {"Method"};
  for (int d = 0; d <= kVlmDimensions; ++d) {
    const std::string name = d < kVlmDimensions ? kDimensionNames[d] : "s_avg";
    t.header.push_back(name + " VLM");
    t.header.push_back(name + " Human");
    t.direction.push_back(Better::kHigher);
    t.direction.push_back(Better::kHigher);
  }
  for (const auto& m : methods) {
    t.rows.push_back(m.method_id);
    std::vector<std::optional<double>> row;
    for (int d = 0; d <= kVlmDimensions; ++d) {
      row.push_back(m.vlm ? std::optional((*m.vlm)[d]) : std::nullopt);
      row.push_back(m.human ? std::optional((*m.human)[d]) : std::nullopt);
    }
    t.cells.push_back(std::move(row));
  }
  return t;
}

Table representation_table(std::span<const MethodAggregate> methods, int levels) {
  Table t;
  t.title = "Representation-based similarity";
  t.header = {"Method", "S_global"};
  for (int k = 0; k < levels; ++k) t.header.push_back("S_rep^(" + std::to_string(k) + ")");
  t.header.push_back("S_bar_rep");
  t.header.push_back("S_bar");
  t.direction.assign(t.header.size() - 1, Better::kHigher);
  for (const auto& m : methods) {
    t.rows.push_back(m.method_id);
    std::vector<std::optional<double>> row;
    if (m.rep) {
      row.push_back(m.rep->s_global);
      for (int k = 0; k < levels; ++k) {
        row.push_back(k < static_cast<int>(m.rep->s_rep.size()) ? m.rep->s_rep[k] : std::nullopt);
      }
      row.push_back(m.rep->s_rep_mean);
      row.push_back(m.rep->s_overall);
    } else {
      row.assign(t.header.size() - 1, std::nullopt);
    }
    t.cells.push_back(std::move(row));
  }
  return t;
}

Table pixel_table(std::span<const MethodAggregate> methods) {
  Table t;
  t.title = "Pixel-based evaluation";
  t.header = {"Method", "PSNR", "SSIM", "LPIPS", "FID"};
  t.direction = {Better::kHigher, Better::kHigher, Better::kLower, Better::kLower};
  for (const auto& m : methods) {
    t.rows.push_back(m.method_id);
    t.cells.push_back({m.psnr, m.ssim, m.lpips, m.fid});
  }
  return t;
}

Table correlation_table(const CorrelationReport& report) {
  Table t;
  t.title = "Correlation with human judgment (" + report.human_column + ")";
  t.header = {"Metric", "rho_s", "rho_k", "rho_p", "n"};
  t.direction = {Better::kHigher, Better::kHigher, Better::kHigher, Better::kNone};
  for (const auto& row : report.rows) {
    t.rows.push_back(row.metric);
    t.cells.push_back({row.rho_s, row.rho_k, row.rho_p, static_cast<double>(row.n)});
  }
  return t;
}

}  // namespace vton::cli
