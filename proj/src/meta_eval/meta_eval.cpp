#include "vton/meta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "vton/core/error.hpp"
#include "vton/core/numeric.hpp"

namespace vton::meta {
namespace {

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::kDimensionMismatch, "correlation inputs have different lengths (" +
                                            std::to_string(x.size()) + " vs " +
                                            std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) fail(ErrorCode::kInvalidArgument, "correlation needs at least 3 points");
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

std::int64_t tied_pairs(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Sorts v ascending and returns the number of inversions (strict).
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) + merge_count(v, scratch, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  if (is_constant(x) || is_constant(y)) {
    fail(ErrorCode::kUndefinedCorrelation, "correlation with a constant input is undefined");
  }
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> sxy(x.size()), sxx(x.size()), syy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy[i] = dx * dy;
    sxx[i] = dx * dx;
    syy[i] = dy * dy;
  }
  const double r = pairwise_sum(sxy) / std::sqrt(pairwise_sum(sxx) * pairwise_sum(syy));
  return std::clamp(r, -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t ties_x = tied_pairs(xs);
  std::int64_t ties_xy = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
      const auto t = static_cast<std::int64_t>(j - i);
      ties_xy += t * (t - 1) / 2;
      i = j;
    }
  }
  std::vector<double> scratch(n);
  const std::int64_t discordant = merge_count(ys, scratch, 0, n);
  const std::int64_t ties_y = tied_pairs(ys);  // ys is sorted now

  if (ties_x == total || ties_y == total) {
    fail(ErrorCode::kUndefinedCorrelation, "correlation with a constant input is undefined");
  }
  const std::int64_t c_minus_d = total - ties_x - ties_y + ties_xy - 2 * discordant;
  const double denom =
      std::sqrt(static_cast<double>(total - ties_x)) * std::sqrt(static_cast<double>(total - ties_y));
  return std::clamp(static_cast<double>(c_minus_d) / denom, -1.0, 1.0);
}

std::vector<HumanItemMean> aggregate_human(std::span<const HumanRating> ratings) {
  std::map<std::pair<std::string, std::string>, std::vector<const HumanRating*>> groups;
  for (const auto& r : ratings) {
    r.validate();
    groups[{r.triplet_id, r.method_id}].push_back(&r);
  }
  std::vector<HumanItemMean> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    HumanItemMean item;
    item.triplet_id = key.first;
    item.method_id = key.second;
    item.ratings = members.size();
    item.complete = members.size() >= kMinRatings;
    for (int d = 0; d < kVlmDimensions; ++d) {
      std::vector<double> values;
      values.reserve(members.size());
      for (const auto* m : members) values.push_back(m->scores[d]);
      item.means[d] = mean(values);
    }
    item.means[kVlmDimensions] =
        mean(std::span<const double>(item.means.data(), kVlmDimensions));
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<HumanMethodMean> human_method_means(std::span<const HumanItemMean> items) {
  std::map<std::string, std::vector<const HumanItemMean*>> by_method;
  std::map<std::string, std::size_t> incomplete;
  for (const auto& item : items) {
    if (item.complete) {
      by_method[item.method_id].push_back(&item);
    } else {
      ++incomplete[item.method_id];
      by_method.try_emplace(item.method_id);
    }
  }
  std::vector<HumanMethodMean> out;
  for (const auto& [method, members] : by_method) {
    HumanMethodMean m;
    m.method_id = method;
    m.items = members.size();
    m.incomplete_items = incomplete[method];
    if (members.empty()) continue;
    for (std::size_t d = 0; d < m.means.size(); ++d) {
      std::vector<double> values;
      for (const auto* item : members) values.push_back(item->means[d]);
      m.means[d] = mean(values);
    }
    out.push_back(std::move(m));
  }
  return out;
}

int human_column_index(const std::string& name) {
  for (int d = 0; d < kVlmDimensions; ++d) {
    if (name == kDimensionNames[d]) return d;
  }
  if (name == "s_avg") return kVlmDimensions;
  fail(ErrorCode::kInvalidArgument, "unknown human column '" + name + "'");
}

CorrelationRow correlate_column(const MetricColumn& column) {
  if (column.values.size() != column.human.size()) {
    fail(ErrorCode::kDimensionMismatch, column.name + ": metric and human columns differ in length");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < column.values.size(); ++i) {
    if (!column.values[i] || !std::isfinite(*column.values[i])) continue;
    x.push_back(column.lower_is_better ? -*column.values[i] : *column.values[i]);
    y.push_back(column.human[i]);
  }
  CorrelationRow row;
  row.metric = column.lower_is_better ? "-" + column.name : column.name;
  row.n = x.size();
  row.rho_s = spearman(x, y);
  row.rho_k = kendall_tau(x, y);
  row.rho_p = pearson(x, y);
  return row;
}

CorrelationReport correlate_all(std::span<const MethodAggregate> aggregates,
                                const std::string& human_column) {
  const int human_index = human_column_index(human_column);
  for (const auto& a : aggregates) {
    if (!a.human) fail(ErrorCode::kNoResults, "method '" + a.method_id + "' has no human scores");
  }
  auto human_values = [&](int index) {
    std::vector<double> h;
    for (const auto& a : aggregates) h.push_back((*a.human)[index]);
    return h;
  };
  auto column = [&](const std::string& name, auto getter, bool lower, int index) {
    MetricColumn c{name, {}, human_values(index), lower};
    for (const auto& a : aggregates) c.values.push_back(getter(a));
    return c;
  };
  using Opt = std::optional<double>;

  std::vector<MetricColumn> columns;
  columns.push_back(column("s_avg (VLM)", [](const MethodAggregate& a) -> Opt {
    return a.vlm ? Opt((*a.vlm)[kVlmDimensions]) : std::nullopt;
  }, false, human_index));
  columns.push_back(column("S_bar (Rep)", [](const MethodAggregate& a) -> Opt {
    return a.rep ? a.rep->s_overall : std::nullopt;
  }, false, human_index));
  columns.push_back(column("PSNR", [](const MethodAggregate& a) { return a.psnr; }, false, human_index));
  columns.push_back(column("SSIM", [](const MethodAggregate& a) { return a.ssim; }, false, human_index));
  columns.push_back(column("LPIPS", [](const MethodAggregate& a) { return a.lpips; }, true, human_index));
  columns.push_back(column("FID", [](const MethodAggregate& a) { return a.fid; }, true, human_index));
  for (int d = 0; d < kVlmDimensions; ++d) {
    columns.push_back(column(std::string(kDimensionNames[d]) + " (VLM)", [d](const MethodAggregate& a) -> Opt {
      return a.vlm ? Opt((*a.vlm)[d]) : std::nullopt;
    }, false, d));
  }
  columns.push_back(column("S_global", [](const MethodAggregate& a) -> Opt {
    return a.rep ? Opt(a.rep->s_global) : std::nullopt;
  }, false, human_index));
  std::size_t levels = 0;
  for (const auto& a : aggregates) {
    if (a.rep) levels = std::max(levels, a.rep->s_rep.size());
  }
  for (std::size_t k = 0; k < levels; ++k) {
    columns.push_back(column("S_rep^(" + std::to_string(k) + ")", [k](const MethodAggregate& a) -> Opt {
      return a.rep && k < a.rep->s_rep.size() ? a.rep->s_rep[k] : std::nullopt;
    }, false, human_index));
  }
  columns.push_back(column("S_bar_rep", [](const MethodAggregate& a) -> Opt {
    return a.rep ? a.rep->s_rep_mean : std::nullopt;
  }, false, human_index));

  CorrelationReport report;
  report.human_column = human_column;
  for (const auto& c : columns) {
    // Method-level rows need every method present.
    if (std::any_of(c.values.begin(), c.values.end(), [](const Opt& v) { return !v; })) continue;
    try {
      report.rows.push_back(correlate_column(c));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUndefinedCorrelation && e.code() != ErrorCode::kInvalidArgument) throw;
    }
  }
  return report;
}

}  // namespace vton::meta
