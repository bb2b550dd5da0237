#include "lambdatune/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "lambdatune/log.hpp"

namespace lambdatune {

namespace {

std::string fixed3(double v) {
  // Avoid printing "-0.000".
  if (std::abs(v) < 0.0005) v = 0.0;
  return fmt::format("{:.3f}", v);
}

std::string fixed3(const std::optional<double>& v) { return v ? fixed3(*v) : "n/a"; }

std::vector<std::string> row_cells(const SummaryRow& row) {
  return {std::string(to_string(row.grouping.codec)),
          std::string(to_string(row.grouping.scope)),
          std::string(to_string(row.grouping.group)),
          std::to_string(row.clips),
          fixed3(row.avg_k_hat),
          fixed3(row.avg_bdr),
          fixed3(row.max_bdr),
          fixed3(row.min_bdr),
          fmt::format("{:.1f}", row.avg_iters),
          fixed3(row.avg_bitrate_savings),
          fixed3(row.avg_rd2_savings),
          fixed3(row.avg_msssim_change_db),
          fixed3(row.avg_vmaf_change)};
}

const std::vector<std::string> kColumns = {
    "codec",       "scope",       "group",           "clips",
    "avg_k_hat",   "avg_bdr",     "max_bdr",         "min_bdr",
    "avg_iters",   "avg_savings", "avg_rd2_savings", "avg_msssim_db",
    "avg_vmaf"};

}  // namespace

std::vector<SummaryRow> summarize(std::span<const OptimizationResult> results,
                                  std::span<const Grouping> requested) {
  std::map<Grouping, std::vector<const OptimizationResult*>> groups;
  for (const auto& r : results) groups[{r.codec, r.scope, r.group}].push_back(&r);

  std::vector<Grouping> keys;
  if (requested.empty()) {
    for (const auto& [g, _] : groups) keys.push_back(g);
  } else {
    keys.assign(requested.begin(), requested.end());
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  }

  std::vector<SummaryRow> rows;
  for (const auto& g : keys) {
    auto it = groups.find(g);
    if (it == groups.end() || it->second.empty()) {
      log_warning(fmt::format("no results for {}/{}/{}; row omitted", to_string(g.codec),
                              to_string(g.scope), to_string(g.group)));
      continue;
    }
    const auto& members = it->second;
    SummaryRow row;
    row.grouping = g;
    row.clips = static_cast<int>(members.size());
    row.max_bdr = members.front()->bd_rate;
    row.min_bdr = members.front()->bd_rate;
    double vmaf_sum = 0.0;
    int vmaf_count = 0;
    for (const auto* r : members) {
      row.avg_k_hat += r->k_hat;
      row.avg_bdr += r->bd_rate;
      row.max_bdr = std::min(row.max_bdr, r->bd_rate);
      row.min_bdr = std::max(row.min_bdr, r->bd_rate);
      row.avg_iters += r->iterations;
      row.avg_bitrate_savings += r->mean_savings;
      row.avg_rd2_savings += r->rd2_savings;
      row.avg_msssim_change_db += r->msssim_change_db;
      if (r->vmaf_change) {
        vmaf_sum += *r->vmaf_change;
        ++vmaf_count;
      }
    }
    const double n = static_cast<double>(members.size());
    row.avg_k_hat /= n;
    row.avg_bdr /= n;
    row.avg_iters /= n;
    row.avg_bitrate_savings /= n;
    row.avg_rd2_savings /= n;
    row.avg_msssim_change_db /= n;
    if (vmaf_count > 0) row.avg_vmaf_change = vmaf_sum / vmaf_count;
    rows.push_back(row);
  }
  return rows;
}

std::string format_summary_csv(std::span<const SummaryRow> rows) {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    out += (i ? "," : "") + kColumns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    const auto cells = row_cells(row);
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += '\n';
  }
  return out;
}

std::string format_summary_text(std::span<const SummaryRow> rows) {
  std::vector<std::vector<std::string>> table{kColumns};
  for (const auto& row : rows) table.push_back(row_cells(row));
  std::vector<std::size_t> width(kColumns.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      // Text columns left aligned, numbers right aligned.
      if (i < 3) {
        out += fmt::format("{:<{}}", table[r][i], width[i]);
      } else {
        out += fmt::format("{:>{}}", table[r][i], width[i]);
      }
      out += i + 1 < table[r].size() ? "  " : "";
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  out += "Negative BD-Rate and savings values are better.\n";
  return out;
}

}  // namespace lambdatune
