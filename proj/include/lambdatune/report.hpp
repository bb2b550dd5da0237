#pragma once

#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "lambdatune/sweep.hpp"

namespace lambdatune {

struct Grouping {
  Codec codec;
  Scope scope;
  FrameGroup group;

  auto tie() const { return std::tuple(codec, scope, group); }
  friend bool operator<(const Grouping& a, const Grouping& b) { return a.tie() < b.tie(); }
  friend bool operator==(const Grouping& a, const Grouping& b) { return a.tie() == b.tie(); }
};

// One line of the per-grouping summary. Negative BD-Rate and savings are
// better; max_bdr is the most negative clip, min_bdr the least negative.
struct SummaryRow {
  Grouping grouping;
  int clips = 0;
  double avg_k_hat = 0.0;
  double avg_bdr = 0.0;
  double max_bdr = 0.0;
  double min_bdr = 0.0;
  double avg_iters = 0.0;
  double avg_bitrate_savings = 0.0;
  double avg_rd2_savings = 0.0;
  double avg_msssim_change_db = 0.0;
  // Absent when no clip in the group has VMAF scores.
  std::optional<double> avg_vmaf_change;
};

// Rows ordered by (codec, scope, group). With `requested` empty every
// grouping present in `results` gets a row; otherwise only the requested
// ones, and requested groupings without results are skipped with a warning.
std::vector<SummaryRow> summarize(std::span<const OptimizationResult> results,
                                  std::span<const Grouping> requested = {});

std::string format_summary_text(std::span<const SummaryRow> rows);
std::string format_summary_csv(std::span<const SummaryRow> rows);

}  // namespace lambdatune
