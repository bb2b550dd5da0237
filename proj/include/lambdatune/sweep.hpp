#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "lambdatune/bd_metrics.hpp"
#include "lambdatune/encoder_bridge.hpp"
#include "lambdatune/rd_curve.hpp"
#include "lambdatune/scalar_opt.hpp"

namespace lambdatune {

struct SweepConfig {
  Codec codec = Codec::AV1;
  FrameGroup group = FrameGroup::AllFrames;
  Scope scope = Scope::Top;
  std::vector<int> qp_ladder;
  // Concurrent encodes per sweep; one per RD point by default.
  int workers = 5;
  // Empty disables the persistent cache and the ledger.
  std::filesystem::path cache_dir;
  BdOptions bd;

  // AV1 {27,39,49,59,63}; HEVC {22,27,32,37,42}.
  static std::vector<int> default_ladder(Codec codec);
  static SweepConfig defaults(Codec codec, FrameGroup group, Scope scope);

  void validate() const;
};

// Stable SHA-256 key over the clip identity, codec, qp, k on the 1e-6
// grid, group, scope and the backend's template digest.
std::string cache_key(const EncodeJob& job, std::string_view template_digest);

// Persistent RD-point store: one small JSON file per cache key.
class PointCache {
 public:
  // Empty directory keeps entries in memory only.
  explicit PointCache(std::filesystem::path dir = {});

  std::optional<RDPoint> get(const std::string& key);
  void put(const std::string& key, const RDPoint& point);

  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, RDPoint> memory_;
};

struct LedgerRecord {
  std::string timestamp;
  std::string run_id;
  std::string cache_key;
  std::string clip;
  Codec codec = Codec::AV1;
  int qp = 0;
  double k = 1.0;
  FrameGroup group = FrameGroup::AllFrames;
  Scope scope = Scope::Top;
  double bitrate_kbps = 0.0;
  double msssim = 0.0;
  double msssim_db = 0.0;
  std::optional<double> vmaf;
  double invocation_seconds = 0.0;
  bool cached = false;

  RDPoint point() const;
};

// Append-only JSON Lines log of every completed encode (or cache hit).
class RunLedger {
 public:
  // Empty path discards records.
  explicit RunLedger(std::filesystem::path path = {});

  void append(const LedgerRecord& record);
  const std::filesystem::path& path() const { return path_; }

  static std::vector<LedgerRecord> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct SweepOutcome {
  RDCurve curve;
  int invocations = 0;
  int cache_hits = 0;
};

struct TrialRecord {
  double k = 1.0;
  RDCurve curve;
  double cost = 0.0;
  int encoder_invocations = 0;
};

enum class OptimizationStatus { Converged, MaxIterations, BracketFailed, Aborted };

std::string_view to_string(OptimizationStatus status);
OptimizationStatus parse_status(std::string_view text);

struct OptimizeOptions {
  double k_min = 1.0 / 16.0;
  double k_max = 16.0;
  // Bracket seeds, as k values.
  double seed_lo = 0.5;
  double seed_hi = 1.0;
  int max_expansions = 20;
};

struct OptimizationResult {
  std::string clip_id;
  Codec codec = Codec::AV1;
  FrameGroup group = FrameGroup::AllFrames;
  Scope scope = Scope::Top;
  std::string run_id;
  std::vector<int> qp_ladder;

  double k_hat = 1.0;
  double bd_rate = 0.0;
  // Distinct cost evaluations away from k = 1 (each one a full sweep).
  int iterations = 0;
  RDCurve reference;
  std::vector<TrialRecord> trials;

  int rd2_qp = 0;
  double rd2_savings = 0.0;
  double mean_savings = 0.0;
  double msssim_change_db = 0.0;
  std::optional<double> vmaf_change;

  // Encodes spent on trials (deduplicated), on the k = 1 reference, and the
  // count a non-memoizing optimizer would have spent on trials.
  int total_invocations = 0;
  int reference_invocations = 0;
  int raw_invocations = 0;

  // k values whose sweep yielded no curve (infeasible, or a failed trial)
  // and the encodes spent on them; the encodes count toward the total.
  std::vector<double> discarded_k;
  int discarded_invocations = 0;

  int optimizer_iterations = 0;
  bool improved = false;
  OptimizationStatus status = OptimizationStatus::Converged;
  OptimizerConfig optimizer;

  const RDCurve& best_curve() const;
};

struct InvocationBudget {
  std::int64_t iterations;  // P
  std::int64_t qp_points;   // N
  std::int64_t clips;       // M
};

std::int64_t predict_budget(const InvocationBudget& budget);

// Runs RD sweeps against a backend with caching, ledgering and bounded
// parallelism, and optimizes k per clip.
class Orchestrator {
 public:
  // `global_slots`, when given, caps concurrent encodes across every
  // orchestrator sharing it.
  Orchestrator(EncoderBackend& backend, SweepConfig config,
               std::counting_semaphore<>* global_slots = nullptr);

  SweepOutcome run_sweep(const std::string& clip_id, double k);

  TrialRecord evaluate_cost(const std::string& clip_id, double k, const RDCurve& reference);

  OptimizationResult optimize_clip(const std::string& clip_id, const OptimizerConfig& optimizer,
                                   const OptimizeOptions& options = {});

  const SweepConfig& config() const { return config_; }
  const std::string& run_id() const { return run_id_; }
  std::size_t backend_invocations() const { return invocations_.load(); }
  std::filesystem::path ledger_path() const { return ledger_.path(); }

 private:
  EncodeJob make_job(const std::string& clip_id, int qp, double k) const;

  EncoderBackend& backend_;
  SweepConfig config_;
  std::counting_semaphore<>* global_slots_;
  PointCache cache_;
  RunLedger ledger_;
  std::string run_id_;
  std::atomic<std::size_t> invocations_{0};
};

// Fills the summary fields of a result (k_hat, bd_rate, savings, quality
// changes, counters) from its reference curve and trials.
void finalize_result(OptimizationResult& result, const BdOptions& bd);

// Rebuilds a result from ledger records of its run alone.
OptimizationResult replay_result(const std::vector<LedgerRecord>& ledger,
                                 const OptimizationResult& stored, const BdOptions& bd = {});

}  // namespace lambdatune
