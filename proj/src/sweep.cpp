#include "lambdatune/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "lambdatune/errors.hpp"
#include "lambdatune/log.hpp"
#include "lambdatune/serialization.hpp"

namespace lambdatune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)),
                     static_cast<int>(ms));
}

std::string new_run_id() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  return fmt::format("{:016x}", dist(rd));
}

struct AbortOptimization {
  std::string reason;
};

}  // namespace

std::vector<int> SweepConfig::default_ladder(Codec codec) {
  if (codec == Codec::AV1) return {27, 39, 49, 59, 63};
  return {22, 27, 32, 37, 42};
}

SweepConfig SweepConfig::defaults(Codec codec, FrameGroup group, Scope scope) {
  SweepConfig config;
  config.codec = codec;
  config.group = group;
  config.scope = scope;
  config.qp_ladder = default_ladder(codec);
  return config;
}

void SweepConfig::validate() const {
  if (qp_ladder.empty()) throw ConfigError("QP ladder is empty");
  for (std::size_t i = 0; i < qp_ladder.size(); ++i) {
    require_qp(codec, qp_ladder[i]);
    if (i > 0 && !(qp_ladder[i] > qp_ladder[i - 1])) {
      throw ConfigError("QP ladder must be strictly ascending");
    }
  }
  if (workers < 1) throw ConfigError(fmt::format("workers must be >= 1, got {}", workers));
  if (!is_valid_group(codec, group)) {
    throw ConfigError(fmt::format("frame group {} is not defined for {}", to_string(group),
                                  to_string(codec)));
  }
}

std::string cache_key(const EncodeJob& job, std::string_view template_digest) {
  const auto k_grid = static_cast<long long>(std::llround(job.k.value() * 1e6));
  const std::string canonical = fmt::format(
      "clip={}\nidentity={}\ncodec={}\nqp={}\nk_e6={}\ngroup={}\nscope={}\ntemplate={}\n",
      job.clip_id, job.clip_identity, to_string(job.codec), job.qp, k_grid, to_string(job.group),
      to_string(job.scope), template_digest);
  return sha256_hex(canonical);
}

PointCache::PointCache(fs::path dir) : dir_(std::move(dir)) {}

fs::path PointCache::path_for(const std::string& key) const {
  return dir_ / "points" / key.substr(0, 2) / (key + ".json");
}

std::optional<RDPoint> PointCache::get(const std::string& key) {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (dir_.empty()) return std::nullopt;
  const fs::path path = path_for(key);
  if (!fs::exists(path)) return std::nullopt;
  try {
    auto point = read_json_file(path).get<RDPoint>();
    memory_.emplace(key, point);
    return point;
  } catch (const std::exception& e) {
    log_warning(fmt::format("ignoring unreadable cache entry '{}': {}", path.string(), e.what()));
    return std::nullopt;
  }
}

void PointCache::put(const std::string& key, const RDPoint& point) {
  std::lock_guard lock(mutex_);
  memory_.insert_or_assign(key, point);
  if (dir_.empty()) return;
  const fs::path path = path_for(key);
  const fs::path tmp = path.string() + ".tmp";
  write_json_file(tmp, json(point));
  fs::rename(tmp, path);
}

RDPoint LedgerRecord::point() const {
  RDPoint p;
  p.qp = qp;
  p.bitrate_kbps = bitrate_kbps;
  p.msssim = msssim;
  p.msssim_db = msssim_db;
  p.vmaf = vmaf;
  return p;
}

RunLedger::RunLedger(fs::path path) : path_(std::move(path)) {}

void RunLedger::append(const LedgerRecord& record) {
  if (path_.empty()) return;
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError(fmt::format("cannot append to ledger '{}'", path_.string()));
  out << json(record).dump() << '\n';
}

std::vector<LedgerRecord> RunLedger::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open ledger '{}'", path.string()));
  std::vector<LedgerRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line).get<LedgerRecord>());
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("ledger '{}' line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return records;
}

std::string_view to_string(OptimizationStatus status) {
  switch (status) {
    case OptimizationStatus::Converged: return "converged";
    case OptimizationStatus::MaxIterations: return "max_iterations";
    case OptimizationStatus::BracketFailed: return "bracket_failed";
    case OptimizationStatus::Aborted: return "aborted";
  }
  return "?";
}

OptimizationStatus parse_status(std::string_view text) {
  for (auto s : {OptimizationStatus::Converged, OptimizationStatus::MaxIterations,
                 OptimizationStatus::BracketFailed, OptimizationStatus::Aborted}) {
    if (text == to_string(s)) return s;
  }
  throw SchemaError(fmt::format("unknown optimization status '{}'", text));
}

const RDCurve& OptimizationResult::best_curve() const {
  for (const auto& t : trials) {
    if (t.k == k_hat) return t.curve;
  }
  return reference;
}

std::int64_t predict_budget(const InvocationBudget& budget) {
  if (budget.iterations < 1 || budget.qp_points < 1 || budget.clips < 1) {
    throw DomainError("invocation budget fields must be positive");
  }
  return budget.iterations * budget.qp_points * budget.clips;
}

Orchestrator::Orchestrator(EncoderBackend& backend, SweepConfig config,
                           std::counting_semaphore<>* global_slots)
    : backend_(backend),
      config_(std::move(config)),
      global_slots_(global_slots),
      cache_(config_.cache_dir),
      ledger_(config_.cache_dir.empty() ? fs::path() : config_.cache_dir / "ledger.jsonl"),
      run_id_(new_run_id()) {
  config_.validate();
}

EncodeJob Orchestrator::make_job(const std::string& clip_id, int qp, double k) const {
  EncodeJob job(clip_id, config_.codec, qp, ScaleFactor(k), config_.group, config_.scope);
  job.input_path = backend_.input_path(clip_id);
  return job;
}

SweepOutcome Orchestrator::run_sweep(const std::string& clip_id, double k) {
  const double kq = quantize_k(k);
  const std::string identity = backend_.clip_identity(clip_id);
  const std::string digest = backend_.template_digest();
  const fs::path work_root =
      (config_.cache_dir.empty() ? fs::temp_directory_path() / "lambdatune-work"
                                 : config_.cache_dir / "work") /
      clip_id;

  const std::size_t n = config_.qp_ladder.size();
  std::vector<EncodeJob> jobs;
  std::vector<std::string> keys;
  std::vector<std::optional<RDPoint>> points(n);
  std::vector<std::string> errors(n);
  std::vector<char> domain_errors(n, 0);
  std::vector<std::size_t> pending;
  jobs.reserve(n);

  const auto record_for = [&](const EncodeJob& job, const std::string& key, const RDPoint& p,
                              double seconds, bool cached) {
    LedgerRecord r;
    r.timestamp = utc_timestamp();
    r.run_id = run_id_;
    r.cache_key = key;
    r.clip = clip_id;
    r.codec = job.codec;
    r.qp = job.qp;
    r.k = kq;
    r.group = job.group;
    r.scope = job.scope;
    r.bitrate_kbps = p.bitrate_kbps;
    r.msssim = p.msssim;
    r.msssim_db = p.msssim_db;
    r.vmaf = p.vmaf;
    r.invocation_seconds = seconds;
    r.cached = cached;
    return r;
  };

  for (std::size_t i = 0; i < n; ++i) {
    jobs.push_back(make_job(clip_id, config_.qp_ladder[i], kq));
    jobs.back().clip_identity = identity;
    keys.push_back(cache_key(jobs.back(), digest));
    jobs.back().work_dir = work_root / keys.back().substr(0, 16);
    if (auto hit = cache_.get(keys.back())) {
      points[i] = *hit;
      ledger_.append(record_for(jobs[i], keys[i], *hit, 0.0, true));
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> completed{0};
  const auto worker = [&] {
    for (std::size_t slot = next++; slot < pending.size(); slot = next++) {
      const std::size_t i = pending[slot];
      if (global_slots_) global_slots_->acquire();
      const auto start = std::chrono::steady_clock::now();
      try {
        RDPoint p = backend_.encode(jobs[i]);
        if (global_slots_) global_slots_->release();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ++invocations_;
        ++completed;
        cache_.put(keys[i], p);
        ledger_.append(record_for(jobs[i], keys[i], p, seconds, false));
        points[i] = std::move(p);
      } catch (const DomainError& e) {
        if (global_slots_) global_slots_->release();
        errors[i] = e.what();
        domain_errors[i] = 1;
      } catch (const std::exception& e) {
        if (global_slots_) global_slots_->release();
        errors[i] = e.what();
      }
    }
  };

  const std::size_t thread_count =
      std::min(pending.size(), static_cast<std::size_t>(config_.workers));
  if (thread_count == 1) {
    worker();
  } else if (thread_count > 1) {
    std::vector<std::jthread> threads;
    threads.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);
  }

  bool infeasible = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i] && !domain_errors[i]) infeasible = false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i]) {
      throw SweepError(fmt::format("sweep of clip '{}' failed at qp {} k {}: {}", clip_id,
                                   config_.qp_ladder[i], format_k(kq), errors[i]),
                       config_.qp_ladder[i], kq, completed.load(), infeasible);
    }
  }

  CurveKey key{clip_id, config_.codec, kq, config_.group, config_.scope};
  std::vector<RDPoint> collected;
  collected.reserve(n);
  for (auto& p : points) collected.push_back(std::move(*p));

  SweepOutcome outcome;
  outcome.curve = RDCurve(std::move(key), std::move(collected));
  outcome.invocations = completed.load();
  outcome.cache_hits = static_cast<int>(n - pending.size());
  return outcome;
}

TrialRecord Orchestrator::evaluate_cost(const std::string& clip_id, double k,
                                        const RDCurve& reference) {
  const double kq = quantize_k(k);
  if (kq == 1.0) return TrialRecord{1.0, reference, 0.0, 0};
  auto sweep = run_sweep(clip_id, kq);
  TrialRecord trial;
  trial.k = kq;
  trial.cost = bd_rate(reference, sweep.curve, config_.bd);
  trial.curve = std::move(sweep.curve);
  trial.encoder_invocations = sweep.invocations;
  return trial;
}

OptimizationResult Orchestrator::optimize_clip(const std::string& clip_id,
                                               const OptimizerConfig& optimizer,
                                               const OptimizeOptions& options) {
  optimizer.validate();
  if (!(options.k_min > 0.0 && options.k_min < 1.0 && options.k_max > 1.0)) {
    throw ConfigError("k search domain must contain 1");
  }

  OptimizationResult result;
  result.clip_id = clip_id;
  result.codec = config_.codec;
  result.group = config_.group;
  result.scope = config_.scope;
  result.run_id = run_id_;
  result.qp_ladder = config_.qp_ladder;
  result.optimizer = optimizer;

  auto reference = run_sweep(clip_id, 1.0);
  result.reference = reference.curve;
  result.reference_invocations = reference.invocations;

  const bool log_domain = optimizer.domain == SearchDomain::Logarithmic;
  const auto to_x = [&](double k) { return log_domain ? std::log(k) : k; };
  const auto to_k = [&](double x) { return log_domain ? std::exp(x) : x; };

  std::map<double, std::size_t> by_k;
  int raw_calls = 0;

  const Objective cost = [&](double x) -> double {
    const double k = quantize_k(to_k(x));
    if (k == 1.0) return 0.0;
    if (auto it = by_k.find(k); it != by_k.end()) return result.trials[it->second].cost;
    int spent = 0;
    for (int attempt = 0;; ++attempt) {
      try {
        TrialRecord trial = evaluate_cost(clip_id, k, result.reference);
        trial.encoder_invocations += spent;
        by_k.emplace(k, result.trials.size());
        result.trials.push_back(std::move(trial));
        return result.trials.back().cost;
      } catch (const Error& e) {
        const auto* sweep = dynamic_cast<const SweepError*>(&e);
        if (sweep) spent += sweep->completed();
        if (sweep && sweep->infeasible()) {
          log_info(fmt::format("clip '{}': k={} is infeasible: {}", clip_id, format_k(k), e.what()));
          result.discarded_k.push_back(k);
          result.discarded_invocations += spent;
          return std::numeric_limits<double>::infinity();
        }
        if (attempt >= 1) {
          result.discarded_k.push_back(k);
          result.discarded_invocations += spent;
          throw AbortOptimization{e.what()};
        }
        log_warning(fmt::format("clip '{}': trial k={} failed, retrying: {}", clip_id,
                                format_k(k), e.what()));
      }
    }
  };
  MemoizedObjective memo(cost);
  const Objective counted = [&](double x) {
    if (quantize_k(to_k(x)) != 1.0) ++raw_calls;
    return memo(x);
  };

  try {
    const auto bracket =
        bracket_minimum(counted, to_x(options.seed_lo), to_x(options.seed_hi),
                        options.max_expansions, {to_x(options.k_min), to_x(options.k_max)});
    const auto minimum = brent_minimize(counted, bracket, optimizer);
    result.optimizer_iterations = minimum.trace.iterations;
    result.status = minimum.trace.converged ? OptimizationStatus::Converged
                                            : OptimizationStatus::MaxIterations;
  } catch (const BracketError& e) {
    log_warning(fmt::format("clip '{}': {}; keeping the best evaluated k", clip_id, e.what()));
    result.status = OptimizationStatus::BracketFailed;
  } catch (const AbortOptimization& abort) {
    log_warning(fmt::format("clip '{}': optimization aborted: {}", clip_id, abort.reason));
    result.status = OptimizationStatus::Aborted;
  }

  result.raw_invocations = raw_calls * static_cast<int>(config_.qp_ladder.size());
  finalize_result(result, config_.bd);
  return result;
}

void finalize_result(OptimizationResult& result, const BdOptions& bd) {
  double best_k = 1.0;
  double best_cost = 0.0;
  int total = result.discarded_invocations;
  for (const auto& trial : result.trials) {
    total += trial.encoder_invocations;
    if (trial.cost < best_cost) {
      best_cost = trial.cost;
      best_k = trial.k;
    }
  }
  result.k_hat = best_k;
  result.bd_rate = best_cost;
  result.improved = best_k != 1.0;
  result.iterations = static_cast<int>(result.trials.size());
  result.total_invocations = total;

  const auto& ladder = result.qp_ladder;
  if (ladder.empty()) throw ConfigError("result has no QP ladder");
  result.rd2_qp = ladder.size() >= 2 ? ladder[1] : ladder[0];

  const RDCurve& best = result.best_curve();
  result.rd2_savings = matched_qp_savings(result.reference, best, result.rd2_qp);
  result.mean_savings = mean_matched_savings(result.reference, best);
  result.msssim_change_db = bd_quality(result.reference, best, bd);
  result.vmaf_change = bd_vmaf(result.reference, best, bd);
}

OptimizationResult replay_result(const std::vector<LedgerRecord>& ledger,
                                 const OptimizationResult& stored, const BdOptions& bd) {
  std::vector<double> order;
  std::map<double, std::map<int, RDPoint>> points;
  std::map<double, int> uncached;
  for (const auto& r : ledger) {
    if (r.run_id != stored.run_id || r.clip != stored.clip_id || r.codec != stored.codec ||
        r.group != stored.group || r.scope != stored.scope) {
      continue;
    }
    auto [it, inserted] = points.try_emplace(r.k);
    if (inserted) order.push_back(r.k);
    it->second.try_emplace(r.qp, r.point());
    if (!r.cached) ++uncached[r.k];
  }

  const auto curve_for = [&](double k) -> std::optional<RDCurve> {
    const auto& by_qp = points.at(k);
    std::vector<RDPoint> pts;
    for (int qp : stored.qp_ladder) {
      auto it = by_qp.find(qp);
      if (it == by_qp.end()) return std::nullopt;
      pts.push_back(it->second);
    }
    return RDCurve({stored.clip_id, stored.codec, k, stored.group, stored.scope}, std::move(pts));
  };

  OptimizationResult out;
  out.clip_id = stored.clip_id;
  out.codec = stored.codec;
  out.group = stored.group;
  out.scope = stored.scope;
  out.run_id = stored.run_id;
  out.qp_ladder = stored.qp_ladder;
  out.optimizer = stored.optimizer;
  out.optimizer_iterations = stored.optimizer_iterations;
  out.status = stored.status;
  out.raw_invocations = stored.raw_invocations;
  // Sweeps that failed before any encode finished leave no ledger trace.
  out.discarded_k = stored.discarded_k;

  if (!points.contains(1.0)) {
    throw SchemaError(fmt::format("ledger has no reference sweep for clip '{}' in run {}",
                                  stored.clip_id, stored.run_id));
  }
  auto reference = curve_for(1.0);
  if (!reference) throw SchemaError("ledger reference sweep is incomplete");
  out.reference = std::move(*reference);
  out.reference_invocations = uncached[1.0];

  for (double k : order) {
    if (k == 1.0) continue;
    auto curve = curve_for(k);
    if (!curve) {
      out.discarded_invocations += uncached[k];
      continue;
    }
    TrialRecord trial;
    trial.k = k;
    trial.cost = bd_rate(out.reference, *curve, bd);
    trial.curve = std::move(*curve);
    trial.encoder_invocations = uncached[k];
    out.trials.push_back(std::move(trial));
  }
  finalize_result(out, bd);
  return out;
}

}  // namespace lambdatune
