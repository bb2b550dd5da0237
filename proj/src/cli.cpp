#include "lambdatune/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <semaphore>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "lambdatune/bd_metrics.hpp"
#include "lambdatune/errors.hpp"
#include "lambdatune/log.hpp"
#include "lambdatune/report.hpp"
#include "lambdatune/serialization.hpp"
#include "lambdatune/svg_plot.hpp"
#include "lambdatune/sweep.hpp"
#include "lambdatune/synthetic_model.hpp"

namespace lambdatune {

namespace fs = std::filesystem;

namespace {

struct GlobalFlags {
  std::string manifest;
  std::string codec = "AV1";
  std::vector<int> qps;
  std::string group = "AllFrames";
  std::string scope = "Top";
  std::vector<double> k{1.0};
  int workers = 5;
  std::string cache_dir = ".lambdatune-cache";
  bool no_cache = false;
  std::string encoder_template;
  std::string metric_template;
  std::string synthetic;
  std::string out;
  std::vector<std::string> clips;
  int min_points = 4;
  bool keep_media = false;
  std::string output_extension = "bin";
  bool verbose = false;
};

struct OptimizeFlags {
  double xtol = 0.01;
  int max_iters = 25;
  bool linear = false;
  int jobs = 1;
};

// Carries the stage name to the top-level handler.
struct StageError {
  std::string stage;
  std::string message;
  int code = kExitFailure;
};

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw StageError{stage, e.what(), kExitUsage};
  } catch (const std::exception& e) {
    throw StageError{stage, e.what()};
  }
}

SweepConfig sweep_config(const GlobalFlags& g) {
  SweepConfig config =
      SweepConfig::defaults(parse_codec(g.codec), parse_frame_group(g.group), parse_scope(g.scope));
  if (!g.qps.empty()) config.qp_ladder = g.qps;
  config.workers = g.workers;
  if (!g.no_cache) config.cache_dir = g.cache_dir;
  config.bd.min_points = static_cast<std::size_t>(std::max(g.min_points, 0));
  if (g.min_points < 2) throw ConfigError("--min-points must be at least 2");
  config.validate();
  return config;
}

std::unique_ptr<EncoderBackend> make_backend(const GlobalFlags& g, Codec codec) {
  if (!g.synthetic.empty()) {
    return in_stage("synthetic model", [&]() -> std::unique_ptr<EncoderBackend> {
      return std::make_unique<SyntheticEncoder>(load_synthetic_models(g.synthetic, codec));
    });
  }
  if (g.manifest.empty()) {
    throw StageError{"arguments", "either --synthetic or --manifest is required", kExitUsage};
  }
  auto clips = in_stage("manifest", [&] { return load_manifest(g.manifest); });
  if (g.encoder_template.empty() || g.metric_template.empty()) {
    throw StageError{"arguments",
                     "--encoder-template and --metric-template are required with --manifest",
                     kExitUsage};
  }
  return in_stage("templates", [&]() -> std::unique_ptr<EncoderBackend> {
    ExternalEncoderOptions options;
    options.keep_media = g.keep_media;
    options.output_extension = g.output_extension;
    return std::make_unique<ExternalEncoder>(
        std::move(clips), CommandTemplate(g.encoder_template, g.metric_template), options);
  });
}

std::vector<std::string> selected_clips(const GlobalFlags& g, const EncoderBackend& backend) {
  const auto available = backend.clip_ids();
  if (g.clips.empty()) return available;
  for (const auto& id : g.clips) {
    if (std::find(available.begin(), available.end(), id) == available.end()) {
      throw StageError{"arguments", fmt::format("unknown clip '{}'", id), kExitUsage};
    }
  }
  return g.clips;
}

std::string safe_name(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      c = '_';
    }
  }
  return out;
}

fs::path out_dir(const GlobalFlags& g) { return g.out.empty() ? fs::path(".") : fs::path(g.out); }

int run_sweep_command(const GlobalFlags& g, std::ostream& out) {
  const SweepConfig config = in_stage("arguments", [&] { return sweep_config(g); });
  auto backend = make_backend(g, config.codec);
  const auto clips = selected_clips(g, *backend);
  Orchestrator orchestrator(*backend, config);
  const fs::path dir = out_dir(g);
  for (const auto& clip : clips) {
    for (double k : g.k) {
      if (!(k > 0.0)) throw StageError{"arguments", fmt::format("k must be positive, got {}", k), kExitUsage};
      const auto outcome = in_stage(fmt::format("sweep {} k={}", clip, format_k(k)),
                                    [&] { return orchestrator.run_sweep(clip, k); });
      const fs::path path = dir / fmt::format("{}_k{}.json", safe_name(clip), format_k(k));
      in_stage("write", [&] { write_json_file(path, nlohmann::json(outcome.curve)); });
      out << fmt::format("{} k={}: {} points, {} encodes, {} cached -> {}\n", clip, format_k(k),
                         outcome.curve.points().size(), outcome.invocations, outcome.cache_hits,
                         path.string());
    }
  }
  return kExitOk;
}

int run_optimize_command(const GlobalFlags& g, const OptimizeFlags& o, std::ostream& out,
                         std::ostream& err) {
  const SweepConfig config = in_stage("arguments", [&] { return sweep_config(g); });
  OptimizerConfig optimizer;
  optimizer.xtol = o.xtol;
  optimizer.max_iters = o.max_iters;
  optimizer.domain = o.linear ? SearchDomain::Linear : SearchDomain::Logarithmic;
  in_stage("arguments", [&] { optimizer.validate(); });
  if (o.jobs < 1) throw StageError{"arguments", "--jobs must be at least 1", kExitUsage};

  auto backend = make_backend(g, config.codec);
  const auto clips = selected_clips(g, *backend);
  std::counting_semaphore<> slots(std::max(config.workers, 1));
  Orchestrator orchestrator(*backend, config, o.jobs > 1 ? &slots : nullptr);
  const fs::path dir = out_dir(g);

  std::vector<std::optional<OptimizationResult>> results(clips.size());
  std::vector<std::string> failures(clips.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < clips.size(); i = next++) {
      try {
        results[i] = orchestrator.optimize_clip(clips[i], optimizer);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(o.jobs), clips.size());
    for (std::size_t t = 1; t < n; ++t) threads.emplace_back(worker);
    worker();
  }

  int status = kExitOk;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!results[i]) {
      err << fmt::format("error [optimize {}]: {}\n", clips[i], failures[i]);
      status = kExitFailure;
      continue;
    }
    const auto& r = *results[i];
    const fs::path path =
        dir / fmt::format("{}_{}_{}_{}.json", safe_name(r.clip_id), to_string(r.codec),
                          to_string(r.group), to_string(r.scope));
    in_stage("write", [&] { write_json_file(path, nlohmann::json(r)); });
    out << fmt::format(
        "{}: k_hat={} bd_rate={:.3f}% iterations={} encodes={} status={} -> {}\n", r.clip_id,
        format_k(r.k_hat), r.bd_rate, r.iterations, r.total_invocations, to_string(r.status),
        path.string());
  }
  return status;
}

int run_bdrate_command(const GlobalFlags& g, const std::string& ref, const std::string& test,
                       std::ostream& out) {
  const auto reference = in_stage("load reference", [&] { return load_curve(ref); });
  const auto candidate = in_stage("load test", [&] { return load_curve(test); });
  BdOptions options;
  if (g.min_points < 2) throw StageError{"arguments", "--min-points must be at least 2", kExitUsage};
  options.min_points = static_cast<std::size_t>(g.min_points);
  const double rate = in_stage("bdrate", [&] { return bd_rate(reference, candidate, options); });
  const double quality =
      in_stage("bdrate", [&] { return bd_quality(reference, candidate, options); });
  out << fmt::format("BD-Rate: {:.2f}%\n", rate + 0.0);
  out << fmt::format("BD-MS-SSIM: {:.4f} dB\n", quality + 0.0);
  return kExitOk;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

void emit_text(const GlobalFlags& g, const std::string& text, std::ostream& out) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  const fs::path path(g.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot write '{}'", path.string()));
  file << text;
}

int run_report_command(const GlobalFlags& g, const std::vector<std::string>& inputs,
                       const std::string& format, bool filter, std::ostream& out) {
  const auto files = expand_inputs(inputs);
  if (files.empty()) throw StageError{"arguments", "no results files given", kExitUsage};
  std::vector<OptimizationResult> results;
  for (const auto& file : files) {
    results.push_back(in_stage(fmt::format("load {}", file.string()), [&] { return load_result(file); }));
  }
  std::vector<Grouping> requested;
  if (filter) {
    requested.push_back(in_stage("arguments", [&] {
      return Grouping{parse_codec(g.codec), parse_scope(g.scope), parse_frame_group(g.group)};
    }));
  }
  const auto rows = summarize(results, requested);
  const std::string text = format == "csv" ? format_summary_csv(rows) : format_summary_text(rows);
  in_stage("write", [&] { emit_text(g, text, out); });
  return kExitOk;
}

int run_plot_command(const GlobalFlags& g, const std::vector<std::string>& inputs,
                     const std::string& title, std::ostream& out) {
  if (g.out.empty()) throw StageError{"arguments", "plot needs --out <file.svg>", kExitUsage};
  std::vector<RDCurve> curves;
  for (const auto& input : inputs) {
    curves.push_back(in_stage(fmt::format("load {}", input), [&] { return load_curve(input); }));
  }
  in_stage("plot", [&] { emit_plot(curves, g.out, title); });
  out << fmt::format("wrote {} ({} curves)\n", g.out, curves.size());
  return kExitOk;
}

void add_global_flags(CLI::App& app, GlobalFlags& g) {
  app.add_option("--manifest", g.manifest, "Clip manifest (JSON array)");
  app.add_option("--codec", g.codec, "AV1 or HEVC")->capture_default_str();
  app.add_option("--qps", g.qps, "Comma separated QP ladder")->delimiter(',');
  app.add_option("--group", g.group, "Frame group receiving k")->capture_default_str();
  app.add_option("--scope", g.scope, "Top or Partition")->capture_default_str();
  app.add_option("--k", g.k, "Comma separated scale factors (sweep)")->delimiter(',');
  app.add_option("--workers", g.workers, "Concurrent encodes per sweep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", g.cache_dir, "RD point cache and ledger directory")
      ->capture_default_str();
  app.add_flag("--no-cache", g.no_cache, "Disable the persistent cache and ledger");
  app.add_option("--encoder-template", g.encoder_template, "Encoder command template");
  app.add_option("--metric-template", g.metric_template, "Metric tool command template");
  app.add_option("--synthetic", g.synthetic, "Synthetic model file, or 'default'");
  app.add_option("--out", g.out, "Output directory or file");
  app.add_option("--clip", g.clips, "Restrict to these clip ids");
  app.add_option("--min-points", g.min_points, "Minimum RD points for BD metrics")
      ->capture_default_str();
  app.add_flag("--keep-media", g.keep_media, "Keep encoded bitstreams");
  app.add_option("--output-extension", g.output_extension, "Extension of encoder output files")
      ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Per-clip Lagrange multiplier tuning harness", "lambdatune");
  app.require_subcommand(1);
  GlobalFlags g;
  add_global_flags(app, g);

  OptimizeFlags o;
  std::string ref, test, format = "text", title;
  std::vector<std::string> inputs;
  bool filter = false;

  auto* sweep = app.add_subcommand("sweep", "Encode the QP ladder for each clip and k");
  auto* optimize = app.add_subcommand("optimize", "Find the BD-Rate minimizing k per clip");
  optimize->add_option("--xtol", o.xtol, "Optimizer tolerance on ln k")->capture_default_str();
  optimize->add_option("--max-iters", o.max_iters, "Optimizer iteration cap")->capture_default_str();
  optimize->add_flag("--linear", o.linear, "Search k directly instead of ln k");
  optimize->add_option("--jobs", o.jobs, "Clips optimized concurrently")->capture_default_str();
  auto* bdrate = app.add_subcommand("bdrate", "BD-Rate of a test curve against a reference");
  bdrate->add_option("reference", ref, "Reference curve JSON")->required();
  bdrate->add_option("test", test, "Test curve JSON")->required();
  auto* report = app.add_subcommand("report", "Summarize optimization results");
  report->add_option("results", inputs, "Result files or directories")->required();
  report->add_option("--format", format, "text or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"text", "csv"}));
  report->add_flag("--only", filter, "Only the grouping given by --codec/--scope/--group");
  auto* plot = app.add_subcommand("plot", "Plot RD curves to SVG");
  plot->add_option("curves", inputs, "Curve JSON files")->required();
  plot->add_option("--title", title, "Plot title");
  for (auto* sub : {sweep, optimize, bdrate, report, plot}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (g.verbose) set_log_level(LogLevel::Info);
  try {
    if (*sweep) return run_sweep_command(g, out);
    if (*optimize) return run_optimize_command(g, o, out, err);
    if (*bdrate) return run_bdrate_command(g, ref, test, out);
    if (*report) return run_report_command(g, inputs, format, filter, out);
    if (*plot) return run_plot_command(g, inputs, title, out);
  } catch (const StageError& e) {
    err << fmt::format("error [{}]: {}\n", e.stage, e.message);
    return e.code;
  } catch (const std::exception& e) {
    err << fmt::format("error [internal]: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace lambdatune
