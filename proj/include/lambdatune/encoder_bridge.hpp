#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lambdatune/lambda_model.hpp"
#include "lambdatune/rd_curve.hpp"

namespace lambdatune {

// One entry of the clip manifest.
struct ClipSpec {
  std::string id;
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  double frame_rate = 0.0;
  std::string pix_fmt;

  double duration_seconds() const { return frame_count / frame_rate; }
};

// JSON array of {id, path, width, height, frame_count, frame_rate, pix_fmt}.
// Relative clip paths resolve against the manifest's directory.
std::vector<ClipSpec> load_manifest(const std::filesystem::path& path);
std::vector<ClipSpec> parse_manifest(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {});

struct EncodeJob {
  EncodeJob(std::string clip_id, Codec codec, int qp, ScaleFactor k, FrameGroup group,
            Scope scope);

  std::string clip_id;
  Codec codec;
  int qp;
  ScaleFactor k;
  FrameGroup group;
  Scope scope;
  std::filesystem::path input_path;
  std::filesystem::path work_dir;
  // Stable content identity of the input; filled by the backend.
  std::string clip_identity;
};

// k rounded to the 1e-6 grid used for cache keys and flags.
double quantize_k(double k);
std::string format_k(double k);

// Argument-vector templates for the external encoder and metric tool.
// Tokens are split on whitespace (single or double quotes group a token);
// placeholders are substituted literally inside tokens and no shell is
// involved.
//
// Encoder placeholders: {input} {output} {qp} {k} {frame_group} {scope}
// Metric placeholders:  {reference} {distorted} {report}
// Both may also use the clip geometry: {width} {height} {frame_count}
// {frame_rate} {pix_fmt}.
class CommandTemplate {
 public:
  CommandTemplate(std::string_view encoder, std::string_view metric);

  std::vector<std::string> render_encoder(const EncodeJob& job, const ClipSpec& clip,
                                          const std::filesystem::path& output) const;
  std::vector<std::string> render_metric(const ClipSpec& clip,
                                         const std::filesystem::path& distorted,
                                         const std::filesystem::path& report) const;

  const std::string& encoder_source() const { return encoder_source_; }
  const std::string& metric_source() const { return metric_source_; }

  // SHA-256 over both templates; part of every cache key.
  std::string digest() const;

 private:
  std::string encoder_source_;
  std::string metric_source_;
  std::vector<std::string> encoder_;
  std::vector<std::string> metric_;
};

std::vector<std::string> split_command(std::string_view text);

struct MetricKeys {
  // JSON pointers into the metric report. Defaults match libvmaf's JSON
  // output with the float_ms_ssim feature enabled.
  std::string msssim = "/pooled_metrics/float_ms_ssim/mean";
  std::string vmaf = "/pooled_metrics/vmaf/mean";
  bool vmaf_required = false;
};

struct MetricReading {
  double msssim = 0.0;
  std::optional<double> vmaf;
};

MetricReading parse_metric_report(std::string_view report, const MetricKeys& keys = {});

// Anything that can turn an EncodeJob into an RD point. Implementations must
// allow concurrent encode() calls for distinct jobs.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual RDPoint encode(const EncodeJob& job) = 0;

  // Identity of the clip's content, folded into cache keys.
  virtual std::string clip_identity(const std::string& clip_id) = 0;

  virtual std::string template_digest() const = 0;

  virtual std::vector<std::string> clip_ids() const = 0;

  virtual std::filesystem::path input_path(const std::string& clip_id) const {
    (void)clip_id;
    return {};
  }
};

struct ExternalEncoderOptions {
  MetricKeys metric_keys;
  std::string output_extension = "bin";
  bool keep_media = false;
};

// Runs a patched encoder and a metric tool as child processes.
class ExternalEncoder final : public EncoderBackend {
 public:
  ExternalEncoder(std::vector<ClipSpec> clips, CommandTemplate templates,
                  ExternalEncoderOptions options = {});

  RDPoint encode(const EncodeJob& job) override;
  std::string clip_identity(const std::string& clip_id) override;
  std::string template_digest() const override { return digest_; }
  std::vector<std::string> clip_ids() const override;
  std::filesystem::path input_path(const std::string& clip_id) const override;

  const ClipSpec& clip(const std::string& clip_id) const;

 private:
  std::map<std::string, ClipSpec> clips_;
  CommandTemplate templates_;
  ExternalEncoderOptions options_;
  std::string digest_;
  std::mutex identity_mutex_;
  std::map<std::string, std::string> identities_;
};

// Renders the templates, runs encoder then metric tool, and builds the RD
// point from the output size, the clip duration and the metric report.
RDPoint encode_measure(const EncodeJob& job, const ClipSpec& clip,
                       const CommandTemplate& templates,
                       const ExternalEncoderOptions& options = {});

// SHA-256 of a file's bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace lambdatune
