#include "lambdatune/encoder_bridge.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "lambdatune/errors.hpp"
#include "lambdatune/process.hpp"

namespace lambdatune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kEncoderPlaceholders = {
    "input", "output", "qp", "k", "frame_group", "scope",
    "width", "height", "frame_count", "frame_rate", "pix_fmt"};
const std::set<std::string, std::less<>> kMetricPlaceholders = {
    "reference", "distorted", "report", "width", "height", "frame_count", "frame_rate",
    "pix_fmt"};

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls visit(name, begin, end) for every {name} in token.
template <typename Visit>
void scan_placeholders(std::string_view token, Visit&& visit) {
  std::size_t pos = 0;
  while ((pos = token.find('{', pos)) != std::string_view::npos) {
    std::size_t end = pos + 1;
    while (end < token.size() && is_name_char(token[end])) ++end;
    if (end < token.size() && token[end] == '}' && end > pos + 1) {
      visit(token.substr(pos + 1, end - pos - 1), pos, end + 1);
      pos = end + 1;
    } else {
      ++pos;
    }
  }
}

void check_template(const std::vector<std::string>& tokens,
                    const std::set<std::string, std::less<>>& allowed,
                    std::initializer_list<std::string_view> required, std::string_view label) {
  if (tokens.empty()) throw ConfigError(fmt::format("{} template is empty", label));
  std::set<std::string, std::less<>> used;
  for (const auto& token : tokens) {
    scan_placeholders(token, [&](std::string_view name, std::size_t, std::size_t) {
      if (!allowed.contains(name)) {
        throw ConfigError(fmt::format("{} template: unknown placeholder {{{}}}", label, name));
      }
      if (!used.emplace(name).second) {
        throw ConfigError(fmt::format("{} template: placeholder {{{}}} used more than once",
                                      label, name));
      }
    });
  }
  for (auto name : required) {
    if (!used.contains(name)) {
      throw ConfigError(fmt::format("{} template must contain {{{}}}", label, name));
    }
  }
}

std::vector<std::string> substitute(const std::vector<std::string>& tokens,
                                    const std::map<std::string, std::string, std::less<>>& values) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    std::string rendered;
    std::size_t last = 0;
    scan_placeholders(token, [&](std::string_view name, std::size_t begin, std::size_t end) {
      rendered.append(token, last, begin - last);
      rendered += values.find(name)->second;
      last = end;
    });
    rendered.append(token, last, std::string::npos);
    out.push_back(std::move(rendered));
  }
  return out;
}

std::map<std::string, std::string, std::less<>> geometry(const ClipSpec& clip) {
  return {{"width", std::to_string(clip.width)},
          {"height", std::to_string(clip.height)},
          {"frame_count", std::to_string(clip.frame_count)},
          {"frame_rate", fmt::format("{}", clip.frame_rate)},
          {"pix_fmt", clip.pix_fmt}};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string tail(const std::string& text, std::size_t max_bytes = 2048) {
  return text.size() <= max_bytes ? text : "..." + text.substr(text.size() - max_bytes);
}

class DigestContext {
 public:
  DigestContext() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialisation failed");
    }
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx_); }
  DigestContext(const DigestContext&) = delete;
  DigestContext& operator=(const DigestContext&) = delete;

  void update(const void* data, std::size_t size) { EVP_DigestUpdate(ctx_, data, size); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &len);
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestContext ctx;
  ctx.update(bytes.data(), bytes.size());
  return ctx.hex();
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  DigestContext ctx;
  std::array<char, 1 << 16> buffer;
  while (in) {
    in.read(buffer.data(), buffer.size());
    ctx.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return ctx.hex();
}

std::vector<ClipSpec> parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("manifest is not valid JSON: {}", e.what()));
  }
  if (!doc.is_array()) throw SchemaError("manifest must be a JSON array of clips");
  std::vector<ClipSpec> clips;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    try {
      ClipSpec clip;
      clip.id = entry.at("id").get<std::string>();
      clip.path = entry.at("path").get<std::string>();
      clip.width = entry.at("width").get<int>();
      clip.height = entry.at("height").get<int>();
      clip.frame_count = entry.at("frame_count").get<int>();
      clip.frame_rate = entry.at("frame_rate").get<double>();
      clip.pix_fmt = entry.at("pix_fmt").get<std::string>();
      if (clip.path.is_relative() && !base_dir.empty()) clip.path = base_dir / clip.path;
      if (clip.id.empty()) throw SchemaError("empty id");
      if (clip.width <= 0 || clip.height <= 0 || clip.frame_count <= 0 || !(clip.frame_rate > 0)) {
        throw SchemaError("geometry and timing must be positive");
      }
      if (!ids.insert(clip.id).second) throw SchemaError("duplicate id '" + clip.id + "'");
      clips.push_back(std::move(clip));
    } catch (const json::exception& e) {
      throw SchemaError(fmt::format("manifest entry {}: {}", i, e.what()));
    } catch (const SchemaError& e) {
      throw SchemaError(fmt::format("manifest entry {}: {}", i, e.what()));
    }
  }
  return clips;
}

std::vector<ClipSpec> load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(fmt::format("manifest '{}' does not exist", path.string()));
  return parse_manifest(read_file(path), path.parent_path());
}

EncodeJob::EncodeJob(std::string clip, Codec c, int q, ScaleFactor scale, FrameGroup g, Scope s)
    : clip_id(std::move(clip)), codec(c), qp(q), k(scale), group(g), scope(s) {
  require_qp(codec, qp);
  if (!is_valid_group(codec, group)) {
    throw ConfigError(fmt::format("frame group {} is not defined for {}", to_string(group),
                                  to_string(codec)));
  }
}

double quantize_k(double k) { return std::round(k * 1e6) / 1e6; }

std::string format_k(double k) { return fmt::format("{}", quantize_k(k)); }

std::vector<std::string> split_command(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        current += c;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (in_token) {
        tokens.push_back(std::move(current));
        current.clear();
        in_token = false;
      }
    } else {
      current += c;
      in_token = true;
    }
  }
  if (quote) throw ConfigError(fmt::format("unterminated quote in command '{}'", text));
  if (in_token) tokens.push_back(std::move(current));
  return tokens;
}

CommandTemplate::CommandTemplate(std::string_view encoder, std::string_view metric)
    : encoder_source_(encoder),
      metric_source_(metric),
      encoder_(split_command(encoder)),
      metric_(split_command(metric)) {
  check_template(encoder_, kEncoderPlaceholders, {"input", "output", "qp"}, "encoder");
  check_template(metric_, kMetricPlaceholders, {"distorted", "report"}, "metric");
}

std::vector<std::string> CommandTemplate::render_encoder(const EncodeJob& job,
                                                         const ClipSpec& clip,
                                                         const fs::path& output) const {
  auto values = geometry(clip);
  values["input"] = job.input_path.string();
  values["output"] = output.string();
  values["qp"] = std::to_string(job.qp);
  values["k"] = format_k(job.k.value());
  values["frame_group"] = std::string(to_string(job.group));
  values["scope"] = std::string(to_string(job.scope));
  return substitute(encoder_, values);
}

std::vector<std::string> CommandTemplate::render_metric(const ClipSpec& clip,
                                                        const fs::path& distorted,
                                                        const fs::path& report) const {
  auto values = geometry(clip);
  values["reference"] = clip.path.string();
  values["distorted"] = distorted.string();
  values["report"] = report.string();
  return substitute(metric_, values);
}

std::string CommandTemplate::digest() const {
  return sha256_hex(encoder_source_ + '\0' + metric_source_);
}

MetricReading parse_metric_report(std::string_view report, const MetricKeys& keys) {
  json doc;
  try {
    doc = json::parse(report);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("metric report is not valid JSON: {}", e.what()));
  }
  const auto lookup = [&](const std::string& path, bool required) -> std::optional<double> {
    json::json_pointer ptr;
    try {
      ptr = json::json_pointer(path);
    } catch (const json::exception&) {
      throw ConfigError(fmt::format("invalid metric key path '{}'", path));
    }
    if (!doc.contains(ptr)) {
      if (required) throw SchemaError(fmt::format("metric report has no value at '{}'", path));
      return std::nullopt;
    }
    const auto& value = doc.at(ptr);
    if (!value.is_number()) {
      throw SchemaError(fmt::format("metric report value at '{}' is not a number", path));
    }
    return value.get<double>();
  };
  MetricReading reading;
  reading.msssim = *lookup(keys.msssim, true);
  reading.vmaf = lookup(keys.vmaf, keys.vmaf_required);
  return reading;
}

RDPoint encode_measure(const EncodeJob& job, const ClipSpec& clip,
                       const CommandTemplate& templates, const ExternalEncoderOptions& options) {
  if (!fs::exists(job.input_path)) {
    throw IoError(fmt::format("input '{}' for clip '{}' does not exist", job.input_path.string(),
                              job.clip_id));
  }
  fs::create_directories(job.work_dir);
  const fs::path output = job.work_dir / ("encoded." + options.output_extension);
  const fs::path report = job.work_dir / "metric.json";
  fs::remove(output);
  fs::remove(report);

  const auto encoder = run_process(templates.render_encoder(job, clip, output),
                                   job.work_dir / "encoder.log");
  if (encoder.exit_code != 0) {
    throw ProcessError(fmt::format("encoder exited with status {} for clip '{}' qp {} k {}:\n{}",
                                   encoder.exit_code, job.clip_id, job.qp,
                                   format_k(job.k.value()), tail(encoder.output)));
  }
  if (!fs::exists(output)) {
    throw ProcessError(fmt::format("encoder produced no output at '{}'", output.string()));
  }
  const auto bytes = fs::file_size(output);
  if (bytes == 0) throw ProcessError(fmt::format("encoder output '{}' is empty", output.string()));

  const auto metric = run_process(templates.render_metric(clip, output, report),
                                  job.work_dir / "metric.log");
  if (metric.exit_code != 0) {
    throw ProcessError(fmt::format("metric tool exited with status {} for clip '{}' qp {}:\n{}",
                                   metric.exit_code, job.clip_id, job.qp, tail(metric.output)));
  }
  const auto reading = parse_metric_report(read_file(report), options.metric_keys);
  if (!(reading.msssim > 0.0 && reading.msssim < 1.0)) {
    throw SchemaError(fmt::format("MS-SSIM {} outside (0, 1)", reading.msssim));
  }

  const double kbps = static_cast<double>(bytes) * 8.0 / clip.duration_seconds() / 1000.0;
  if (!options.keep_media) fs::remove(output);
  return RDPoint::from_msssim(job.qp, kbps, reading.msssim, reading.vmaf);
}

ExternalEncoder::ExternalEncoder(std::vector<ClipSpec> clips, CommandTemplate templates,
                                 ExternalEncoderOptions options)
    : templates_(std::move(templates)), options_(std::move(options)) {
  for (auto& clip : clips) {
    const std::string id = clip.id;
    if (!clips_.emplace(id, std::move(clip)).second) {
      throw ConfigError(fmt::format("duplicate clip id '{}'", id));
    }
  }
  digest_ = sha256_hex(templates_.digest() + '\0' + options_.output_extension + '\0' +
                       options_.metric_keys.msssim + '\0' + options_.metric_keys.vmaf);
}

const ClipSpec& ExternalEncoder::clip(const std::string& clip_id) const {
  auto it = clips_.find(clip_id);
  if (it == clips_.end()) throw ConfigError(fmt::format("unknown clip '{}'", clip_id));
  return it->second;
}

RDPoint ExternalEncoder::encode(const EncodeJob& job) {
  return encode_measure(job, clip(job.clip_id), templates_, options_);
}

std::string ExternalEncoder::clip_identity(const std::string& clip_id) {
  const auto& spec = clip(clip_id);
  std::lock_guard lock(identity_mutex_);
  auto it = identities_.find(clip_id);
  if (it == identities_.end()) {
    const std::string content = file_digest(spec.path);
    const std::string identity =
        fmt::format("{}:{}x{}:{}f@{}:{}", content, spec.width, spec.height, spec.frame_count,
                    spec.frame_rate, spec.pix_fmt);
    it = identities_.emplace(clip_id, identity).first;
  }
  return it->second;
}

std::vector<std::string> ExternalEncoder::clip_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : clips_) ids.push_back(id);
  return ids;
}

fs::path ExternalEncoder::input_path(const std::string& clip_id) const {
  return clip(clip_id).path;
}

}  // namespace lambdatune
