#include "lambdatune/lambda_model.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

std::string_view to_string(Codec codec) {
  switch (codec) {
    case Codec::AV1: return "AV1";
    case Codec::HEVC: return "HEVC";
  }
  return "?";
}

std::string_view to_string(FrameGroup group) {
  switch (group) {
    case FrameGroup::AllFrames: return "AllFrames";
    case FrameGroup::KF: return "KF";
    case FrameGroup::GF_ARF: return "GF_ARF";
    case FrameGroup::KF_GF_ARF: return "KF_GF_ARF";
    case FrameGroup::IFrames: return "IFrames";
    case FrameGroup::BFrames: return "BFrames";
  }
  return "?";
}

std::string_view to_string(Scope scope) {
  switch (scope) {
    case Scope::Top: return "Top";
    case Scope::Partition: return "Partition";
  }
  return "?";
}

Codec parse_codec(std::string_view text) {
  if (text == "AV1" || text == "av1") return Codec::AV1;
  if (text == "HEVC" || text == "hevc") return Codec::HEVC;
  throw ConfigError(fmt::format("unknown codec '{}' (expected AV1 or HEVC)", text));
}

FrameGroup parse_frame_group(std::string_view text) {
  for (auto group : {FrameGroup::AllFrames, FrameGroup::KF, FrameGroup::GF_ARF,
                     FrameGroup::KF_GF_ARF, FrameGroup::IFrames, FrameGroup::BFrames}) {
    if (text == to_string(group)) return group;
  }
  throw ConfigError(fmt::format("unknown frame group '{}'", text));
}

Scope parse_scope(std::string_view text) {
  if (text == "Top") return Scope::Top;
  if (text == "Partition") return Scope::Partition;
  throw ConfigError(fmt::format("unknown scope '{}' (expected Top or Partition)", text));
}

std::vector<FrameGroup> groups_for(Codec codec) {
  if (codec == Codec::AV1) {
    return {FrameGroup::AllFrames, FrameGroup::KF, FrameGroup::GF_ARF, FrameGroup::KF_GF_ARF};
  }
  return {FrameGroup::AllFrames, FrameGroup::IFrames, FrameGroup::BFrames};
}

bool is_valid_group(Codec codec, FrameGroup group) {
  for (auto g : groups_for(codec)) {
    if (g == group) return true;
  }
  return false;
}

QpRange qp_range(Codec codec) {
  return codec == Codec::AV1 ? QpRange{0, 63} : QpRange{0, 51};
}

bool validate_qp(Codec codec, int qp) {
  const auto range = qp_range(codec);
  return qp >= range.min && qp <= range.max;
}

void require_qp(Codec codec, int qp) {
  if (!validate_qp(codec, qp)) {
    const auto range = qp_range(codec);
    throw RangeError(fmt::format("QP {} outside [{},{}] for {}", qp, range.min, range.max,
                                 to_string(codec)));
  }
}

ScaleFactor::ScaleFactor(double k) : k_(k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw DomainError(fmt::format("scale factor must be positive and finite, got {}", k));
  }
}

QdcTable::QdcTable(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() != kAv1QpCount) {
    throw ConfigError(fmt::format("q_dc table needs {} entries, got {}", kAv1QpCount,
                                  values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0)) {
      throw ConfigError(fmt::format("q_dc[{}] = {} is not positive", i, values_[i]));
    }
    if (i > 0 && values_[i] < values_[i - 1]) {
      throw ConfigError(fmt::format("q_dc table decreases at q_i = {}", i));
    }
  }
}

double QdcTable::at(int qp) const {
  if (qp < 0 || static_cast<std::size_t>(qp) >= values_.size()) {
    throw ConfigError(fmt::format("q_dc table has no entry for q_i = {}", qp));
  }
  return values_[static_cast<std::size_t>(qp)];
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view text, int line) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("q_dc table line {}: cannot parse '{}'", line, text));
  }
  return value;
}

}  // namespace

QdcTable QdcTable::parse_csv(std::string_view text) {
  std::vector<double> values(kAv1QpCount, 0.0);
  std::vector<bool> seen(kAv1QpCount, false);
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError(fmt::format("q_dc table line {}: expected two columns", line_no));
    }
    std::string_view row(line);
    const int qp = parse_number<int>(row.substr(0, comma), line_no);
    const double qdc = parse_number<double>(row.substr(comma + 1), line_no);
    if (qp < 0 || qp >= kAv1QpCount) {
      throw ConfigError(fmt::format("q_dc table line {}: q_i {} outside [0,63]", line_no, qp));
    }
    if (seen[static_cast<std::size_t>(qp)]) {
      throw ConfigError(fmt::format("q_dc table line {}: duplicate q_i {}", line_no, qp));
    }
    seen[static_cast<std::size_t>(qp)] = true;
    values[static_cast<std::size_t>(qp)] = qdc;
  }
  if (header) throw ConfigError("q_dc table is empty");
  for (int qp = 0; qp < kAv1QpCount; ++qp) {
    if (!seen[static_cast<std::size_t>(qp)]) {
      throw ConfigError(fmt::format("q_dc table has no entry for q_i = {}", qp));
    }
  }
  return QdcTable(std::move(values));
}

QdcTable QdcTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open q_dc table '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

Av1LambdaParams::Av1LambdaParams(double a_value, QdcTable table)
    : a(a_value), qdc(std::move(table)) {
  if (!(a >= 3.2 && a <= 3.3)) {
    throw ConfigError(fmt::format("AV1 lambda constant A = {} outside [3.2, 3.3]", a));
  }
}

double default_av1_a(bool key_frame) { return key_frame ? kAv1AKeyFrame : kAv1AInterFrame; }

double lambda_default(Codec codec, int qp, const std::optional<Av1LambdaParams>& params) {
  require_qp(codec, qp);
  if (codec == Codec::HEVC) {
    // Split the exponent so that lambda(qp + 3) == 2 * lambda(qp) exactly.
    static const std::array<double, 3> kThirds = {1.0, std::cbrt(2.0), std::cbrt(4.0)};
    const int n = qp - 12;
    const int whole = n >= 0 ? n / 3 : -((-n + 2) / 3);
    const int rem = n - 3 * whole;
    return std::ldexp(0.57 * kThirds[static_cast<std::size_t>(rem)], whole);
  }
  if (!params) throw ConfigError("AV1 lambda needs a q_dc table");
  const double qdc = params->qdc.at(qp);
  return qdc * qdc * (params->a + 0.0035 * qp);
}

double scale_lambda(double lambda0, ScaleFactor k) {
  if (!(lambda0 > 0.0)) {
    throw DomainError(fmt::format("lambda must be positive, got {}", lambda0));
  }
  return k.value() * lambda0;
}

}  // namespace lambdatune
