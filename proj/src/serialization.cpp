#include "lambdatune/serialization.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->get<T>();
  } else {
    out.reset();
  }
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void to_json(json& j, Codec codec) { j = std::string(to_string(codec)); }
void from_json(const json& j, Codec& codec) { codec = parse_codec(j.get<std::string>()); }
void to_json(json& j, FrameGroup group) { j = std::string(to_string(group)); }
void from_json(const json& j, FrameGroup& group) {
  group = parse_frame_group(j.get<std::string>());
}
void to_json(json& j, Scope scope) { j = std::string(to_string(scope)); }
void from_json(const json& j, Scope& scope) { scope = parse_scope(j.get<std::string>()); }

void to_json(json& j, const RDPoint& p) {
  j = json{{"qp", p.qp},
           {"bitrate_kbps", p.bitrate_kbps},
           {"msssim", p.msssim},
           {"msssim_db", p.msssim_db},
           {"vmaf", optional_to_json(p.vmaf)}};
}

void from_json(const json& j, RDPoint& p) {
  p.qp = j.at("qp").get<int>();
  p.bitrate_kbps = j.at("bitrate_kbps").get<double>();
  p.msssim = j.at("msssim").get<double>();
  if (auto it = j.find("msssim_db"); it != j.end() && !it->is_null()) {
    p.msssim_db = it->get<double>();
  } else {
    p.msssim_db = msssim_to_db(p.msssim);
  }
  get_optional(j, "vmaf", p.vmaf);
}

void to_json(json& j, const RDCurve& curve) {
  const auto& key = curve.key();
  j = json{{"clip_id", key.clip_id}, {"codec", key.codec}, {"k", key.k},
           {"group", key.group},     {"scope", key.scope}, {"points", curve.points()}};
}

void from_json(const json& j, RDCurve& curve) {
  CurveKey key;
  key.clip_id = j.at("clip_id").get<std::string>();
  key.codec = j.at("codec").get<Codec>();
  key.k = j.value("k", 1.0);
  key.group = j.contains("group") ? j.at("group").get<FrameGroup>() : FrameGroup::AllFrames;
  key.scope = j.contains("scope") ? j.at("scope").get<Scope>() : Scope::Top;
  curve = RDCurve(std::move(key), j.at("points").get<std::vector<RDPoint>>());
}

void to_json(json& j, const SyntheticClipModel& m) {
  j = json{{"codec", m.codec}, {"R0", m.R0}, {"b", m.b},   {"beta", m.beta},
           {"gamma", m.gamma}, {"S0", m.S0}, {"a", m.a},   {"c", m.c},
           {"k_star", m.k_star}, {"noise_seed", m.noise_seed}};
}

void from_json(const json& j, SyntheticClipModel& m) {
  const SyntheticClipModel d;
  m.codec = j.contains("codec") ? j.at("codec").get<Codec>() : d.codec;
  m.R0 = j.value("R0", d.R0);
  m.b = j.value("b", d.b);
  m.beta = j.value("beta", d.beta);
  m.gamma = j.value("gamma", d.gamma);
  m.S0 = j.value("S0", d.S0);
  m.a = j.value("a", d.a);
  m.c = j.value("c", d.c);
  m.k_star = j.value("k_star", d.k_star);
  m.noise_seed = j.value("noise_seed", d.noise_seed);
}

void to_json(json& j, const LedgerRecord& r) {
  j = json{{"timestamp", r.timestamp},
           {"run_id", r.run_id},
           {"cache_key", r.cache_key},
           {"clip", r.clip},
           {"codec", r.codec},
           {"qp", r.qp},
           {"k", r.k},
           {"group", r.group},
           {"scope", r.scope},
           {"bitrate_kbps", r.bitrate_kbps},
           {"msssim", r.msssim},
           {"msssim_db", r.msssim_db},
           {"vmaf", optional_to_json(r.vmaf)},
           {"invocation_seconds", r.invocation_seconds},
           {"cached", r.cached}};
}

void from_json(const json& j, LedgerRecord& r) {
  r.timestamp = j.at("timestamp").get<std::string>();
  r.run_id = j.value("run_id", std::string());
  r.cache_key = j.at("cache_key").get<std::string>();
  r.clip = j.at("clip").get<std::string>();
  r.codec = j.at("codec").get<Codec>();
  r.qp = j.at("qp").get<int>();
  r.k = j.at("k").get<double>();
  r.group = j.at("group").get<FrameGroup>();
  r.scope = j.at("scope").get<Scope>();
  r.bitrate_kbps = j.at("bitrate_kbps").get<double>();
  r.msssim = j.at("msssim").get<double>();
  r.msssim_db = j.at("msssim_db").get<double>();
  get_optional(j, "vmaf", r.vmaf);
  r.invocation_seconds = j.at("invocation_seconds").get<double>();
  r.cached = j.at("cached").get<bool>();
}

void to_json(json& j, const OptimizerConfig& c) {
  j = json{{"xtol", c.xtol},
           {"max_iters", c.max_iters},
           {"search_domain", c.domain == SearchDomain::Logarithmic ? "logarithmic" : "linear"}};
}

void from_json(const json& j, OptimizerConfig& c) {
  c.xtol = j.at("xtol").get<double>();
  c.max_iters = j.at("max_iters").get<int>();
  const auto domain = j.at("search_domain").get<std::string>();
  if (domain == "logarithmic") {
    c.domain = SearchDomain::Logarithmic;
  } else if (domain == "linear") {
    c.domain = SearchDomain::Linear;
  } else {
    throw SchemaError(fmt::format("unknown search domain '{}'", domain));
  }
}

void to_json(json& j, const TrialRecord& t) {
  j = json{{"k", t.k},
           {"cost", t.cost},
           {"encoder_invocations", t.encoder_invocations},
           {"curve", t.curve}};
}

void from_json(const json& j, TrialRecord& t) {
  t.k = j.at("k").get<double>();
  t.cost = j.at("cost").get<double>();
  t.encoder_invocations = j.at("encoder_invocations").get<int>();
  t.curve = j.at("curve").get<RDCurve>();
}

void to_json(json& j, const OptimizationResult& r) {
  j = json{{"clip_id", r.clip_id},
           {"codec", r.codec},
           {"group", r.group},
           {"scope", r.scope},
           {"run_id", r.run_id},
           {"qp_ladder", r.qp_ladder},
           {"k_hat", r.k_hat},
           {"bd_rate", r.bd_rate},
           {"iterations", r.iterations},
           {"rd2_qp", r.rd2_qp},
           {"rd2_savings", r.rd2_savings},
           {"mean_savings", r.mean_savings},
           {"msssim_change_db", r.msssim_change_db},
           {"vmaf_change", optional_to_json(r.vmaf_change)},
           {"total_invocations", r.total_invocations},
           {"reference_invocations", r.reference_invocations},
           {"raw_invocations", r.raw_invocations},
           {"discarded_k", r.discarded_k},
           {"discarded_invocations", r.discarded_invocations},
           {"optimizer_iterations", r.optimizer_iterations},
           {"improved", r.improved},
           {"status", std::string(to_string(r.status))},
           {"optimizer", r.optimizer},
           {"reference", r.reference},
           {"trials", r.trials}};
}

void from_json(const json& j, OptimizationResult& r) {
  r.clip_id = j.at("clip_id").get<std::string>();
  r.codec = j.at("codec").get<Codec>();
  r.group = j.at("group").get<FrameGroup>();
  r.scope = j.at("scope").get<Scope>();
  r.run_id = j.value("run_id", std::string());
  r.qp_ladder = j.at("qp_ladder").get<std::vector<int>>();
  r.k_hat = j.at("k_hat").get<double>();
  r.bd_rate = j.at("bd_rate").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.rd2_qp = j.at("rd2_qp").get<int>();
  r.rd2_savings = j.at("rd2_savings").get<double>();
  r.mean_savings = j.at("mean_savings").get<double>();
  r.msssim_change_db = j.at("msssim_change_db").get<double>();
  get_optional(j, "vmaf_change", r.vmaf_change);
  r.total_invocations = j.at("total_invocations").get<int>();
  r.reference_invocations = j.at("reference_invocations").get<int>();
  r.raw_invocations = j.at("raw_invocations").get<int>();
  r.discarded_k = j.value("discarded_k", std::vector<double>{});
  r.discarded_invocations = j.value("discarded_invocations", 0);
  r.optimizer_iterations = j.at("optimizer_iterations").get<int>();
  r.improved = j.at("improved").get<bool>();
  r.status = parse_status(j.at("status").get<std::string>());
  r.optimizer = j.at("optimizer").get<OptimizerConfig>();
  r.reference = j.at("reference").get<RDCurve>();
  r.trials = j.at("trials").get<std::vector<TrialRecord>>();
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << doc.dump(2) << '\n';
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

namespace {

template <typename T>
T load_as(const fs::path& path, std::string_view what) {
  const json doc = read_json_file(path);
  try {
    return doc.get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("'{}' is not a valid {}: {}", path.string(), what, e.what()));
  }
}

}  // namespace

RDCurve load_curve(const fs::path& path) { return load_as<RDCurve>(path, "RD curve"); }

OptimizationResult load_result(const fs::path& path) {
  return load_as<OptimizationResult>(path, "optimization result");
}

std::map<std::string, SyntheticClipModel> load_synthetic_models(const std::string& source,
                                                                Codec codec) {
  std::map<std::string, SyntheticClipModel> models;
  if (source == "default") {
    SyntheticClipModel model;
    model.codec = codec;
    models.emplace("synthetic", model);
    return models;
  }
  const json doc = read_json_file(source);
  const auto parse_one = [&](const json& entry) {
    try {
      auto model = entry.get<SyntheticClipModel>();
      if (!entry.contains("codec")) model.codec = codec;
      model.validate();
      return model;
    } catch (const json::exception& e) {
      throw SchemaError(fmt::format("synthetic model in '{}': {}", source, e.what()));
    }
  };
  if (doc.is_object()) {
    models.emplace(doc.value("id", std::string("synthetic")), parse_one(doc));
  } else if (doc.is_array()) {
    for (const auto& entry : doc) {
      if (!entry.contains("id")) {
        throw SchemaError(fmt::format("synthetic model in '{}' lacks an id", source));
      }
      const auto id = entry.at("id").get<std::string>();
      if (!models.emplace(id, parse_one(entry)).second) {
        throw SchemaError(fmt::format("duplicate synthetic clip id '{}'", id));
      }
    }
  } else {
    throw SchemaError(fmt::format("'{}' must hold a model object or an array of them", source));
  }
  if (models.empty()) throw SchemaError(fmt::format("'{}' defines no models", source));
  return models;
}

}  // namespace lambdatune
