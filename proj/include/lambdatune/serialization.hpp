#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

#include "lambdatune/rd_curve.hpp"
#include "lambdatune/sweep.hpp"
#include "lambdatune/synthetic_model.hpp"

namespace lambdatune {

void to_json(nlohmann::json& j, Codec codec);
void from_json(const nlohmann::json& j, Codec& codec);
void to_json(nlohmann::json& j, FrameGroup group);
void from_json(const nlohmann::json& j, FrameGroup& group);
void to_json(nlohmann::json& j, Scope scope);
void from_json(const nlohmann::json& j, Scope& scope);

void to_json(nlohmann::json& j, const RDPoint& point);
void from_json(const nlohmann::json& j, RDPoint& point);
void to_json(nlohmann::json& j, const RDCurve& curve);
void from_json(const nlohmann::json& j, RDCurve& curve);

void to_json(nlohmann::json& j, const SyntheticClipModel& model);
void from_json(const nlohmann::json& j, SyntheticClipModel& model);

void to_json(nlohmann::json& j, const LedgerRecord& record);
void from_json(const nlohmann::json& j, LedgerRecord& record);

void to_json(nlohmann::json& j, const OptimizerConfig& config);
void from_json(const nlohmann::json& j, OptimizerConfig& config);
void to_json(nlohmann::json& j, const TrialRecord& trial);
void from_json(const nlohmann::json& j, TrialRecord& trial);
void to_json(nlohmann::json& j, const OptimizationResult& result);
void from_json(const nlohmann::json& j, OptimizationResult& result);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Writes indented JSON plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

RDCurve load_curve(const std::filesystem::path& path);
OptimizationResult load_result(const std::filesystem::path& path);

// A model file is either one model object (clip id "synthetic") or an array
// of model objects each carrying an "id". The name "default" selects the
// built-in default model. Models without a "codec" take `codec`.
std::map<std::string, SyntheticClipModel> load_synthetic_models(const std::string& source,
                                                                Codec codec);

}  // namespace lambdatune
