#include "lambdatune/synthetic_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of its inputs.
double jitter(std::uint64_t seed, int qp, double k, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed ^ (stream * 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(qp));
  h = splitmix64(h ^ static_cast<std::uint64_t>(std::llround(k * 1e6)));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

constexpr double kRateJitter = 0.01;
constexpr double kQualityJitterDb = 0.02;

}  // namespace

void SyntheticClipModel::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(fmt::format("synthetic model: {} must be positive, got {}", name, v));
    }
  };
  positive(R0, "R0");
  positive(b, "b");
  positive(beta, "beta");
  positive(gamma, "gamma");
  positive(S0, "S0");
  positive(a, "a");
  positive(c, "c");
  positive(k_star, "k_star");
  if (!(beta < 1.0)) throw DomainError(fmt::format("synthetic model: beta {} must be < 1", beta));
}

std::string SyntheticClipModel::canonical() const {
  return fmt::format("codec={};R0={};b={};beta={};gamma={};S0={};a={};c={};k_star={};noise={}",
                     to_string(codec), R0, b, beta, gamma, S0, a, c, k_star, noise_seed);
}

double synthetic_vmaf(double msssim_db) { return std::clamp(4.5 * msssim_db - 15.0, 0.0, 100.0); }

RDPoint synth_encode(const SyntheticClipModel& model, int qp, ScaleFactor k) {
  model.validate();
  require_qp(model.codec, qp);
  const double kv = k.value();
  const double ln_k = std::log(kv);
  const double ln_star = std::log(model.k_star);

  double rate = model.R0 * std::exp(-model.b * qp) *
                (1.0 + model.beta * (std::pow(kv, -model.gamma) - 1.0));
  double db = model.S0 - model.a * qp -
              model.c * ((ln_k - ln_star) * (ln_k - ln_star) - ln_star * ln_star);
  if (model.noise_seed != 0) {
    rate *= std::exp(kRateJitter * jitter(model.noise_seed, qp, kv, 1));
    db += kQualityJitterDb * jitter(model.noise_seed, qp, kv, 2);
  }
  if (!(db > 0.0)) {
    throw DomainError(fmt::format("synthetic quality {:.3f} dB at qp {} k {} has no MS-SSIM score",
                                  db, qp, kv));
  }
  RDPoint p;
  p.qp = qp;
  p.bitrate_kbps = rate;
  p.msssim_db = db;
  p.msssim = db_to_msssim(db);
  p.vmaf = synthetic_vmaf(db);
  return p;
}

SyntheticEncoder::SyntheticEncoder(std::map<std::string, SyntheticClipModel> clips)
    : clips_(std::move(clips)) {
  if (clips_.empty()) throw ConfigError("synthetic encoder needs at least one clip model");
  for (const auto& [id, model] : clips_) model.validate();
}

const SyntheticClipModel& SyntheticEncoder::model(const std::string& clip_id) const {
  auto it = clips_.find(clip_id);
  if (it == clips_.end()) throw ConfigError(fmt::format("unknown synthetic clip '{}'", clip_id));
  return it->second;
}

RDPoint SyntheticEncoder::encode(const EncodeJob& job) {
  ++calls_;
  const auto& m = model(job.clip_id);
  if (m.codec != job.codec) {
    throw ConfigError(fmt::format("synthetic clip '{}' models {}, job asks for {}", job.clip_id,
                                  to_string(m.codec), to_string(job.codec)));
  }
  return synth_encode(m, job.qp, job.k);
}

std::string SyntheticEncoder::clip_identity(const std::string& clip_id) {
  return clip_id + "|" + model(clip_id).canonical();
}

std::vector<std::string> SyntheticEncoder::clip_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : clips_) ids.push_back(id);
  return ids;
}

}  // namespace lambdatune
