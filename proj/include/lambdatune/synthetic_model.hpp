#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lambdatune/encoder_bridge.hpp"

namespace lambdatune {

// Parametric stand-in for a patched encoder. Rate falls with QP and with k
// through the key-frame share `beta`; quality (MS-SSIM dB) falls with QP and
// carries a concave penalty in ln k that peaks at the latent optimum k_star.
//
//   rate(qp, k)    = R0 * exp(-b qp) * (1 - beta + beta * k^-gamma)
//   quality(qp, k) = S0 - a qp - c * ((ln k - ln k_star)^2 - (ln k_star)^2)
struct SyntheticClipModel {
  Codec codec = Codec::AV1;
  double R0 = 30000.0;
  double b = 0.09;
  double beta = 0.35;
  double gamma = 1.0;
  double S0 = 26.0;
  double a = 0.28;
  double c = 0.8;
  double k_star = 2.5;
  // 0 disables noise. Any other value adds small reproducible jitter.
  std::uint64_t noise_seed = 0;

  void validate() const;
  std::string canonical() const;
};

// Affine VMAF stand-in, clamped to [0, 100]; only there to fill report columns.
double synthetic_vmaf(double msssim_db);

// Throws DomainError for invalid parameters, or when the modelled quality
// drops to 0 dB or below (no MS-SSIM score exists there).
RDPoint synth_encode(const SyntheticClipModel& model, int qp, ScaleFactor k);

class SyntheticEncoder final : public EncoderBackend {
 public:
  explicit SyntheticEncoder(std::map<std::string, SyntheticClipModel> clips);

  RDPoint encode(const EncodeJob& job) override;
  std::string clip_identity(const std::string& clip_id) override;
  std::string template_digest() const override { return "synthetic-model-v1"; }
  std::vector<std::string> clip_ids() const override;

  const SyntheticClipModel& model(const std::string& clip_id) const;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, SyntheticClipModel> clips_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace lambdatune
