#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lambdatune {

enum class Codec { AV1, HEVC };

// Frame-type groups whose lambda is scaled. AllFrames is shared by both
// codecs; the rest are codec specific.
enum class FrameGroup { AllFrames, KF, GF_ARF, KF_GF_ARF, IFrames, BFrames };

enum class Scope { Top, Partition };

std::string_view to_string(Codec codec);
std::string_view to_string(FrameGroup group);
std::string_view to_string(Scope scope);

Codec parse_codec(std::string_view text);
FrameGroup parse_frame_group(std::string_view text);
Scope parse_scope(std::string_view text);

bool is_valid_group(Codec codec, FrameGroup group);
std::vector<FrameGroup> groups_for(Codec codec);

struct QpRange {
  int min;
  int max;
};

QpRange qp_range(Codec codec);

bool validate_qp(Codec codec, int qp);

// Throws RangeError when validate_qp fails.
void require_qp(Codec codec, int qp);

// Multiplier applied to the codec default lambda. k == 1 is the default.
class ScaleFactor {
 public:
  explicit ScaleFactor(double k);

  double value() const { return k_; }

  static ScaleFactor identity() { return ScaleFactor(1.0); }

  friend bool operator==(ScaleFactor, ScaleFactor) = default;

 private:
  double k_;
};

inline constexpr double kAv1AKeyFrame = 3.3;
inline constexpr double kAv1AInterFrame = 3.2;
inline constexpr int kAv1QpCount = 64;

// q_i -> q_dc lookup. Values are positive and non-decreasing in q_i.
class QdcTable {
 public:
  explicit QdcTable(std::vector<double> values);

  double at(int qp) const;
  std::size_t size() const { return values_.size(); }

  // Two-column CSV "q_i,q_dc" with a header row and one row per q_i in
  // [0,63].
  static QdcTable load_csv(const std::filesystem::path& path);
  static QdcTable parse_csv(std::string_view text);

 private:
  std::vector<double> values_;
};

struct Av1LambdaParams {
  Av1LambdaParams(double a, QdcTable table);

  double a;
  QdcTable qdc;
};

// A for AV1 frames: 3.3 for key frames, 3.2 otherwise.
double default_av1_a(bool key_frame);

// Codec default lambda. HEVC: 0.57 * 2^((qp-12)/3). AV1: q_dc^2 * (A + 0.0035 qp).
double lambda_default(Codec codec, int qp,
                      const std::optional<Av1LambdaParams>& params = std::nullopt);

double scale_lambda(double lambda0, ScaleFactor k);

}  // namespace lambdatune
