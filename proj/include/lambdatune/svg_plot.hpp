#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "lambdatune/rd_curve.hpp"

namespace lambdatune {

// Maps (log10 bitrate, MS-SSIM dB) onto SVG pixel coordinates.
struct PlotFrame {
  double width = 720.0;
  double height = 480.0;
  double margin_left = 70.0;
  double margin_right = 150.0;
  double margin_top = 30.0;
  double margin_bottom = 55.0;
  double log_rate_min = 0.0;
  double log_rate_max = 1.0;
  double db_min = 0.0;
  double db_max = 1.0;

  // Frame enclosing every curve, padded to whole decades on x.
  static PlotFrame fit(std::span<const RDCurve> curves);

  double px_x(double log10_rate) const;
  double px_y(double db) const;
  double log_rate_at(double px) const;
  double db_at(double py) const;
};

inline constexpr int kPlotSamplesPerCurve = 200;

// Logarithmic bitrate x-axis, MS-SSIM (dB) y-axis, one monotone-cubic
// polyline per curve sampled inside its measured span, a marker per RD point
// and a legend keyed by k.
std::string render_plot(std::span<const RDCurve> curves, const std::string& title = {});

void emit_plot(std::span<const RDCurve> curves, const std::filesystem::path& output,
               const std::string& title = {});

}  // namespace lambdatune
