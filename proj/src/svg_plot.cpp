#include "lambdatune/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"
#include "lambdatune/pchip.hpp"

namespace lambdatune {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return fmt::format("{:.3f}", v); }

std::string rate_label(double kbps) {
  if (kbps >= 1000.0) return fmt::format("{:g}M", kbps / 1000.0);
  return fmt::format("{:g}k", kbps);
}

double nice_step(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

PlotFrame PlotFrame::fit(std::span<const RDCurve> curves) {
  PlotFrame f;
  double rmin = INFINITY, rmax = -INFINITY, qmin = INFINITY, qmax = -INFINITY;
  for (const auto& curve : curves) {
    for (const auto& p : curve.points()) {
      rmin = std::min(rmin, std::log10(p.bitrate_kbps));
      rmax = std::max(rmax, std::log10(p.bitrate_kbps));
      qmin = std::min(qmin, p.msssim_db);
      qmax = std::max(qmax, p.msssim_db);
    }
  }
  f.log_rate_min = std::floor(rmin);
  f.log_rate_max = std::ceil(rmax);
  if (f.log_rate_max <= f.log_rate_min) f.log_rate_max = f.log_rate_min + 1.0;
  f.db_min = std::floor(qmin);
  f.db_max = std::ceil(qmax);
  if (f.db_max <= f.db_min) f.db_max = f.db_min + 1.0;
  return f;
}

double PlotFrame::px_x(double log10_rate) const {
  const double plot_w = width - margin_left - margin_right;
  return margin_left + (log10_rate - log_rate_min) / (log_rate_max - log_rate_min) * plot_w;
}

double PlotFrame::px_y(double db) const {
  const double plot_h = height - margin_top - margin_bottom;
  return margin_top + (db_max - db) / (db_max - db_min) * plot_h;
}

double PlotFrame::log_rate_at(double x) const {
  const double plot_w = width - margin_left - margin_right;
  return log_rate_min + (x - margin_left) / plot_w * (log_rate_max - log_rate_min);
}

double PlotFrame::db_at(double y) const {
  const double plot_h = height - margin_top - margin_bottom;
  return db_max - (y - margin_top) / plot_h * (db_max - db_min);
}

std::string render_plot(std::span<const RDCurve> curves, const std::string& title) {
  if (curves.empty()) throw InputError("plot needs at least one curve");
  const PlotFrame f = PlotFrame::fit(curves);
  const double left = f.margin_left;
  const double right = f.width - f.margin_right;
  const double top = f.margin_top;
  const double bottom = f.height - f.margin_bottom;

  std::string svg;
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      f.width, f.height);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
                     f.width, f.height);
  if (!title.empty()) {
    svg += fmt::format("<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       px((left + right) / 2), xml_escape(title));
  }

  svg += "<g class=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n";
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n", px(left),
                     px(bottom), px(right));
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\"/>\n", px(left), px(top),
                     px(bottom));
  svg += "</g>\n";

  svg += "<g class=\"ticks\" fill=\"#444\">\n";
  for (double decade = f.log_rate_min; decade < f.log_rate_max + 0.5; decade += 1.0) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double lr = decade + std::log10(m);
      if (lr > f.log_rate_max + 1e-12) break;
      const double x = f.px_x(lr);
      svg += fmt::format(
          "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>"
          "<text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
          px(x), px(top), px(bottom), px(bottom + 16), rate_label(std::pow(10.0, lr)));
    }
  }
  const double step = nice_step(f.db_max - f.db_min);
  for (double db = std::ceil(f.db_min / step) * step; db <= f.db_max + 1e-9; db += step) {
    const double y = f.px_y(db);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>"
        "<text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5:g}</text>\n",
        px(left), px(y), px(right), px(left - 6), px(y + 4), db);
  }
  svg += "</g>\n";
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">Bitrate (kbps, log scale)</text>\n",
                     px((left + right) / 2), px(f.height - 12));
  svg += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">"
      "MS-SSIM (dB)</text>\n",
      px((top + bottom) / 2));

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c];
    const char* color = kPalette[c % kPalette.size()];
    const auto log_rate = curve.log10_rate();
    const auto quality = curve.quality_db();
    const Pchip fit = Pchip::fit(log_rate, quality);

    std::string points;
    for (int i = 0; i < kPlotSamplesPerCurve; ++i) {
      const double t = static_cast<double>(i) / (kPlotSamplesPerCurve - 1);
      const double lr = i + 1 == kPlotSamplesPerCurve
                            ? fit.upper()
                            : fit.lower() + t * (fit.upper() - fit.lower());
      if (i) points += ' ';
      points += px(f.px_x(lr)) + "," + px(f.px_y(fit.eval(lr)));
    }
    svg += fmt::format(
        "<polyline class=\"rd-curve\" data-k=\"{}\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"1.5\" points=\"{}\"/>\n",
        curve.key().k, color, points);
    for (const auto& p : curve.points()) {
      svg += fmt::format(
          "<circle class=\"rd-point\" data-k=\"{}\" data-qp=\"{}\" cx=\"{}\" cy=\"{}\" r=\"3.5\" "
          "fill=\"{}\"/>\n",
          curve.key().k, p.qp, px(f.px_x(std::log10(p.bitrate_kbps))), px(f.px_y(p.msssim_db)),
          color);
    }
  }

  svg += "<g class=\"legend\">\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const double y = top + 10.0 + 18.0 * static_cast<double>(c);
    const double x = right + 15.0;
    svg += fmt::format(
        "<g class=\"legend-entry\"><line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" "
        "stroke=\"{3}\" stroke-width=\"2\"/><text x=\"{4}\" y=\"{5}\">{6} k = {7:.3f}</text></g>\n",
        px(x), px(y), px(x + 20), kPalette[c % kPalette.size()], px(x + 26), px(y + 4),
        xml_escape(curves[c].key().clip_id), curves[c].key().k);
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void emit_plot(std::span<const RDCurve> curves, const std::filesystem::path& output,
               const std::string& title) {
  const std::string svg = render_plot(curves, title);
  std::ofstream out(output, std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write plot '{}'", output.string()));
  out << svg;
  if (!out) throw IoError(fmt::format("failed writing plot '{}'", output.string()));
}

}  // namespace lambdatune
