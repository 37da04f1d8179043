#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/eval/metrics.hpp"
#include "gaitforge/eval/pipeline.hpp"

// CSV tables and small SVG line plots for evaluation results.

namespace gaitforge::eval {

inline std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "fraction,accuracy,std\n";
  for (const auto& r : rows) out << fmt(r.fraction, 4) << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << '\n';
}

inline void write_covariate_csv(std::ostream& out, std::span<const CovariateRow> rows) {
  out << "covariate,accuracy,tested\n";
  for (const auto& r : rows) out << to_string(r.covariate) << ',' << fmt(r.accuracy) << ',' << r.tested << '\n';
}

// One block per curve: label,fpr,tpr rows.
inline void write_roc_csv(std::ostream& out, const RocReport& report) {
  out << "curve,fpr,tpr\n";
  auto emit = [&](const RocCurve& c) {
    for (const auto& p : c.points) out << c.label << ',' << fmt(p.fpr) << ',' << fmt(p.tpr) << '\n';
  };
  for (const auto& c : report.subjects) emit(c);
  emit(report.average);
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

inline std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
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

inline std::string svg_plot(const PlotSpec& spec, std::span<const Series> series) {
  constexpr double W = 520, H = 400, left = 60, right = 130, top = 36, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - spec.x_min) / (spec.x_max - spec.x_min) * pw; };
  auto sy = [&](double y) { return top + ph - (y - spec.y_min) / (spec.y_max - spec.y_min) * ph; };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(spec.title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = spec.x_min + (spec.x_max - spec.x_min) * i / 5.0;
    const double fy = spec.y_min + (spec.y_max - spec.y_min) * i / 5.0;
    o << "<text x=\"" << sx(fx) << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">" << fmt(fx, 1)
      << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">" << fmt(fy, 1) << "</text>\n";
    o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(fy) << "\" y2=\"" << sy(fy)
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape_xml(spec.x_label)
    << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = palette[k % std::size(palette)];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) o << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    o << "\"/>\n";
    const double ly = top + 12 + 14.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 8 << "\" x2=\"" << left + pw + 24 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 28 << "\" y=\"" << ly << "\">" << escape_xml(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline Series sweep_series(std::string label, std::span<const SweepRow> rows) {
  Series s{std::move(label), {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r.fraction);
    s.y.push_back(r.mean);
  }
  return s;
}

inline Series roc_series(const RocCurve& c) {
  Series s{c.label, {}, {}};
  for (const auto& p : c.points) {
    s.x.push_back(p.fpr);
    s.y.push_back(p.tpr);
  }
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace gaitforge::eval
