#include "cmrkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cmrkit {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 520.0;
constexpr double kMarginL = 78.0;
constexpr double kMarginR = 24.0;
constexpr double kMarginT = 46.0;
constexpr double kMarginB = 72.0;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// 1-2-5 tick spacing covering [lo, hi] with about n ticks.
std::vector<double> nice_ticks(double lo, double hi, int n) {
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  const double raw = (hi - lo) / std::max(1, n);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgPlot::add_points(std::vector<std::pair<double, double>> pts,
                         std::string color, std::string name) {
  series_.push_back({std::move(pts), std::move(color), std::move(name), false,
                     false});
}

void SvgPlot::add_line(std::vector<std::pair<double, double>> pts,
                       std::string color, std::string name, bool dashed) {
  series_.push_back({std::move(pts), std::move(color), std::move(name), true,
                     dashed});
}

std::string SvgPlot::render() const {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : series_) {
    for (const auto& [x, y] : s.pts) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double y_pad = 0.06 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto px = [&](double x) {
    return kMarginL + (x - x_lo) / (x_hi - x_lo) * plot_w;
  };
  auto py = [&](double y) {
    return kMarginT + (y_hi - y) / (y_hi - y_lo) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape(title_) << "</text>\n";

  for (const double t : nice_ticks(x_lo, x_hi, 8)) {
    const double x = px(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kMarginT) << "\" x2=\""
        << num(x) << "\" y2=\"" << num(kHeight - kMarginB)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kHeight - kMarginB + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  for (const double t : nice_ticks(y_lo, y_hi, 7)) {
    const double y = py(t);
    out << "<line x1=\"" << num(kMarginL) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kWidth - kMarginR) << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(kMarginL - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
      << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - kMarginB + 40
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(x_label_) << "</text>\n";
  if (!x_note_.empty()) {
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - kMarginB + 58
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\" fill=\"#666666\">"
        << escape(x_note_) << "</text>\n";
  }
  out << "<text x=\"20\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 20 "
      << kHeight / 2 << ")\">" << escape(y_label_) << "</text>\n";

  double legend_y = kMarginT + 14.0;
  for (const auto& s : series_) {
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.8\"";
      if (s.dashed) out << " stroke-dasharray=\"6 4\"";
      out << " points=\"";
      for (const auto& [x, y] : s.pts) {
        out << num(px(x)) << ',' << num(py(y)) << ' ';
      }
      out << "\"/>\n";
    } else {
      for (const auto& [x, y] : s.pts) {
        out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
            << "\" r=\"3.4\" fill=\"" << s.color << "\"/>\n";
      }
    }
    if (!s.name.empty()) {
      out << "<rect x=\"" << kMarginL + 10 << "\" y=\"" << num(legend_y - 8)
          << "\" width=\"18\" height=\"4\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << kMarginL + 34 << "\" y=\"" << num(legend_y - 2)
          << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << escape(s.name) << "</text>\n";
      legend_y += 16.0;
    }
  }
  out << "</svg>\n";
  return out.str();
}

void SvgPlot::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << render();
}

}  // namespace cmrkit
