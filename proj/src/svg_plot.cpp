#include "deloc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace deloc {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  void fit(double mn, double mx) {
    if (log) {
      mn = std::log10(mn);
      mx = std::log10(mx);
    }
    if (!(mx > mn)) {
      const double pad = mn == 0.0 ? 1.0 : std::abs(mn) * 0.1;
      mn -= pad;
      mx += pad;
    }
    const double pad = 0.05 * (mx - mn);
    lo = mn - pad;
    hi = mx + pad;
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= hi; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.size() >= 2) return out;
      out.clear();
    }
    const double a = log ? std::pow(10.0, lo) : lo;
    const double b = log ? std::pow(10.0, hi) : hi;
    const double raw = (b - a) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(a / step) * step; v <= b + 1e-12 * step; v += step) {
      if (usable(v)) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
  }
};

}  // namespace

std::string render_svg(const Chart& chart) {
  Axis ax{chart.log_x}, ay{chart.log_y};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
      const double lo = ay.usable(s.y[i] - e) ? s.y[i] - e : s.y[i];
      y0 = std::min(y0, lo);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  const bool empty = !std::isfinite(x0);
  if (empty) {
    x0 = y0 = 1.0;
    x1 = y1 = 10.0;
  }
  ax.fit(x0, x1);
  ay.fit(y0, y1);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto sy = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(chart.title) << "</text>\n";
  o << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = sx(t);
    o << "<line x1=\"" << px(x) << "\" y1=\"" << px(kTop + ph) << "\" x2=\"" << px(x) << "\" y2=\"" << px(kTop + ph + 5)
      << "\" stroke=\"black\"/>\n<text x=\"" << px(x) << "\" y=\"" << px(kTop + ph + 18)
      << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = sy(t);
    o << "<line x1=\"" << px(kLeft - 5) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kLeft) << "\" y2=\"" << px(y)
      << "\" stroke=\"black\"/>\n<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">"
      << num(t) << "</text>\n";
  }
  o << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 12) << "\" text-anchor=\"middle\">"
    << escape(chart.x_label) << (chart.log_x ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(16," << px(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(chart.y_label) << (chart.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      pts += px(sx(s.x[i])) + "," + px(sy(s.y[i])) + " ";
      if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0.0) {
        const double lo = ay.usable(s.y[i] - s.err[i]) ? s.y[i] - s.err[i] : s.y[i];
        o << "<line x1=\"" << px(sx(s.x[i])) << "\" y1=\"" << px(sy(lo)) << "\" x2=\"" << px(sx(s.x[i]))
          << "\" y2=\"" << px(sy(s.y[i] + s.err[i])) << "\" stroke=\"" << color << "\"/>\n";
      }
      o << "<circle cx=\"" << px(sx(s.x[i])) << "\" cy=\"" << px(sy(s.y[i])) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
    }
    if (!pts.empty()) {
      pts.pop_back();
      o << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << px(kLeft + pw + 12) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(kLeft + pw + 36)
      << "\" y2=\"" << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n<text x=\"" << px(kLeft + pw + 40) << "\" y=\""
      << px(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  if (empty) {
    o << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kTop + ph / 2)
      << "\" text-anchor=\"middle\">no plottable data</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace deloc
