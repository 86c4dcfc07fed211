#include "koopman_lift/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace klift {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
  };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y0 -= 0.5, y1 += 0.5;

  const double left = 70, right = 170, top = 40, bottom = 50;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
                    "\" height=\"" + std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double yp = top + (1.0 - k / 4.0) * ph;
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">" + tick(xv) +
           "</text>\n";
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(yp + 4) + "\" text-anchor=\"end\">" +
           tick(spec.log_y ? std::pow(10.0, yv) : yv) + "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(spec.height - 10.0) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(top + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
      }
      points.clear();
    };
    const auto& ser = series[s];
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!usable(ser.x[i], ser.y[i])) {
        flush();
        continue;
      }
      points += num(px(ser.x[i])) + "," + num(py(ser.y[i])) + " ";
    }
    flush();
    const double ly = top + 10 + 16.0 * static_cast<double>(s);
    svg += "<line x1=\"" + num(left + pw + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(left + pw + 30) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(left + pw + 34) + "\" y=\"" + num(ly + 4) + "\">" + escape(ser.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace klift
