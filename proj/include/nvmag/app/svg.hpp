#pragma once

// Bare-bones static SVG output for --plot. Presentation only.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace nvmag::app::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

namespace detail {

inline constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline void frame(std::ostringstream& os, const Axes& ax, double x0, double x1, double y0, double y1) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
     << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << escape(ax.title) << "</text>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
     << escape(ax.x_label) << "</text>\n"
     << "<text x=\"14\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << kHeight / 2 << ")\">" << escape(ax.y_label) << "</text>\n";
  os << std::setprecision(4);
  os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << x0
     << "</text>\n<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 16
     << "\" text-anchor=\"middle\">" << x1 << "</text>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << kHeight - kBottom << "\" text-anchor=\"end\">" << y0
     << "</text>\n<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << y1
     << "</text>\n";
}

}  // namespace detail

/// Long series are thinned by a fixed stride to about `max_points` vertices.
inline std::string line_plot(const std::vector<Series>& series, const Axes& ax, std::size_t max_points = 4000) {
  using namespace detail;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto ty = [&](double y) { return ax.log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ax.log_y && !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;

  std::ostringstream os;
  frame(os, ax, x0, x1, ax.log_y ? std::pow(10.0, y0) : y0, ax.log_y ? std::pow(10.0, y1) : y1);
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  os << std::fixed << std::setprecision(2);
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << s.color << "\" points=\"";
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / std::max<std::size_t>(max_points, 1));
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      if (ax.log_y && !(s.y[i] > 0.0)) continue;
      os << kLeft + w * (s.x[i] - x0) / (x1 - x0) << ',' << kTop + h * (1.0 - (ty(s.y[i]) - y0) / (y1 - y0)) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Diverging blue-white-red heatmap, symmetric about zero.
/// `values` is row-major with rows along y.
inline std::string heatmap(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& values, const Axes& ax) {
  using namespace detail;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (!(vmax > 0.0)) vmax = 1.0;
  std::ostringstream os;
  frame(os, ax, x.front(), x.back(), y.front(), y.back());
  const double w = (kWidth - kLeft - kRight) / static_cast<double>(x.size());
  const double h = (kHeight - kTop - kBottom) / static_cast<double>(y.size());
  os << std::fixed << std::setprecision(2);
  for (std::size_t iy = 0; iy < y.size(); ++iy)
    for (std::size_t ix = 0; ix < x.size(); ++ix) {
      const double t = values[iy * x.size() + ix] / vmax;
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
      const int r = t > 0 ? 255 : fade, b = t < 0 ? 255 : fade;
      os << "<rect x=\"" << kLeft + w * static_cast<double>(ix) << "\" y=\""
         << kTop + h * static_cast<double>(y.size() - 1 - iy) << "\" width=\"" << w + 0.5 << "\" height=\""
         << h + 0.5 << "\" fill=\"rgb(" << r << ',' << fade << ',' << b << ")\"/>\n";
    }
  os << std::setprecision(4) << std::defaultfloat << "<text x=\"" << kWidth - kRight << "\" y=\"" << kTop - 8
     << "\" text-anchor=\"end\">|max| " << vmax << "</text>\n</svg>\n";
  return os.str();
}

}  // namespace nvmag::app::svg
