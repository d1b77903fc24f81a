#include "oamp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oamp/csv.hpp"

namespace oamp {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const SvgPlot& plot) {
  const double left = 64, right = 150, top = 36, bottom = 52;
  const double w = plot.width - left - right;
  const double h = plot.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double b = i < s.band.size() && std::isfinite(s.band[i]) ? s.band[i] : 0.0;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - b);
      y1 = std::max(y1, s.y[i] + b);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
     << plot.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(left + w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w)
     << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0;
    const double yv = y0 + (y1 - y0) * k / 5.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + h + 16)
       << "\" text-anchor=\"middle\">" << format_real(std::round(xv * 1000) / 1000) << "</text>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4)
       << "\" text-anchor=\"end\">" << format_real(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  os << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(plot.height - 12)
     << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << num(top + h / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  double legend_y = top + 12;
  for (const auto& s : plot.series) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) idx.push_back(i);
    }
    if (!s.band.empty() && !idx.empty()) {
      os << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t i : idx) os << num(px(s.x[i])) << ',' << num(py(s.y[i] + s.band[i])) << ' ';
      for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
        os << num(px(s.x[*it])) << ',' << num(py(s.y[*it] - s.band[*it])) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i : idx) os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    os << "\"/>\n";
    if (s.markers) {
      for (std::size_t i : idx) {
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
           << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    os << "<line x1=\"" << num(left + w + 12) << "\" y1=\"" << num(legend_y) << "\" x2=\""
       << num(left + w + 32) << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << s.color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(left + w + 38) << "\" y=\"" << num(legend_y + 4) << "\">"
       << escape(s.label) << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace oamp
