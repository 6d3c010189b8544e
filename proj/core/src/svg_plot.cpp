#include <algorithm>
#include <cstdio>
#include <sstream>

#include "facexai/evaluation.hpp"

namespace facexai {
namespace {

constexpr const char* kColors[] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
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

std::string curves_svg(std::span<const OcclusionCurve> methods, const RandomBaseline& baseline,
                       const std::string& title) {
  const double width = 640, height = 400, left = 60, right = 150, top = 40, bottom = 50;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const std::size_t s = baseline.mean.size();
  double ymax = 0.0;
  for (double v : baseline.mean) ymax = std::max(ymax, v);
  for (const auto& c : methods) {
    for (double v : c.mean) ymax = std::max(ymax, v);
  }
  if (ymax <= 0.0) ymax = 1.0;
  auto px = [&](std::size_t k) {
    return left + (s > 1 ? pw * static_cast<double>(k - 1) / static_cast<double>(s - 1) : pw / 2);
  };
  auto py = [&](double v) { return top + ph - ph * v / ymax; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (std::size_t k = 1; k <= s; ++k) {
    svg << "<text x=\"" << fmt(px(k)) << "\" y=\"" << top + ph + 16
        << "\" text-anchor=\"middle\">" << k << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double v = ymax * t / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(v) + 4) << "\" text-anchor=\"end\">"
        << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">number of occluded parts</text>\n";

  auto polyline = [&](const std::vector<double>& mean, const char* color, bool dashed) {
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t k = 1; k <= mean.size(); ++k) {
      svg << (k > 1 ? " " : "") << fmt(px(k)) << "," << fmt(py(mean[k - 1]));
    }
    svg << "\"/>\n";
  };
  auto legend = [&](std::size_t row, const std::string& label, const char* color, bool dashed) {
    const double y = top + 10 + 18.0 * static_cast<double>(row);
    svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << y << "\" x2=\"" << left + pw + 36
        << "\" y2=\"" << y << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    svg << "<text x=\"" << left + pw + 42 << "\" y=\"" << y + 4 << "\">" << escape(label)
        << "</text>\n";
  };
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const char* color = kColors[m % std::size(kColors)];
    polyline(methods[m].mean, color, false);
    legend(m, methods[m].method, color, false);
  }
  polyline(baseline.mean, "#555555", true);
  legend(methods.size(), "random", "#555555", true);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace facexai
