#include "wassos/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace wassos {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

std::string band_chart_svg(const BoundSweep& sweep, const std::string& title, const std::string& y_label) {
  std::map<int, std::vector<const SweepAggregate*>> series;
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (const auto& a : sweep.aggregates) {
    if (a.count == 0 || !(a.eps > 0.0)) continue;
    series[a.r].push_back(&a);
    xlo = std::min(xlo, std::log10(a.eps));
    xhi = std::max(xhi, std::log10(a.eps));
    ylo = std::min({ylo, a.q20, a.mean});
    yhi = std::max({yhi, a.q80, a.mean});
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  if (series.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
    return os.str();
  }
  if (xhi - xlo < 1e-12) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi - ylo < 1e-12) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double eps) { return kLeft + (std::log10(eps) - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * ph; };

  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(xlo - 1e-9)); d <= static_cast<int>(std::floor(xhi + 1e-9)); ++d) {
    const double x = px(std::pow(10.0, d));
    os << "<line x1=\"" << num(x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num(x) << "\" y2=\"" << kTop + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double y = ylo + (yhi - ylo) * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << label(y)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">radius eps (log scale)</text>\n";
  os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(y_label) << "</text>\n";

  std::size_t c = 0;
  for (auto& [r, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->eps < b->eps; });
    const char* color = kColors[c++ % std::size(kColors)];
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto* a : pts) os << num(px(a->eps)) << ',' << num(py(a->q80)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) os << num(px((*it)->eps)) << ',' << num(py((*it)->q20)) << ' ';
    os << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto* a : pts) os << num(px(a->eps)) << ',' << num(py(a->mean)) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 14.0 + 16.0 * static_cast<double>(c - 1);
    os << "<line x1=\"" << kLeft + pw - 70 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw - 50 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw - 45 << "\" y=\"" << ly + 4 << "\">r = " << r << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace wassos
