#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "dlab/format.hpp"

namespace dlab::cli {

namespace {

constexpr double kWidth = 480;
constexpr double kHeight = 320;
constexpr double kLeft = 64;
constexpr double kRight = 16;
constexpr double kTop = 32;
constexpr double kBottom = 40;

std::string num(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

void write_curve_svg(std::ostream& out, const EffectCurve& curve, const std::string& title) {
  const auto& pts = curve.points;
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t k_min = 1;
  std::uint32_t k_max = 2;
  if (!pts.empty()) {
    lo = pts.front().lo95;
    hi = pts.front().hi95;
    k_min = pts.front().team_size;
    k_max = pts.front().team_size;
    for (const auto& p : pts) {
      lo = std::min(lo, p.lo95);
      hi = std::max(hi, p.hi95);
      k_min = std::min(k_min, p.team_size);
      k_max = std::max(k_max, p.team_size);
    }
  }
  if (curve.variant == ModelVariant::kEq2) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  if (k_max == k_min) ++k_max;

  auto sx = [&](double k) { return kLeft + (k - k_min) / (k_max - k_min) * (kWidth - kLeft - kRight); };
  auto sy = [&](double v) { return kTop + (hi - v) / (hi - lo) * (kHeight - kTop - kBottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(kWidth - kRight)
      << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  for (std::uint32_t k = k_min; k <= k_max; ++k) {
    out << "<text x=\"" << num(sx(k)) << "\" y=\"" << num(kHeight - kBottom + 14) << "\" text-anchor=\"middle\">" << k
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(v) + 4) << "\" text-anchor=\"end\">"
        << format_double(std::round(v * 1e4) / 1e4) << "</text>\n";
  }
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 6) << "\" text-anchor=\"middle\">team size</text>\n";

  if (curve.variant == ModelVariant::kEq1) {
    std::string band;
    for (const auto& p : pts) band += num(sx(p.team_size)) + "," + num(sy(p.hi95)) + " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) band += num(sx(it->team_size)) + "," + num(sy(it->lo95)) + " ";
    out << "<polygon points=\"" << band << "\" fill=\"#b8e0b8\" stroke=\"none\"/>\n";
    std::string line;
    for (const auto& p : pts) line += num(sx(p.team_size)) + "," + num(sy(p.effect)) + " ";
    out << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"#1b7a1b\" stroke-width=\"2\"/>\n";
  } else {
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(sy(0)) << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
        << num(sy(0)) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& p : pts) {
      const char* colour = p.significance == Significance::kSignificant ? "#1b4f9c" : "#999999";
      out << "<line x1=\"" << num(sx(p.team_size)) << "\" y1=\"" << num(sy(p.lo95)) << "\" x2=\"" << num(sx(p.team_size))
          << "\" y2=\"" << num(sy(p.hi95)) << "\" stroke=\"" << colour << "\"/>\n";
      out << "<circle cx=\"" << num(sx(p.team_size)) << "\" cy=\"" << num(sy(p.effect)) << "\" r=\"3.5\" fill=\""
          << colour << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace dlab::cli
