#include "aewb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

#include "aewb/errors.hpp"

namespace aewb {

namespace {

// Plot area inside the 640x480 canvas.
constexpr double kLeft = 60.0, kRight = 620.0, kTop = 20.0, kBottom = 440.0;

struct Range {
  double lo = 0.0, hi = 0.0;
  // Maps lo..hi onto a..b; a degenerate range maps to the midpoint.
  double map(double v, double a, double b) const {
    if (hi <= lo) return (a + b) / 2.0;
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

Range range_of(const std::vector<PlotPoint>& pts, double PlotPoint::*m) {
  Range r{pts[0].*m, pts[0].*m};
  for (const auto& p : pts) {
    r.lo = std::min(r.lo, p.*m);
    r.hi = std::max(r.hi, p.*m);
  }
  return r;
}

void appendf(std::string& out, const char* fmt, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  va_end(ap);
  out += buf;
}

std::string open_with_axes(const Range& rx, const Range& ry) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  appendf(s, "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n",
          kLeft, kBottom, kRight, kBottom);
  appendf(s, "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n",
          kLeft, kTop, kLeft, kBottom);
  appendf(s, "<text x=\"%.0f\" y=\"456\" font-size=\"12\">%.4g</text>\n", kLeft, rx.lo);
  appendf(s, "<text x=\"%.0f\" y=\"456\" font-size=\"12\" text-anchor=\"end\">%.4g</text>\n",
          kRight, rx.hi);
  appendf(s, "<text x=\"56\" y=\"%.0f\" font-size=\"12\" text-anchor=\"end\">%.4g</text>\n",
          kBottom, ry.lo);
  appendf(s, "<text x=\"56\" y=\"%.0f\" font-size=\"12\" text-anchor=\"end\">%.4g</text>\n",
          kTop + 12.0, ry.hi);
  return s;
}

// Blue (#2166ac) to red (#b2182b), rounded to integer channels.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const long r = std::lround(33.0 + t * (178.0 - 33.0));
  const long g = std::lround(102.0 + t * (24.0 - 102.0));
  const long b = std::lround(172.0 + t * (43.0 - 172.0));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rgb(%ld,%ld,%ld)", r, g, b);
  return buf;
}

}  // namespace

std::string svg_scatter(const std::vector<PlotPoint>& points) {
  if (points.empty()) throw ConfigError("svg_scatter: empty point table");
  const Range rx = range_of(points, &PlotPoint::x);
  const Range ry = range_of(points, &PlotPoint::y);
  const Range rv = range_of(points, &PlotPoint::value);
  std::string s = open_with_axes(rx, ry);
  for (const auto& p : points) {
    const double t = rv.hi > rv.lo ? (p.value - rv.lo) / (rv.hi - rv.lo) : 0.5;
    appendf(s, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n",
            rx.map(p.x, kLeft, kRight), ry.map(p.y, kBottom, kTop), ramp_color(t).c_str());
  }
  s += "</svg>\n";
  return s;
}

std::string svg_polyline(const std::vector<PlotPoint>& points) {
  if (points.empty()) throw ConfigError("svg_polyline: empty point table");
  const Range rx = range_of(points, &PlotPoint::x);
  const Range ry = range_of(points, &PlotPoint::y);
  std::string s = open_with_axes(rx, ry);
  s += "<polyline fill=\"none\" stroke=\"rgb(33,102,172)\" stroke-width=\"2\" points=\"";
  for (size_t i = 0; i < points.size(); ++i) {
    appendf(s, i ? " %.2f,%.2f" : "%.2f,%.2f", rx.map(points[i].x, kLeft, kRight),
            ry.map(points[i].y, kBottom, kTop));
  }
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace aewb
