#pragma once

// Deterministic SVG rendering of planar instances and their solutions: demand
// points, the separating line, the facility, and the per-point shortest paths
// through their gates.

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "refloc/locate.hpp"

namespace refloc {

namespace detail {

class SvgCanvas {
 public:
  SvgCanvas(double xmin, double xmax, double ymin, double ymax, int px)
      : xmin_(xmin), ymin_(ymin), px_(px) {
    scale_ = px / std::max(xmax - xmin, ymax - ymin);
    height_ = static_cast<int>((ymax - ymin) * scale_) + 1;
  }
  double X(double x) const { return (x - xmin_) * scale_; }
  double Y(double y) const { return height_ - (y - ymin_) * scale_; }
  int width() const { return px_ + 1; }
  int height() const { return height_; }

 private:
  double xmin_, ymin_, scale_;
  int px_, height_;
};

inline std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

// Planar render of a solved instance. Gate polylines are drawn from the
// facility through the recorded gates to each demand point.
inline std::string render_svg(const LocationInstance& inst, const LocateResult& res) {
  if (inst.dim() != 2) throw std::invalid_argument("render_svg: only planar instances");
  double xmin = res.x_star[0], xmax = res.x_star[0];
  double ymin = res.x_star[1], ymax = res.x_star[1];
  auto absorb = [&](const Vec& p) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  };
  for (const auto& p : inst.points_a) absorb(p.coords);
  for (const auto& p : inst.points_b) absorb(p.coords);
  const double pad = 0.07 * std::max({xmax - xmin, ymax - ymin, 1.0});
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
  detail::SvgCanvas cv(xmin, xmax, ymin, ymax, 640);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cv.width() << "\" height=\""
     << cv.height() << "\" viewBox=\"0 0 " << cv.width() << " " << cv.height() << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Separating line clipped to the frame via its tangent parametrization.
  {
    const Mat T = inst.h.tangent_basis();
    const Vec x0 = inst.h.base_point();
    const Vec t = T.col(0);
    const double diag = std::hypot(xmax - xmin, ymax - ymin);
    const Vec c = x0 + t * t.dot(((Vec(2) << 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)).finished() - x0));
    const Vec p1 = c - diag * t, p2 = c + diag * t;
    os << "<line x1=\"" << detail::fmt2(cv.X(p1[0])) << "\" y1=\"" << detail::fmt2(cv.Y(p1[1]))
       << "\" x2=\"" << detail::fmt2(cv.X(p2[0])) << "\" y2=\"" << detail::fmt2(cv.Y(p2[1]))
       << "\" stroke=\"black\" stroke-width=\"1.2\"/>\n";
  }

  // Shortest paths: facility -> gates -> demand point.
  const int n = static_cast<int>(inst.total_points());
  for (int i = 0; i < n; ++i) {
    const DemandPoint& p = i < static_cast<int>(inst.points_a.size())
                               ? inst.points_a[i]
                               : inst.points_b[i - inst.points_a.size()];
    os << "<polyline fill=\"none\" stroke=\"#999999\" stroke-width=\"0.8\" points=\"";
    os << detail::fmt2(cv.X(res.x_star[0])) << "," << detail::fmt2(cv.Y(res.x_star[1]));
    if (i < static_cast<int>(res.per_point_gates.size())) {
      const auto& gates = res.per_point_gates[i];
      // Gate lists run from the side-A endpoint; emit them facility-first.
      const bool facility_first = res.side == Side::A;
      if (facility_first)
        for (auto it = gates.begin(); it != gates.end(); ++it)
          os << " " << detail::fmt2(cv.X((*it)[0])) << "," << detail::fmt2(cv.Y((*it)[1]));
      else
        for (auto it = gates.rbegin(); it != gates.rend(); ++it)
          os << " " << detail::fmt2(cv.X((*it)[0])) << "," << detail::fmt2(cv.Y((*it)[1]));
    }
    os << " " << detail::fmt2(cv.X(p.coords[0])) << "," << detail::fmt2(cv.Y(p.coords[1]))
       << "\"/>\n";
  }

  // Gates as small open circles.
  for (const auto& gates : res.per_point_gates)
    for (const auto& g : gates)
      os << "<circle cx=\"" << detail::fmt2(cv.X(g[0])) << "\" cy=\"" << detail::fmt2(cv.Y(g[1]))
         << "\" r=\"2.5\" fill=\"white\" stroke=\"black\" stroke-width=\"0.8\"/>\n";

  // Demand points: filled, colored by side.
  for (const auto& p : inst.points_a)
    os << "<circle cx=\"" << detail::fmt2(cv.X(p.coords[0])) << "\" cy=\""
       << detail::fmt2(cv.Y(p.coords[1])) << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
  for (const auto& p : inst.points_b)
    os << "<circle cx=\"" << detail::fmt2(cv.X(p.coords[0])) << "\" cy=\""
       << detail::fmt2(cv.Y(p.coords[1])) << "\" r=\"3.5\" fill=\"#d62728\"/>\n";

  // Facility as a filled triangle.
  {
    const double cx = cv.X(res.x_star[0]), cy = cv.Y(res.x_star[1]);
    os << "<polygon points=\"" << detail::fmt2(cx) << "," << detail::fmt2(cy - 5.5) << " "
       << detail::fmt2(cx - 5.0) << "," << detail::fmt2(cy + 4.0) << " " << detail::fmt2(cx + 5.0)
       << "," << detail::fmt2(cy + 4.0) << "\" fill=\"black\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace refloc
