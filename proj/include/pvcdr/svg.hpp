#pragma once

#include <algorithm>
#include <charconv>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pvcdr/models.hpp"

namespace pvcdr {

// Two-panel scatterplot writer. SVG keeps the output deterministic byte for
// byte, diffable, and free of raster dependencies.

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

struct AxisRange {
  double lo = 0.0, hi = 1.0;

  static AxisRange of(const Vector& v) {
    AxisRange r{v.minCoeff(), v.maxCoeff()};
    const double pad = r.hi > r.lo ? 0.05 * (r.hi - r.lo) : 1.0;
    r.lo -= pad;
    r.hi += pad;
    return r;
  }

  double to_px(double v, double px_lo, double px_hi) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

inline void svg_panel(std::ostringstream& os, const std::string& id, double x0,
                      const Vector& h, const Vector& v, const std::string& hlabel,
                      const std::string& vlabel) {
  const double w = 330.0, ht = 300.0, y0 = 30.0;
  const AxisRange hr = AxisRange::of(h), vr = AxisRange::of(v);
  os << "<g id=\"" << id << "\">\n";
  os << "<rect x=\"" << svg_num(x0) << "\" y=\"" << svg_num(y0) << "\" width=\""
     << svg_num(w) << "\" height=\"" << svg_num(ht)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << svg_num(x0 + w / 2) << "\" y=\"" << svg_num(y0 + ht + 35)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << hlabel << "</text>\n";
  os << "<text x=\"" << svg_num(x0 - 38) << "\" y=\"" << svg_num(y0 + ht / 2)
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 "
     << svg_num(x0 - 38) << " " << svg_num(y0 + ht / 2) << ")\">" << vlabel
     << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double hv = hr.lo + (hr.hi - hr.lo) * t / 4.0;
    const double vv = vr.lo + (vr.hi - vr.lo) * t / 4.0;
    const double px = hr.to_px(hv, x0, x0 + w);
    const double py = vr.to_px(vv, y0 + ht, y0);
    os << "<line x1=\"" << svg_num(px) << "\" y1=\"" << svg_num(y0 + ht) << "\" x2=\""
       << svg_num(px) << "\" y2=\"" << svg_num(y0 + ht + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(px) << "\" y=\"" << svg_num(y0 + ht + 18)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << svg_num(hv) << "</text>\n";
    os << "<line x1=\"" << svg_num(x0 - 5) << "\" y1=\"" << svg_num(py) << "\" x2=\""
       << svg_num(x0) << "\" y2=\"" << svg_num(py) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << svg_num(x0 - 8) << "\" y=\"" << svg_num(py + 3)
       << "\" text-anchor=\"end\" font-size=\"10\">" << svg_num(vv) << "</text>\n";
  }
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    os << "<circle cx=\"" << svg_num(hr.to_px(h(i), x0, x0 + w)) << "\" cy=\""
       << svg_num(vr.to_px(v(i), y0 + ht, y0)) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  }
  os << "</g>\n";
}

}  // namespace detail

/// Left panel: first coordinate of X against Y. Right panel: the projection
/// gamma'X against Y. Requires a one-column frame (d = 1).
inline std::string two_panel_scatter_svg(const Dataset& data, const Vector& gamma,
                                         const std::string& right_label = "g'X") {
  data.validate();
  if (gamma.size() != data.p())
    throw std::invalid_argument("two_panel_scatter_svg: gamma dimension mismatch");
  const Vector x1 = data.x.col(0);
  const Vector proj = data.x * gamma;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"390\" "
        "viewBox=\"0 0 860 390\">\n";
  os << "<rect width=\"860\" height=\"390\" fill=\"white\"/>\n";
  detail::svg_panel(os, "panel-left", 60.0, data.y, x1, "Y", "X1");
  detail::svg_panel(os, "panel-right", 490.0, data.y, proj, "Y", right_label);
  os << "</svg>\n";
  return os.str();
}

}  // namespace pvcdr
