#include "advped/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "advped/csv.hpp"

namespace advped {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  // Two decimals is plenty for pixel coordinates and keeps output stable.
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

// Maps data coordinates into the plot frame.
struct Frame {
  Range x, y;
  double w = kWidth, h = kHeight;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (w - kLeft - kRight); }
  double py(double v) const { return h - kBottom - (v - y.lo) / (y.hi - y.lo) * (h - kTop - kBottom); }
};

void open_doc(std::ostringstream& os, const Frame& f, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.w) << "\" height=\""
     << num(f.h) << "\" viewBox=\"0 0 " << num(f.w) << ' ' << num(f.h) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(f.w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
  const double x0 = kLeft, x1 = f.w - kRight, y0 = f.h - kBottom, y1 = kTop;
  os << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">"
     << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0) << "\"/>"
     << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1) << "\"/>"
     << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / 4.0;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / 4.0;
    os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
       << format_double(std::round(xv * 100) / 100) << "</text>\n";
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
       << format_double(std::round(yv * 100) / 100) << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.h - 12) << "\" text-anchor=\"middle\">"
     << escape(xl) << "</text>\n";
  os << "<text transform=\"translate(16," << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(yl) << "</text>\n";
  os << "</g>\n";
}

}  // namespace

std::string svg_reward_curves(const std::vector<CurveSeries>& series, const std::string& title) {
  Frame f;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      f.x.add(p.episode);
      f.y.add(p.ci_lo);
      f.y.add(p.ci_hi);
      f.y.add(p.mean);
    }
  }
  f.x.settle();
  f.y.settle();
  std::ostringstream os;
  open_doc(os, f, title);
  axes(os, f, "episode", "episode reward");
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& pts = series[k].points;
    if (pts.empty()) continue;
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto& p : pts) os << num(f.px(p.episode)) << ',' << num(f.py(p.ci_hi)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      os << num(f.px(it->episode)) << ',' << num(f.py(it->ci_lo)) << ' ';
    }
    os << "\"/>\n";
    os << "<polyline class=\"mean\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) os << num(f.px(p.episode)) << ',' << num(f.py(p.mean)) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << num(kLeft + 10) << "\" y=\"" << num(kTop + 14 + 16 * static_cast<double>(k))
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
       << escape(series[k].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram(const std::vector<double>& values, int bins, const std::string& title,
                          const std::string& x_label) {
  bins = std::max(bins, 1);
  Range r;
  for (double v : values) r.add(v);
  r.settle();
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    int b = static_cast<int>((v - r.lo) / (r.hi - r.lo) * bins);
    counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  Frame f;
  f.x = r;
  f.y.add(0);
  f.y.add(*std::max_element(counts.begin(), counts.end()));
  f.y.settle();
  std::ostringstream os;
  open_doc(os, f, title);
  axes(os, f, x_label, "episodes");
  const double bw = (r.hi - r.lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double x0 = f.px(r.lo + b * bw), x1 = f.px(r.lo + (b + 1) * bw);
    const double y0 = f.py(0), y1 = f.py(counts[static_cast<std::size_t>(b)]);
    os << "<rect class=\"bin\" x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\""
       << num(std::max(x1 - x0 - 1, 0.5)) << "\" height=\"" << num(y0 - y1)
       << "\" fill=\"#1f77b4\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_trajectory(const EpisodeRecord& ep, const WorldConfig& world) {
  Frame f;
  f.w = 760;
  f.h = 360;
  for (const auto& r : ep.rows) {
    f.x.add(r.x_ped);
    f.x.add(r.x_veh);
    f.y.add(r.y_ped);
    f.y.add(r.y_veh);
  }
  f.y.add(world.driveway_y_min - 3.0);
  f.y.add(world.driveway_y_max + 1.0);
  f.x.settle();
  f.y.settle();
  std::ostringstream os;
  open_doc(os, f, ep.collided ? "collision episode" : "no collision");
  const double xl = f.px(f.x.lo), xr = f.px(f.x.hi);
  const double dw_top = f.py(world.driveway_y_max), dw_bot = f.py(world.driveway_y_min);
  os << "<rect class=\"driveway\" x=\"" << num(xl) << "\" y=\"" << num(dw_top) << "\" width=\""
     << num(xr - xl) << "\" height=\"" << num(dw_bot - dw_top) << "\" fill=\"#dddddd\"/>\n";
  os << "<rect class=\"sidewalk\" x=\"" << num(xl) << "\" y=\"" << num(dw_bot) << "\" width=\""
     << num(xr - xl) << "\" height=\"" << num(f.py(f.y.lo) - dw_bot) << "\" fill=\"#f3ead2\"/>\n";
  axes(os, f, "x (m)", "y (m)");
  auto path = [&](const char* cls, const char* color, auto getx, auto gety) {
    os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : ep.rows) os << num(f.px(getx(r))) << ',' << num(f.py(gety(r))) << ' ';
    os << "\"/>\n";
  };
  path("vehicle", "#555555", [](const TrajectoryRow& r) { return r.x_veh; },
       [](const TrajectoryRow& r) { return r.y_veh; });
  path("pedestrian", "#d62728", [](const TrajectoryRow& r) { return r.x_ped; },
       [](const TrajectoryRow& r) { return r.y_ped; });
  if (ep.collided && !ep.rows.empty()) {
    const auto& last = ep.rows.back();
    os << "<circle class=\"impact\" cx=\"" << num(f.px(last.x_ped)) << "\" cy=\""
       << num(f.py(last.y_ped)) << "\" r=\"7\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace advped
