#pragma once

#include <symwalk/io.hpp>

#include <array>
#include <map>

namespace symwalk {

template <int D>
struct RenderInput {
  PointCloud<D> cloud;
  std::vector<SymmetryResult<D>> results;
  std::optional<TransformSpace<D>> space;
  std::vector<typename WalkerTrace<D>::Record> trace;
  double k = 0;  // invalid-ball radius drawn in the space panel; from `space` when present
};

namespace detail {

inline constexpr double kPanel = 360;  // panel edge in px
inline constexpr double kMargin = 20;

inline const char* palette(std::size_t i) {
  static const std::array<const char*, 8> colors = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                                     "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  return colors[i % colors.size()];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Maps a square data window [-half, half]^2 onto one panel.
struct Panel {
  double x0 = 0, y0 = 0;
  double half = 1;
  std::string title;

  double px(double x) const { return x0 + kMargin + (x + half) / (2 * half) * (kPanel - 2 * kMargin); }
  double py(double y) const { return y0 + kMargin + (half - y) / (2 * half) * (kPanel - 2 * kMargin); }
  double scale() const { return (kPanel - 2 * kMargin) / (2 * half); }
};

class Svg {
 public:
  void frame(const Panel& p) {
    body_ += "<rect x=\"" + num(p.x0) + "\" y=\"" + num(p.y0) + "\" width=\"" + num(kPanel) +
             "\" height=\"" + num(kPanel) + "\" fill=\"white\" stroke=\"#999\"/>\n";
    if (!p.title.empty())
      body_ += "<text x=\"" + num(p.x0 + 6) + "\" y=\"" + num(p.y0 + 14) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">" + p.title + "</text>\n";
  }
  void dot(const Panel& p, double x, double y, double r, const std::string& color, double opacity = 1) {
    body_ += "<circle cx=\"" + num(p.px(x)) + "\" cy=\"" + num(p.py(y)) + "\" r=\"" + num(r) +
             "\" fill=\"" + color + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
  }
  void ring(const Panel& p, double x, double y, double radius, const std::string& color) {
    body_ += "<circle cx=\"" + num(p.px(x)) + "\" cy=\"" + num(p.py(y)) + "\" r=\"" +
             num(radius * p.scale()) + "\" fill=\"#eee\" stroke=\"" + color + "\" stroke-dasharray=\"4 3\"/>\n";
  }
  void line(const Panel& p, double ax, double ay, double bx, double by, const std::string& color,
            double width) {
    body_ += "<line x1=\"" + num(p.px(ax)) + "\" y1=\"" + num(p.py(ay)) + "\" x2=\"" + num(p.px(bx)) +
             "\" y2=\"" + num(p.py(by)) + "\" stroke=\"" + color + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }
  void polyline(const Panel& p, const std::vector<std::array<double, 2>>& pts, const std::string& color) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"0.8\" stroke-opacity=\"0.6\" points=\"";
    for (const auto& q : pts) body_ += num(p.px(q[0])) + "," + num(p.py(q[1])) + " ";
    body_ += "\"/>\n";
  }
  // Clip of {a x + b y = c} against the panel window.
  void infinite_line(const Panel& p, double a, double b, double c, const std::string& color) {
    const double h = p.half;
    std::vector<std::array<double, 2>> hits;
    if (std::abs(b) > 1e-12)
      for (double x : {-h, h}) {
        const double y = (c - a * x) / b;
        if (std::abs(y) <= h + 1e-9) hits.push_back({x, y});
      }
    if (std::abs(a) > 1e-12)
      for (double y : {-h, h}) {
        const double x = (c - b * y) / a;
        if (std::abs(x) <= h + 1e-9) hits.push_back({x, y});
      }
    if (hits.size() < 2) return;
    line(p, hits[0][0], hits[0][1], hits.back()[0], hits.back()[1], color, 1.6);
  }

  std::string finish(double width, double height) const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n" +
           body_ + "</svg>\n";
  }

 private:
  std::string body_;
};

template <int D>
double extent(const std::vector<Vec<D>>& pts, std::array<int, 2> axes) {
  double m = 0;
  for (const auto& p : pts) m = std::max({m, std::abs(p[axes[0]]), std::abs(p[axes[1]])});
  return m > 0 ? 1.1 * m : 1.0;
}

}  // namespace detail

/// Shape panels (one for 2D; xy, xz, yz projections for 3D) with each detected
/// plane drawn where it crosses the view plane, plus a transformation-space
/// panel when votes or trajectories are given.
template <int D>
std::string render_svg(const RenderInput<D>& in) {
  using detail::Panel;
  detail::Svg svg;
  std::vector<std::array<int, 2>> views;
  if constexpr (D == 2) {
    views = {{0, 1}};
  } else {
    views = {{0, 1}, {0, 2}, {1, 2}};
  }
  static const char* names = "xyz";
  double x0 = 0;
  for (const auto& ax : views) {
    Panel p{x0, 0, detail::extent<D>(in.cloud.points, ax), ""};
    if constexpr (D == 3) p.title = std::string(1, names[ax[0]]) + names[ax[1]];
    svg.frame(p);
    for (const auto& q : in.cloud.points) svg.dot(p, q[ax[0]], q[ax[1]], 1.6, "#333");
    for (std::size_t i = 0; i < in.results.size(); ++i) {
      const auto& r = in.results[i];
      if (r.kind != SymmetryKind::reflective) continue;
      // the plane meets the view plane (other coordinates at 0) in a line
      svg.infinite_line(p, r.plane.normal[ax[0]], r.plane.normal[ax[1]], r.plane.offset, detail::palette(i));
    }
    x0 += detail::kPanel;
  }

  const bool has_space = (in.space && !in.space->samples.empty()) || !in.trace.empty();
  if (has_space) {
    const double k = in.space ? in.space->k : in.k;
    std::vector<Vec<D>> all;
    if (in.space) all = in.space->samples;
    for (const auto& r : in.trace) all.push_back(r.x);
    Panel p{x0, 0, std::max(detail::extent<D>(all, {0, 1}), 1.1 * k), "transformation space"};
    svg.frame(p);
    if (k > 0) svg.ring(p, 0, 0, k, "#888");
    if (in.space)
      for (const auto& s : in.space->samples) svg.dot(p, s[0], s[1], 1.0, "#1f77b4", 0.35);
    std::map<std::size_t, std::vector<std::array<double, 2>>> paths;
    for (const auto& r : in.trace) paths[r.walker].push_back({r.x[0], r.x[1]});
    for (const auto& [w, pts] : paths) {
      svg.polyline(p, pts, "#ff7f0e");
      svg.dot(p, pts.back()[0], pts.back()[1], 2.0, "#ff7f0e");
    }
    for (std::size_t i = 0; i < in.results.size(); ++i) {
      const auto& r = in.results[i];
      if (r.kind != SymmetryKind::reflective || k <= 0) continue;
      const Vec<D> e = embed_plane(r.plane, k);
      svg.dot(p, e[0], e[1], 4.0, detail::palette(i));
    }
    x0 += detail::kPanel;
  }
  return svg.finish(x0, detail::kPanel);
}

}  // namespace symwalk
