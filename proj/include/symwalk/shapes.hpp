#pragma once

#include <symwalk/geometry.hpp>

#include <numbers>
#include <string>
#include <string_view>

namespace symwalk {

/// Synthetic shapes with analytically known symmetries.
enum class ShapeKind { square, regular_ngon, letter_like, cube, cylinder, composite };

struct ShapeParams {
  std::size_t points = 0;  // 0 selects the per-kind default
  int sides = 3;           // regular_ngon
  double shift = 0.4;      // composite: displacement between motif copies (before normalization)
};

/// A normalized shape and its ground-truth symmetries in the same frame.
template <int D>
struct LabeledShape {
  PointCloud<D> cloud;
  std::vector<HoughPlane<D>> planes;
  std::vector<Vec<D>> translations;
};

inline ShapeKind parse_shape_kind(std::string_view s) {
  if (s == "square") return ShapeKind::square;
  if (s == "regular_ngon" || s == "ngon") return ShapeKind::regular_ngon;
  if (s == "letter_like" || s == "letter") return ShapeKind::letter_like;
  if (s == "cube") return ShapeKind::cube;
  if (s == "cylinder") return ShapeKind::cylinder;
  if (s == "composite") return ShapeKind::composite;
  throw Error(ErrorKind::invalid_argument, "unknown shape kind '" + std::string(s) + "'");
}

inline int shape_dim(ShapeKind k) {
  return (k == ShapeKind::cube || k == ShapeKind::cylinder) ? 3 : 2;
}

namespace detail {

// Uniform arc-length samples at (i + 1/2) * L / n along a polyline, with
// per-segment left-hand normals (outward for counter-clockwise loops).
inline void sample_polyline(const std::vector<Vec<2>>& verts, bool closed, std::size_t n,
                            PointCloud<2>& out) {
  std::vector<double> seg_len;
  double total = 0;
  const std::size_t segs = closed ? verts.size() : verts.size() - 1;
  for (std::size_t s = 0; s < segs; ++s) {
    seg_len.push_back((verts[(s + 1) % verts.size()] - verts[s]).norm());
    total += seg_len.back();
  }
  if (!out.normals) out.normals.emplace();
  std::size_t s = 0;
  double seg_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * total / static_cast<double>(n);
    while (s + 1 < segs && t > seg_start + seg_len[s]) seg_start += seg_len[s++];
    const Vec<2> a = verts[s], b = verts[(s + 1) % verts.size()];
    const Vec<2> dir = (b - a) / seg_len[s];
    out.points.push_back(a + (t - seg_start) * dir);
    out.normals->push_back(Vec<2>(dir.y(), -dir.x()));
  }
}

inline void sample_arc(const Vec<2>& c, double r, double a0, double a1, std::size_t n,
                       PointCloud<2>& out) {
  if (!out.normals) out.normals.emplace();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = a0 + (a1 - a0) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const Vec<2> u(std::cos(a), std::sin(a));
    out.points.push_back(c + r * u);
    out.normals->push_back(u);
  }
}

template <int D>
LabeledShape<D> finish(PointCloud<D> raw, std::vector<HoughPlane<D>> planes,
                       std::vector<Vec<D>> shifts = {}) {
  const Similarity<D> t = normalizing_transform(raw);
  LabeledShape<D> out;
  out.cloud = apply(t, raw);
  for (const auto& p : planes) out.planes.push_back(t.apply(p));
  for (const auto& v : shifts) out.translations.push_back(t.scale * v);
  return out;
}

inline HoughPlane<2> line_through_origin(double axis_angle) {
  // normal is perpendicular to the axis direction
  return HoughPlane<2>{Vec<2>(-std::sin(axis_angle), std::cos(axis_angle)), 0.0}.canonical();
}

}  // namespace detail

inline LabeledShape<2> gen_shape_2d(ShapeKind kind, const ShapeParams& params = {}) {
  using std::numbers::pi;
  PointCloud<2> raw;
  std::vector<HoughPlane<2>> planes;
  std::vector<Vec<2>> shifts;
  switch (kind) {
    case ShapeKind::square: {
      const std::size_t n = params.points ? params.points : 400;
      require(n >= 4 && n % 4 == 0, "square needs a positive multiple of 4 points");
      detail::sample_polyline({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, true, n, raw);
      for (int i = 0; i < 4; ++i) planes.push_back(detail::line_through_origin(i * pi / 4));
      break;
    }
    case ShapeKind::regular_ngon: {
      const int m = params.sides;
      require(m >= 3, "regular_ngon needs at least 3 sides");
      std::size_t n = params.points ? params.points : 100 * static_cast<std::size_t>(m);
      n -= n % static_cast<std::size_t>(m);
      require(n > 0, "too few points for regular_ngon");
      std::vector<Vec<2>> verts;
      for (int i = 0; i < m; ++i) {
        const double a = pi / 2 + 2 * pi * i / m;
        verts.emplace_back(std::cos(a), std::sin(a));
      }
      detail::sample_polyline(verts, true, n, raw);
      for (int i = 0; i < m; ++i) planes.push_back(detail::line_through_origin(pi / 2 + pi * i / m));
      break;
    }
    case ShapeKind::letter_like: {
      // "B": straight stem plus two unequal bowls; only the stem is mirror
      // symmetric about y = 0.
      const std::size_t n = params.points ? params.points : 400;
      require(n >= 10, "letter_like needs at least 10 points");
      const double stem = 2.0, top = pi * 0.5, bottom = pi * 0.55, total = stem + top + bottom;
      const auto n_stem = static_cast<std::size_t>(std::lround(n * stem / total));
      const auto n_top = static_cast<std::size_t>(std::lround(n * top / total));
      const std::size_t n_bottom = n - n_stem - n_top;
      detail::sample_polyline({{-0.6, 1.0}, {-0.6, -1.0}}, false, n_stem, raw);
      detail::sample_arc({-0.6, 0.5}, 0.5, pi / 2, -pi / 2, n_top, raw);
      detail::sample_arc({-0.6, -0.45}, 0.55, pi / 2, -pi / 2, n_bottom, raw);
      planes.push_back(HoughPlane<2>{Vec<2>(0, 1), 0.0});
      break;
    }
    case ShapeKind::composite: {
      const std::size_t n = params.points ? params.points : 400;
      require(n >= 4 && n % 2 == 0, "composite needs an even number of points");
      const std::vector<Vec<2>> motif{{0, -1}, {0, 1}, {0.3, 0.7}, {0.1, 0.3}, {0.3, -0.2}};
      PointCloud<2> one;
      detail::sample_polyline(motif, false, n / 2, one);
      raw = one;
      const Vec<2> shift(params.shift, 0);
      for (std::size_t i = 0; i < one.size(); ++i) {
        raw.points.push_back(one.points[i] + shift);
        raw.normals->push_back((*one.normals)[i]);
      }
      shifts.push_back(shift);
      break;
    }
    default:
      throw Error(ErrorKind::invalid_argument, "shape kind is not two-dimensional");
  }
  return detail::finish<2>(std::move(raw), std::move(planes), std::move(shifts));
}

inline LabeledShape<3> gen_shape_3d(ShapeKind kind, const ShapeParams& params = {}) {
  using std::numbers::pi;
  PointCloud<3> raw;
  raw.normals.emplace();
  std::vector<HoughPlane<3>> planes;
  switch (kind) {
    case ShapeKind::cube: {
      const std::size_t n = params.points ? params.points : 2400;
      const auto g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n) / 6.0)));
      require(g >= 1, "too few points for cube");
      for (int axis = 0; axis < 3; ++axis) {
        for (double side : {-1.0, 1.0}) {
          for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) {
              Vec<3> p;
              p[axis] = side;
              p[(axis + 1) % 3] = -1 + 2 * (i + 0.5) / g;
              p[(axis + 2) % 3] = -1 + 2 * (j + 0.5) / g;
              raw.points.push_back(p);
              Vec<3> nrm = Vec<3>::Zero();
              nrm[axis] = side;
              raw.normals->push_back(nrm);
            }
          }
        }
      }
      const double s = 1 / std::sqrt(2.0);
      for (const Vec<3>& nrm :
           {Vec<3>(1, 0, 0), Vec<3>(0, 1, 0), Vec<3>(0, 0, 1), Vec<3>(s, s, 0), Vec<3>(s, -s, 0),
            Vec<3>(s, 0, s), Vec<3>(s, 0, -s), Vec<3>(0, s, s), Vec<3>(0, s, -s)})
        planes.push_back(HoughPlane<3>{nrm, 0.0}.canonical());
      break;
    }
    case ShapeKind::cylinder: {
      // Unit radius, z in [-1, 1]; about 2/3 of the samples on the side wall.
      const std::size_t n = params.points ? params.points : 2400;
      const int m = 2 * std::max(2, static_cast<int>(std::lround(std::sqrt(n / 2.0) / 2)));
      const int side_rings = std::max(1, static_cast<int>(std::lround(2.0 * n / 3.0 / m)));
      const int cap_rings = std::max(1, static_cast<int>(std::lround(n / 6.0 / m)));
      for (int r = 0; r < side_rings; ++r) {
        const double z = -1 + 2 * (r + 0.5) / side_rings;
        for (int j = 0; j < m; ++j) {
          const double a = 2 * pi * (j + 0.5) / m;
          raw.points.emplace_back(std::cos(a), std::sin(a), z);
          raw.normals->emplace_back(std::cos(a), std::sin(a), 0);
        }
      }
      for (double z : {-1.0, 1.0}) {
        for (int r = 0; r < cap_rings; ++r) {
          const double rad = (r + 0.5) / cap_rings;
          for (int j = 0; j < m; ++j) {
            const double a = 2 * pi * (j + 0.5) / m;
            raw.points.emplace_back(rad * std::cos(a), rad * std::sin(a), z);
            raw.normals->emplace_back(0, 0, z);
          }
        }
      }
      // The wall admits a continuous family; these are the sampled-exact ones.
      planes = {HoughPlane<3>{Vec<3>(0, 0, 1), 0.0}, HoughPlane<3>{Vec<3>(1, 0, 0), 0.0},
                HoughPlane<3>{Vec<3>(0, 1, 0), 0.0}};
      break;
    }
    default:
      throw Error(ErrorKind::invalid_argument, "shape kind is not three-dimensional");
  }
  return detail::finish<3>(std::move(raw), std::move(planes));
}

}  // namespace symwalk
