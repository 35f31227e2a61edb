#pragma once

#include <symwalk/core.hpp>
#include <symwalk/neighbor_index.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace symwalk {

/// A shape as a finite point set, optionally with unit normals.
template <int D>
struct PointCloud {
  static_assert(D == 2 || D == 3, "only 2D and 3D shapes are supported");

  std::vector<Vec<D>> points;
  std::optional<std::vector<Vec<D>>> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return normals.has_value(); }
};

/// Hyperplane {x : x.n = l} in Hesse normal form.
///
/// Canonical form has l >= 0; for l == 0 the first nonzero coordinate of n is
/// positive, so (n, 0) and (-n, 0) share one representative.
template <int D>
struct HoughPlane {
  Vec<D> normal = Vec<D>::UnitX();
  double offset = 0;

  HoughPlane canonical() const {
    HoughPlane p = *this;
    if (p.offset < 0) {
      p.offset = -p.offset;
      p.normal = -p.normal;
    } else if (p.offset == 0) {
      for (int i = 0; i < D; ++i) {
        if (p.normal[i] != 0) {
          if (p.normal[i] < 0) p.normal = -p.normal;
          break;
        }
      }
    }
    return p;
  }

  double signed_distance(const Vec<D>& x) const { return x.dot(normal) - offset; }
};

/// Mirror image of x across the plane: x + 2 (proj(x) - x).
template <int D>
Vec<D> reflect_point(const Vec<D>& x, const HoughPlane<D>& plane) {
  return x - 2.0 * plane.signed_distance(x) * plane.normal;
}

/// Uniform similarity x' = scale * (x - center).
template <int D>
struct Similarity {
  Vec<D> center = Vec<D>::Zero();
  double scale = 1;

  Vec<D> apply(const Vec<D>& x) const { return scale * (x - center); }

  HoughPlane<D> apply(const HoughPlane<D>& p) const {
    return HoughPlane<D>{p.normal, scale * (p.offset - center.dot(p.normal))}.canonical();
  }
};

/// Centroid-to-origin, uniform scale so the largest |coordinate| is 1.
template <int D>
Similarity<D> normalizing_transform(const PointCloud<D>& cloud) {
  require(!cloud.empty(), "empty shape");
  Vec<D> c = Vec<D>::Zero();
  for (const auto& p : cloud.points) c += p;
  c /= static_cast<double>(cloud.size());
  double m = 0;
  for (const auto& p : cloud.points) m = std::max(m, (p - c).cwiseAbs().maxCoeff());
  return Similarity<D>{c, m > 0 ? 1.0 / m : 1.0};
}

template <int D>
PointCloud<D> apply(const Similarity<D>& t, const PointCloud<D>& cloud) {
  PointCloud<D> out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
  out.normals = cloud.normals;
  return out;
}

template <int D>
PointCloud<D> normalize(const PointCloud<D>& cloud) {
  return apply(normalizing_transform(cloud), cloud);
}

enum class NoiseMode { isotropic, along_normal };

/// Gaussian perturbation: isotropic adds level*g per coordinate, along_normal
/// adds level*g*n_i with one scalar g per point.
template <int D>
PointCloud<D> add_noise(const PointCloud<D>& cloud, double level, NoiseMode mode,
                        std::uint64_t seed) {
  require(level >= 0, "noise level must be non-negative");
  require(mode == NoiseMode::isotropic || cloud.has_normals(),
          "along_normal noise requires normals");
  PointCloud<D> out = cloud;
  if (level == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mode == NoiseMode::isotropic) {
      for (int d = 0; d < D; ++d) out.points[i][d] += level * gauss(rng);
    } else {
      out.points[i] += level * gauss(rng) * (*cloud.normals)[i];
    }
  }
  return out;
}

/// Two-sided mean nearest-neighbor distance.
template <int D>
double chamfer(const PointCloud<D>& a, const PointCloud<D>& b) {
  require(!a.empty() && !b.empty(), "chamfer of an empty shape");
  const NeighborIndex<D> ia(a.points), ib(b.points);
  double sa = 0, sb = 0;
  for (const auto& p : a.points) sa += ib.nearest(p).distance;
  for (const auto& p : b.points) sb += ia.nearest(p).distance;
  return sa / static_cast<double>(a.size()) + sb / static_cast<double>(b.size());
}

/// Mean distance from each point to its nearest other point.
template <int D>
double mean_spacing(const NeighborIndex<D>& index) {
  if (index.size() < 2) return 0;
  double s = 0;
  for (std::size_t i = 0; i < index.size(); ++i) s += index.nearest(index.point(i), i).distance;
  return s / static_cast<double>(index.size());
}

}  // namespace symwalk
