#pragma once

#include <symwalk/geometry.hpp>

#include <numbers>
#include <random>
#include <string>
#include <utility>

namespace symwalk {

/// Plane that swaps p and q: normal along p - q through their midpoint.
template <int D>
HoughPlane<D> pair_to_plane(const Vec<D>& p, const Vec<D>& q) {
  const Vec<D> diff = p - q;
  const double len = diff.norm();
  require(len > 1e-12, "degenerate pair", ErrorKind::numerical);
  const Vec<D> n = diff / len;
  return HoughPlane<D>{n, 0.5 * (p + q).dot(n)}.canonical();
}

/// Shifts the plane outward by k so that every plane lands at ||x|| >= k.
/// sign(0) is taken as +1; canonical planes have l >= 0.
template <int D>
Vec<D> embed_plane(const HoughPlane<D>& plane, double k) {
  const double s = plane.offset < 0 ? -1.0 : 1.0;
  return plane.normal * (s * k + plane.offset);
}

/// Inverse of embed_plane. Points within 1e-6 inside the ball decode to l = 0.
template <int D>
HoughPlane<D> decode_sample(const Vec<D>& x, double k) {
  const double r = x.norm();
  require(r >= k - 1e-6 && r > 0, "inside invalid region", ErrorKind::numerical);
  return HoughPlane<D>{x / r, std::max(0.0, r - k)};
}

enum class SpaceKind { reflective, translational, rotational2d };

inline std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::reflective: return "reflective";
    case SpaceKind::translational: return "translational";
    case SpaceKind::rotational2d: return "rotational2d";
  }
  return "?";
}

inline SpaceKind parse_space_kind(const std::string& s) {
  if (s == "reflective") return SpaceKind::reflective;
  if (s == "translational") return SpaceKind::translational;
  if (s == "rotational2d") return SpaceKind::rotational2d;
  throw Error(ErrorKind::invalid_argument, "unknown transform kind '" + s + "'");
}

/// Vote cloud in an embedded transformation space of dimension D.
template <int D>
struct TransformSpace {
  SpaceKind kind = SpaceKind::reflective;
  double k = 0;  // invalid-ball radius; 0 for flat spaces
  std::vector<Vec<D>> samples;
};

namespace detail {

// Uniform index pairs with replacement, i != j and distinct coordinates.
template <int D>
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(const PointCloud<D>& cloud,
                                                              std::size_t count,
                                                              std::uint64_t seed) {
  require(cloud.size() >= 2, "cloud too small: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(count);
  std::size_t rejected = 0;
  while (pairs.size() < count) {
    const std::size_t i = pick(rng), j = pick(rng);
    if ((cloud.points[i] - cloud.points[j]).norm() <= 1e-12) {
      require(++rejected < 1000 + 100 * count, "cloud has no distinct point pairs");
      continue;
    }
    pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace detail

/// Reflective (Hough) vote space: one embedded plane per sampled pair.
template <int D>
TransformSpace<D> build_reflective_space(const PointCloud<D>& cloud, std::size_t num_pairs,
                                         double k, std::uint64_t seed) {
  require(k > 0, "invalid-ball radius k must be positive");
  require(num_pairs > 0, "num_pairs must be positive");
  const auto pairs = detail::sample_pairs(cloud, num_pairs, seed);
  TransformSpace<D> space{SpaceKind::reflective, k, std::vector<Vec<D>>(pairs.size())};
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [a, b] = pairs[i];
    space.samples[i] = embed_plane(pair_to_plane(cloud.points[a], cloud.points[b]), k);
  });
  return space;
}

/// Displacement votes q - p for ordered pairs; flat geometry (k = 0).
template <int D>
TransformSpace<D> build_translation_space(const PointCloud<D>& cloud, std::size_t num_pairs,
                                          std::uint64_t seed) {
  require(num_pairs > 0, "num_pairs must be positive");
  const auto pairs = detail::sample_pairs(cloud, num_pairs, seed);
  TransformSpace<D> space{SpaceKind::translational, 0.0, {}};
  space.samples.reserve(pairs.size());
  for (const auto& [a, b] : pairs) space.samples.push_back(cloud.points[b] - cloud.points[a]);
  return space;
}

/// Rotation as a composition of two reflections.
///
/// 2D: `point` is the center and `axis` is unused. 3D: rotation about the line
/// through `point` with unit direction `axis`. Angle in (0, 2*pi), right-handed
/// about `axis` (about +z in 2D).
template <int D>
struct Rotation {
  Vec<D> point = Vec<D>::Zero();
  Vec<D> axis = Vec<D>::Zero();
  double angle = 0;

  Vec<D> apply(const Vec<D>& x) const {
    const Vec<D> v = x - point;
    const double c = std::cos(angle), s = std::sin(angle);
    if constexpr (D == 2) {
      return point + Vec<2>(c * v.x() - s * v.y(), s * v.x() + c * v.y());
    } else {
      return point + c * v + s * axis.cross(v) + (1 - c) * axis.dot(v) * axis;
    }
  }
};

/// Reflection across p1 followed by reflection across p2.
template <int D>
Rotation<D> compose_rotation(const HoughPlane<D>& p1, const HoughPlane<D>& p2) {
  using std::numbers::pi;
  const double c = p1.normal.dot(p2.normal);
  require(std::abs(c) < 1 - 1e-9, "translation, not rotation: planes are parallel",
          ErrorKind::numerical);
  // Minimum-norm point on both planes, solved in span{n1, n2}.
  const double det = 1 - c * c;
  const double a = (p1.offset - c * p2.offset) / det;
  const double b = (p2.offset - c * p1.offset) / det;
  Rotation<D> rot;
  rot.point = a * p1.normal + b * p2.normal;
  if constexpr (D == 2) {
    const double cross = p1.normal.x() * p2.normal.y() - p1.normal.y() * p2.normal.x();
    double angle = 2 * std::atan2(cross, c);
    angle = std::fmod(angle, 2 * pi);
    if (angle <= 0) angle += 2 * pi;
    rot.angle = angle;
  } else {
    rot.axis = p1.normal.cross(p2.normal).normalized();
    rot.angle = 2 * std::acos(std::clamp(c, -1.0, 1.0));
  }
  return rot;
}

/// Scale applied to the angle coordinate of the 2D rotation embedding.
inline constexpr double kRotationAngleScale = 1.0 / std::numbers::pi;

inline Vec<3> embed_rotation(const Rotation<2>& r) {
  return Vec<3>(r.point.x(), r.point.y(), r.angle * kRotationAngleScale);
}

inline Rotation<2> decode_rotation(const Vec<3>& x) {
  Rotation<2> r;
  r.point = x.head<2>();
  r.angle = x.z() / kRotationAngleScale;
  return r;
}

/// 2D rotation votes (center, angle / pi): each vote composes the planes of two
/// independently sampled pairs. Near-parallel compositions are redrawn.
inline TransformSpace<3> build_rotation_space(const PointCloud<2>& cloud, std::size_t num_votes,
                                              std::uint64_t seed, double max_center = 2.0) {
  require(num_votes > 0, "num_votes must be positive");
  TransformSpace<3> space{SpaceKind::rotational2d, 0.0, {}};
  space.samples.reserve(num_votes);
  std::uint64_t round = 0;
  while (space.samples.size() < num_votes) {
    const auto pairs = detail::sample_pairs(cloud, 2 * num_votes, seed + 7919 * round++);
    for (std::size_t i = 0; i + 1 < pairs.size() && space.samples.size() < num_votes; i += 2) {
      const auto h1 = pair_to_plane(cloud.points[pairs[i].first], cloud.points[pairs[i].second]);
      const auto h2 =
          pair_to_plane(cloud.points[pairs[i + 1].first], cloud.points[pairs[i + 1].second]);
      if (std::abs(h1.normal.dot(h2.normal)) >= 1 - 1e-6) continue;
      const Rotation<2> r = compose_rotation(h1, h2);
      if (r.point.norm() > max_center) continue;
      space.samples.push_back(embed_rotation(r));
    }
    require(round < 64, "could not sample rotation votes", ErrorKind::numerical);
  }
  return space;
}

}  // namespace symwalk
