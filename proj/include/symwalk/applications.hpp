#pragma once

#include <symwalk/metrics.hpp>

namespace symwalk {

struct SymmetrizeConfig {
  double blend = 1.0;  // 0 leaves points alone, 1 replaces them by the pair average
  std::size_t iterations = 3;
  double support_eps = 0.02;

  void validate() const {
    require(blend >= 0 && blend <= 1, "blend must be in [0, 1]");
    require(support_eps > 0, "support_eps must be positive");
  }
};

/// Largest distance from a mirrored point to the shape.
template <int D>
double asymmetry_residual(const PointCloud<D>& cloud, const HoughPlane<D>& plane) {
  require(!cloud.empty(), "empty shape");
  const NeighborIndex<D> index(cloud.points);
  double worst = 0;
  for (const auto& p : cloud.points)
    worst = std::max(worst, index.nearest(reflect_point(p, plane)).distance);
  return worst;
}

/// Iterative pair averaging toward mirror symmetry about `plane`. Each
/// iteration is a Jacobi sweep: every point p whose mirror image has a
/// correspondent q within support_eps defines the symmetric average
/// a = (p + reflect(q)) / 2, and both ends of the pair move: p toward a, q
/// toward reflect(a). A point in several pairs takes the mean of its targets.
template <int D>
PointCloud<D> symmetrize(const PointCloud<D>& cloud, const HoughPlane<D>& plane,
                         const SymmetrizeConfig& cfg) {
  cfg.validate();
  PointCloud<D> cur = cloud;
  if (cloud.empty()) return cur;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const NeighborIndex<D> index(cur.points);
    std::vector<std::size_t> match(cur.size(), none);
    parallel_for(cur.size(), [&](std::size_t i) {
      const auto hit = index.nearest(reflect_point(cur.points[i], plane));
      if (hit.distance < cfg.support_eps) match[i] = hit.index;
    });
    std::vector<Vec<D>> target(cur.size(), Vec<D>::Zero());
    std::vector<int> count(cur.size(), 0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (match[i] == none) continue;
      const std::size_t j = match[i];
      const Vec<D> avg = 0.5 * (cur.points[i] + reflect_point(cur.points[j], plane));
      target[i] += avg;
      ++count[i];
      target[j] += reflect_point(avg, plane);
      ++count[j];
    }
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (count[i]) cur.points[i] = (1 - cfg.blend) * cur.points[i] + cfg.blend * target[i] / count[i];
  }
  return cur;
}

/// Compression driven by detected symmetries, in significance order, with the
/// point set after each stage for rendering.
template <int D>
struct SequentialCompression {
  Compressed<D> compressed;
  std::vector<PointCloud<D>> snapshots;  // [0] is the input, then one per stage
  std::vector<std::vector<std::size_t>> removed;  // original indices dropped at each stage
};

template <int D>
SequentialCompression<D> sequential_compress(const PointCloud<D>& cloud,
                                             const std::vector<SymmetryResult<D>>& results,
                                             double support_eps) {
  SequentialCompression<D> out;
  out.compressed = compress(cloud, planes_of(results), support_eps);
  std::vector<char> alive(cloud.size(), 1);
  out.snapshots.push_back(PointCloud<D>{cloud.points, std::nullopt});
  for (const auto& st : out.compressed.stages) {
    std::vector<std::size_t> gone;
    for (const auto& pr : st.pairs) {
      alive[pr.second] = 0;
      gone.push_back(pr.second);
    }
    PointCloud<D> snap;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (alive[i]) snap.points.push_back(cloud.points[i]);
    out.snapshots.push_back(std::move(snap));
    out.removed.push_back(std::move(gone));
  }
  return out;
}

}  // namespace symwalk
