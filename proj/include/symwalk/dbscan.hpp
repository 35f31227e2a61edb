#pragma once

#include <symwalk/geodesic.hpp>

#include <deque>
#include <vector>

namespace symwalk {

struct DbscanConfig {
  double eps = 0.05;
  std::size_t min_pts = 5;  // neighborhood size (self included) that makes a core point
};

struct Clustering {
  static constexpr int kNoise = -1;
  std::vector<int> labels;                        // cluster id per point, or kNoise
  std::vector<std::vector<std::size_t>> clusters;  // members in discovery order; [0] is a core point
};

/// Classic density clustering. `metric` picks the distance: euclidean, or the
/// geodesic premetric of `geo` (which identifies antipodes on the sphere).
template <int D>
Clustering dbscan(const std::vector<Vec<D>>& points, const DbscanConfig& cfg,
                  const GeodesicSpace& geo) {
  require(cfg.eps > 0, "dbscan eps must be positive");
  require(cfg.min_pts >= 1, "dbscan min_pts must be >= 1");
  Clustering out;
  out.labels.assign(points.size(), Clustering::kNoise);
  if (points.empty()) return out;

  const NeighborIndex<D> index(points);
  const bool curved = geo.mode == Metric::riemannian;
  auto neighbors = [&](std::size_t i) {
    std::vector<std::size_t> ids;
    index.radius(points[i], cfg.eps, ids);
    if (!curved) return ids;
    // geodesic <= eps implies euclidean distance to x or -x <= eps
    index.radius(Vec<D>(-points[i]), cfg.eps, ids);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::size_t> kept;
    for (std::size_t j : ids)
      if (j == i || geodesic(points[i], points[j], geo) <= cfg.eps) kept.push_back(j);
    return kept;
  };

  std::vector<bool> visited(points.size(), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (visited[i]) continue;
    visited[i] = true;
    auto seeds = neighbors(i);
    if (seeds.size() < cfg.min_pts) continue;
    const int id = static_cast<int>(out.clusters.size());
    out.clusters.emplace_back();
    out.labels[i] = id;
    out.clusters.back().push_back(i);
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (out.labels[j] == Clustering::kNoise) {
        out.labels[j] = id;  // border or core, claimed by this cluster
        out.clusters.back().push_back(j);
      }
      if (visited[j]) continue;
      visited[j] = true;
      const auto more = neighbors(j);
      if (more.size() >= cfg.min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
  }
  return out;
}

}  // namespace symwalk
