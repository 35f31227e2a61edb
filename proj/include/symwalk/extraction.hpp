#pragma once

#include <symwalk/dbscan.hpp>
#include <symwalk/langevin.hpp>

#include <algorithm>
#include <functional>

namespace symwalk {

enum class SymmetryKind { reflective, translational };

/// A detected symmetry with the shape points that agree with it.
template <int D>
struct SymmetryResult {
  SymmetryKind kind = SymmetryKind::reflective;
  HoughPlane<D> plane;           // reflective
  Vec<D> shift = Vec<D>::Zero();  // translational
  std::vector<std::size_t> support;      // largest connected component of raw_support
  std::vector<std::size_t> raw_support;  // every point whose image lands near the shape
  double significance = 0;               // |support| / |S|
  double raw_significance = 0;           // |raw_support| / |S|
  std::size_t cluster_size = 0;          // walkers (or votes) behind this mode

  Vec<D> map(const Vec<D>& x) const {
    return kind == SymmetryKind::reflective ? reflect_point(x, plane) : Vec<D>(x + shift);
  }
};

struct ExtractConfig {
  DbscanConfig dbscan;
  double support_eps = 0.02;
  double tau = 0.1;
  double connect_radius = 0;  // 0: eight times the mean nearest-neighbor spacing

  void validate() const {
    require(dbscan.eps > 0 && dbscan.min_pts >= 1, "invalid dbscan parameters");
    require(support_eps > 0, "support_eps must be positive");
    require(tau > 0 && tau <= 1, "tau must be in (0, 1]");
    require(connect_radius >= 0, "connect_radius must be non-negative");
  }
};

inline ExtractConfig default_extract_config(int dim, const LangevinConfig& lcfg) {
  ExtractConfig cfg;
  cfg.dbscan.eps = 2 * lcfg.kernel_size;
  cfg.dbscan.min_pts = std::max<std::size_t>(5, lcfg.num_walkers / 40);
  cfg.support_eps = dim == 2 ? 0.02 : 0.05;
  cfg.tau = 0.1;
  return cfg;
}

/// Shape-side data shared by support queries.
template <int D>
struct SupportContext {
  const PointCloud<D>* cloud = nullptr;
  NeighborIndex<D> index;
  double connect_radius = 0;

  SupportContext(const PointCloud<D>& c, double connect = 0) : cloud(&c), index(c.points) {
    require(!c.empty(), "empty shape");
    connect_radius = connect > 0 ? connect : 8 * mean_spacing(index);
  }
};

/// Indices p whose image under `map` has a shape point within eps.
template <int D>
std::vector<std::size_t> associated_points(const NeighborIndex<D>& index,
                                           const std::function<Vec<D>(const Vec<D>&)>& map,
                                           double eps) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < index.size(); ++i)
    if (index.nearest(map(index.point(i))).distance < eps) out.push_back(i);
  return out;
}

/// Largest connected component of `subset` in the radius graph.
template <int D>
std::vector<std::size_t> largest_component(const NeighborIndex<D>& index,
                                           const std::vector<std::size_t>& subset,
                                           double radius) {
  std::vector<char> member(index.size(), 0), seen(index.size(), 0);
  for (std::size_t i : subset) member[i] = 1;
  std::vector<std::size_t> best, comp, stack, nbrs;
  for (std::size_t start : subset) {
    if (seen[start]) continue;
    comp.clear();
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      comp.push_back(i);
      nbrs.clear();
      index.radius(index.point(i), radius, nbrs);
      for (std::size_t j : nbrs) {
        if (member[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    if (comp.size() > best.size()) best = comp;
  }
  std::sort(best.begin(), best.end());
  return best;
}

/// Fills support, raw_support and both significances of `result`.
template <int D>
void compute_support(SymmetryResult<D>& result, const SupportContext<D>& ctx, double support_eps) {
  const auto map = [&](const Vec<D>& x) { return result.map(x); };
  result.raw_support = associated_points<D>(ctx.index, map, support_eps);
  result.support = largest_component(ctx.index, result.raw_support, ctx.connect_radius);
  const double n = static_cast<double>(ctx.index.size());
  result.raw_significance = static_cast<double>(result.raw_support.size()) / n;
  result.significance = static_cast<double>(result.support.size()) / n;
}

template <int D>
SymmetryResult<D> plane_support(const HoughPlane<D>& plane, const PointCloud<D>& cloud,
                                double support_eps, double connect_radius = 0) {
  SymmetryResult<D> r;
  r.plane = plane;
  compute_support(r, SupportContext<D>(cloud, connect_radius), support_eps);
  return r;
}

/// Per-cluster mean. With k > 0 the members are averaged as planes: since
/// (n, l) and (-n, -l) are one plane, members whose normal points away from
/// the cluster's first (core) point are flipped with their offset negated,
/// then the mean normal and signed offset are embedded again. Averaging the
/// raw vectors instead would bias modes on the sphere outward.
template <int D>
std::vector<Vec<D>> centroids(const std::vector<Vec<D>>& points,
                              const std::vector<std::vector<std::size_t>>& clusters, double k) {
  std::vector<Vec<D>> out;
  out.reserve(clusters.size());
  for (const auto& members : clusters) {
    if (members.empty()) continue;
    Vec<D> sum = Vec<D>::Zero();
    if (k <= 0) {
      for (std::size_t i : members) sum += points[i];
      out.push_back(sum / static_cast<double>(members.size()));
      continue;
    }
    const Vec<D> ref = points[members.front()].normalized();
    double offset = 0;
    for (std::size_t i : members) {
      const Vec<D>& p = points[i];
      const double r = p.norm();
      const double s = p.dot(ref) < 0 ? -1.0 : 1.0;
      sum += s * p / r;
      offset += s * std::max(0.0, r - k);
    }
    const double len = sum.norm();
    const Vec<D> n = len > 0 ? Vec<D>(sum / len) : ref;
    const HoughPlane<D> plane{n, offset / static_cast<double>(members.size())};
    out.push_back(embed_plane(plane.canonical(), k));
  }
  return out;
}

/// Modes -> planes -> supports, keeping significance > tau, most significant first.
template <int D>
std::vector<SymmetryResult<D>> results_from_modes(const std::vector<Vec<D>>& modes,
                                                  const std::vector<std::size_t>& weights,
                                                  double k, const PointCloud<D>& cloud,
                                                  const ExtractConfig& cfg) {
  cfg.validate();
  const SupportContext<D> ctx(cloud, cfg.connect_radius);
  std::vector<SymmetryResult<D>> out(modes.size());
  parallel_for(modes.size(), [&](std::size_t i) {
    out[i].plane = decode_sample(modes[i], k).canonical();
    out[i].cluster_size = weights[i];
    compute_support(out[i], ctx, cfg.support_eps);
  });
  std::erase_if(out, [&](const auto& r) { return !(r.significance > cfg.tau); });
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.significance > b.significance;
  });
  return out;
}

/// Converged walkers -> DBSCAN under the geodesic -> centroids -> decoded
/// planes with support, filtered by significance.
template <int D>
std::vector<SymmetryResult<D>> extract(const WalkerTrace<D>& trace, const TransformSpace<D>& space,
                                       const PointCloud<D>& cloud, const ExtractConfig& cfg) {
  require(space.kind == SpaceKind::reflective, "extract expects a reflective space");
  cfg.validate();
  const auto geo = GeodesicSpace::riemannian(space.k);
  const Clustering cl = dbscan(trace.final_positions, cfg.dbscan, geo);
  const auto modes = centroids(trace.final_positions, cl.clusters, space.k);
  std::vector<std::size_t> sizes;
  for (const auto& c : cl.clusters) sizes.push_back(c.size());
  return results_from_modes(modes, sizes, space.k, cloud, cfg);
}

/// Translational analog: Euclidean clustering, modes shorter than
/// `min_shift` (intra-patch displacements) are dropped.
template <int D>
std::vector<SymmetryResult<D>> extract_translations(const WalkerTrace<D>& trace,
                                                    const PointCloud<D>& cloud,
                                                    const ExtractConfig& cfg,
                                                    double min_shift) {
  cfg.validate();
  const Clustering cl = dbscan(trace.final_positions, cfg.dbscan, GeodesicSpace::euclidean());
  const auto modes = centroids(trace.final_positions, cl.clusters, 0.0);
  const SupportContext<D> ctx(cloud, cfg.connect_radius);
  std::vector<SymmetryResult<D>> out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].norm() < min_shift) continue;
    SymmetryResult<D> r;
    r.kind = SymmetryKind::translational;
    r.shift = modes[i];
    r.cluster_size = cl.clusters[i].size();
    compute_support(r, ctx, cfg.support_eps);
    if (r.significance > cfg.tau) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.significance > b.significance;
  });
  return out;
}

}  // namespace symwalk
