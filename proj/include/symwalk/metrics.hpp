#pragma once

#include <symwalk/extraction.hpp>

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

namespace symwalk {

enum class GtSource { annotated, analytic, proposed };

inline std::string to_string(GtSource s) {
  switch (s) {
    case GtSource::annotated: return "annotated";
    case GtSource::analytic: return "analytic";
    case GtSource::proposed: return "proposed";
  }
  return "?";
}

inline GtSource parse_gt_source(const std::string& s) {
  if (s == "annotated") return GtSource::annotated;
  if (s == "analytic") return GtSource::analytic;
  if (s == "proposed") return GtSource::proposed;
  throw Error(ErrorKind::parse, "unknown ground-truth source '" + s + "'");
}

template <int D>
struct GroundTruth {
  std::vector<HoughPlane<D>> symmetries;  // canonical
  GtSource source = GtSource::analytic;
};

struct Match {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double distance = 0;
};

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::vector<Match> matches;
};

struct EvalReport {
  double delta = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double association = 0;
  double compression_ratio = 1;
  std::size_t num_pred = 0;
  std::size_t num_gt = 0;
  std::vector<Match> matches;
};

inline double f1_of(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

/// Greedy one-to-one matching, closest pairs first. A pair is eligible when
/// the embedded planes are within delta under `geo`.
///
/// Conventions for empty inputs: nothing predicted gives P = R = 0; nothing
/// to find gives R = 1, so F1 is 1 only if nothing was predicted either.
template <int D>
F1Score match_f1(const std::vector<HoughPlane<D>>& pred, const std::vector<HoughPlane<D>>& gt,
                 double delta, const GeodesicSpace& geo) {
  require(delta > 0, "delta must be positive");
  F1Score out;
  if (pred.empty() && gt.empty()) {
    out.precision = out.recall = out.f1 = 1;
    return out;
  }
  std::vector<Vec<D>> ep, eg;
  for (const auto& p : pred) ep.push_back(embed_plane(p.canonical(), geo.k));
  for (const auto& g : gt) eg.push_back(embed_plane(g.canonical(), geo.k));

  std::vector<Match> cand;
  for (std::size_t i = 0; i < ep.size(); ++i) {
    for (std::size_t j = 0; j < eg.size(); ++j) {
      const double d = geodesic(ep[i], eg[j], geo);
      if (d <= delta) cand.push_back({i, j, d});
    }
  }
  // ties broken by index so the result is a pure function of the inputs
  std::sort(cand.begin(), cand.end(), [](const Match& a, const Match& b) {
    return std::tie(a.distance, a.pred, a.gt) < std::tie(b.distance, b.pred, b.gt);
  });
  std::vector<char> used_p(ep.size(), 0), used_g(eg.size(), 0);
  for (const auto& m : cand) {
    if (used_p[m.pred] || used_g[m.gt]) continue;
    used_p[m.pred] = used_g[m.gt] = 1;
    out.matches.push_back(m);
  }
  const double hits = static_cast<double>(out.matches.size());
  out.precision = pred.empty() ? 0.0 : hits / static_cast<double>(pred.size());
  out.recall = gt.empty() ? 1.0 : hits / static_cast<double>(gt.size());
  out.f1 = f1_of(out.precision, out.recall);
  return out;
}

template <int D>
std::vector<HoughPlane<D>> planes_of(const std::vector<SymmetryResult<D>>& results) {
  std::vector<HoughPlane<D>> out;
  for (const auto& r : results)
    if (r.kind == SymmetryKind::reflective) out.push_back(r.plane);
  return out;
}

template <int D>
F1Score match_f1(const std::vector<SymmetryResult<D>>& pred, const GroundTruth<D>& gt,
                 double delta, const GeodesicSpace& geo) {
  return match_f1(planes_of(pred), gt.symmetries, delta, geo);
}

/// Fraction of the shape whose mirror image lands within eps of the shape.
template <int D>
double plane_proportion(const NeighborIndex<D>& index, const HoughPlane<D>& plane, double eps) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < index.size(); ++i)
    if (index.nearest(reflect_point(index.point(i), plane)).distance < eps) ++hits;
  return static_cast<double>(hits) / static_cast<double>(index.size());
}

/// Mean raw proportion over the predicted planes; 0 for no predictions.
/// Equals the area under the survival curve of the proportions.
template <int D>
double association(const std::vector<HoughPlane<D>>& pred, const PointCloud<D>& cloud,
                   double support_eps) {
  require(support_eps > 0, "support_eps must be positive");
  if (pred.empty()) return 0;
  require(!cloud.empty(), "empty shape");
  const NeighborIndex<D> index(cloud.points);
  std::vector<double> prop(pred.size());
  parallel_for(pred.size(), [&](std::size_t i) { prop[i] = plane_proportion(index, pred[i], support_eps); });
  double s = 0;
  for (double p : prop) s += p;
  return s / static_cast<double>(pred.size());
}

template <int D>
double association(const std::vector<SymmetryResult<D>>& pred, const PointCloud<D>& cloud,
                   double support_eps) {
  return association(planes_of(pred), cloud, support_eps);
}

/// One applied plane: each (source, removed) pair means point `removed` is
/// restored as the mirror image of point `source`.
template <int D>
struct CompressionStage {
  HoughPlane<D> plane;
  std::size_t plane_index = 0;  // position in the candidate list
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t remaining = 0;    // points stored after this stage
};

template <int D>
struct Compressed {
  std::size_t original_size = 0;
  std::vector<std::size_t> kept;      // original indices of the stored points
  std::vector<Vec<D>> points;         // their coordinates
  std::vector<CompressionStage<D>> stages;  // application order
  double ratio = 1;
};

/// Bytes of a stored cloud representation: d doubles per point and d + 2 per
/// plane record (normal, offset, order).
inline double compressed_bytes(std::size_t points, std::size_t planes, int d) {
  return 8.0 * (static_cast<double>(points) * d + static_cast<double>(planes) * (d + 2));
}

namespace detail {

// Removal pairs for one plane over the active points. Within a stage no
// point is both a source and removed. Sources of earlier stages may be
// removed later: decompression replays the stages in reverse, so they are
// back before the earlier stage needs them.
template <int D>
std::vector<std::pair<std::size_t, std::size_t>> removal_pairs(
    const PointCloud<D>& cloud, const std::vector<std::size_t>& active,
    const NeighborIndex<D>& active_index, const HoughPlane<D>& plane, double eps) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<char> removed(active.size(), 0), source(active.size(), 0);
  for (std::size_t a = 0; a < active.size(); ++a) {
    const Vec<D>& p = cloud.points[active[a]];
    if (removed[a] || !(plane.signed_distance(p) > 0)) continue;
    const auto hit = active_index.nearest(reflect_point(p, plane));
    if (!(hit.distance < eps)) continue;
    const std::size_t b = hit.index;
    if (b == a || removed[b] || source[b]) continue;
    if (!(plane.signed_distance(cloud.points[active[b]]) < 0)) continue;
    removed[b] = 1;
    source[a] = 1;
    pairs.emplace_back(active[a], active[b]);
  }
  return pairs;
}

}  // namespace detail

/// Greedy symmetry compression: repeatedly apply the unused plane that
/// removes the most points, until no plane pays for its own record.
template <int D>
Compressed<D> compress(const PointCloud<D>& cloud, const std::vector<HoughPlane<D>>& planes,
                       double support_eps) {
  require(support_eps > 0, "support_eps must be positive");
  require(!cloud.empty(), "empty shape");
  Compressed<D> out;
  out.original_size = cloud.size();
  std::vector<std::size_t> active(cloud.size());
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::vector<char> used(planes.size(), 0);

  while (true) {
    std::vector<Vec<D>> pts;
    for (std::size_t i : active) pts.push_back(cloud.points[i]);
    const NeighborIndex<D> index(pts);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cand(planes.size());
    parallel_for(planes.size(), [&](std::size_t j) {
      if (!used[j]) cand[j] = detail::removal_pairs(cloud, active, index, planes[j], support_eps);
    });
    std::size_t best = planes.size();
    for (std::size_t j = 0; j < planes.size(); ++j)
      if (!used[j] && (best == planes.size() || cand[j].size() > cand[best].size())) best = j;
    // a plane must save more coordinates than its record costs
    if (best == planes.size() || cand[best].size() * D <= static_cast<std::size_t>(D + 2)) break;

    used[best] = 1;
    std::vector<char> gone(cloud.size(), 0);
    for (const auto& [src, rem] : cand[best]) gone[rem] = 1;
    std::erase_if(active, [&](std::size_t i) { return gone[i] != 0; });
    out.stages.push_back({planes[best], best, std::move(cand[best]), active.size()});
  }
  out.kept = active;
  for (std::size_t i : active) out.points.push_back(cloud.points[i]);
  out.ratio = compressed_bytes(active.size(), out.stages.size(), D) /
              compressed_bytes(cloud.size(), 0, D);
  return out;
}

/// Replays the stages in reverse; the result is in the original point order.
template <int D>
PointCloud<D> decompress(const Compressed<D>& c) {
  require(c.kept.size() == c.points.size(), "compressed object: kept/points size mismatch",
          ErrorKind::parse);
  std::vector<Vec<D>> pts(c.original_size, Vec<D>::Zero());
  std::vector<char> have(c.original_size, 0);
  for (std::size_t i = 0; i < c.kept.size(); ++i) {
    require(c.kept[i] < c.original_size, "compressed object: index out of range", ErrorKind::parse);
    pts[c.kept[i]] = c.points[i];
    have[c.kept[i]] = 1;
  }
  for (auto st = c.stages.rbegin(); st != c.stages.rend(); ++st) {
    for (const auto& [src, rem] : st->pairs) {
      require(src < c.original_size && rem < c.original_size && have[src],
              "compressed object: stage refers to a missing point", ErrorKind::parse);
      pts[rem] = reflect_point(pts[src], st->plane);
      have[rem] = 1;
    }
  }
  require(std::all_of(have.begin(), have.end(), [](char h) { return h != 0; }),
          "compressed object does not cover every point", ErrorKind::parse);
  PointCloud<D> out;
  out.points = std::move(pts);
  return out;
}

struct ProposeConfig {
  double vote_threshold = 0.1;  // minimum supported fraction of the shape
  double cluster_eps = 0.05;    // DBSCAN radius in the embedded space
  double support_eps = 0.02;
  double k = 0.3;               // embedding radius used for clustering
  std::size_t max_pairs = 1000000;
  std::uint64_t seed = 0;       // sampling when the pair count exceeds max_pairs

  void validate() const {
    require(vote_threshold >= 0 && vote_threshold <= 1, "vote_threshold must be in [0, 1]");
    require(cluster_eps > 0 && support_eps > 0 && k > 0, "proposal radii must be positive");
    require(max_pairs >= 1, "max_pairs must be >= 1");
  }
};

/// Brute-force ground-truth proposals: every pair plane whose supported
/// fraction exceeds the threshold, grouped around the best supported
/// survivors and averaged. Flagged for human review.
///
/// Grouping is leader clustering under the sphere geodesic (so a plane
/// through the origin is not split by the sign of its normal): survivors in
/// order of support join the first leader within cluster_eps, or lead a new
/// group. Density clustering chains on regular shapes, where slightly tilted
/// pair planes still pass the threshold and bridge every true plane into a
/// single cluster.
template <int D>
GroundTruth<D> propose_ground_truth(const PointCloud<D>& cloud, const ProposeConfig& cfg) {
  cfg.validate();
  require(cloud.size() >= 2, "cloud too small: need at least 2 points");
  const std::size_t n = cloud.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const double all = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (all <= static_cast<double>(cfg.max_pairs)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    pairs = detail::sample_pairs(cloud, cfg.max_pairs, cfg.seed);
  }

  const NeighborIndex<D> index(cloud.points);
  const auto needed = static_cast<std::size_t>(std::floor(cfg.vote_threshold * static_cast<double>(n))) + 1;
  std::vector<char> keep(pairs.size(), 0);
  std::vector<HoughPlane<D>> planes(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t t) {
    const Vec<D>& p = cloud.points[pairs[t].first];
    const Vec<D>& q = cloud.points[pairs[t].second];
    if ((p - q).norm() <= 1e-12) return;
    planes[t] = pair_to_plane(p, q);
    // stop counting as soon as the outcome is decided
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n && hits < needed && hits + (n - i) >= needed; ++i)
      if (index.nearest(reflect_point(cloud.points[i], planes[t])).distance < cfg.support_eps) ++hits;
    keep[t] = hits >= needed;
  });

  std::vector<Vec<D>> votes;
  std::vector<HoughPlane<D>> survivors;
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    if (!keep[t]) continue;
    votes.push_back(embed_plane(planes[t], cfg.k));
    survivors.push_back(planes[t]);
  }
  GroundTruth<D> gt;
  gt.source = GtSource::proposed;
  if (votes.empty()) return gt;

  std::vector<double> support(votes.size());
  parallel_for(votes.size(),
               [&](std::size_t v) { support[v] = plane_proportion(index, survivors[v], cfg.support_eps); });
  std::vector<std::size_t> order(votes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return support[a] > support[b]; });

  const GeodesicSpace geo = GeodesicSpace::riemannian(cfg.k);
  std::vector<std::size_t> leaders;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t v : order) {
    std::size_t g = 0;
    while (g < leaders.size() && geodesic(votes[v], votes[leaders[g]], geo) > cfg.cluster_eps) ++g;
    if (g == leaders.size()) {
      leaders.push_back(v);
      groups.emplace_back();
    }
    groups[g].push_back(v);
  }
  for (const auto& c : centroids(votes, groups, cfg.k))
    gt.symmetries.push_back(decode_sample(c, cfg.k).canonical());
  return gt;
}

}  // namespace symwalk
