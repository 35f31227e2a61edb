#pragma once

#include <symwalk/applications.hpp>
#include <symwalk/meanshift.hpp>

#include <chrono>
#include <map>
#include <string>

namespace symwalk {

/// Everything a reflective detection run needs.
struct DetectConfig {
  LangevinConfig langevin;
  ExtractConfig extract;
  double k = 0.3;
  std::size_t num_pairs = 50000;
  std::uint64_t seed = 0;  // vote sampling; the walkers use langevin.seed
};

inline DetectConfig default_detect_config(int dim) {
  const DetectorDefaults d = default_detector(dim);
  DetectConfig cfg;
  cfg.langevin = d.langevin;
  cfg.k = d.k;
  cfg.num_pairs = d.num_pairs;
  cfg.extract = default_extract_config(dim, cfg.langevin);
  return cfg;
}

/// Translation votes start annealing at twice the final kernel. Straight
/// strokes slide along themselves and leave dense ridges of short shifts; at
/// coarse noise levels a genuine shift mode merges into them and no walker
/// reaches it.
inline constexpr double kTranslationSigmaScale = 2.0;

inline DetectConfig default_translation_config(int dim) {
  DetectConfig cfg = default_detect_config(dim);
  cfg.langevin.sigma_max = kTranslationSigmaScale * cfg.langevin.kernel_size;
  return cfg;
}

class StageTimer {
 public:
  void start(const std::string& name) {
    name_ = name;
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    times_[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  const std::map<std::string, double>& times() const { return times_; }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, double> times_;
};

/// Planes found in normalized coordinates, mapped back to the input frame.
template <int D>
HoughPlane<D> unnormalize(const HoughPlane<D>& p, const Similarity<D>& t) {
  return HoughPlane<D>{p.normal, p.offset / t.scale + p.normal.dot(t.center)}.canonical();
}

template <int D>
struct Detection {
  Similarity<D> normalization;
  TransformSpace<D> space;  // normalized frame
  WalkerTrace<D> trace;
  std::vector<SymmetryResult<D>> results;  // input frame; supports index input points
  std::map<std::string, double> seconds;
};

namespace detail {

template <int D>
void to_input_frame(std::vector<SymmetryResult<D>>& results, const Similarity<D>& t) {
  for (auto& r : results) {
    if (r.kind == SymmetryKind::reflective) r.plane = unnormalize(r.plane, t);
    else r.shift /= t.scale;
  }
}

}  // namespace detail

/// normalize -> vote space -> annealed Langevin -> DBSCAN modes -> supports.
template <int D>
Detection<D> detect_reflective(const PointCloud<D>& input, const DetectConfig& cfg) {
  Detection<D> out;
  StageTimer timer;
  timer.start("normalize");
  out.normalization = normalizing_transform(input);
  const PointCloud<D> cloud = apply(out.normalization, input);
  timer.stop();

  timer.start("space");
  out.space = build_reflective_space(cloud, cfg.num_pairs, cfg.k, cfg.seed);
  timer.stop();

  timer.start("langevin");
  out.trace = run_langevin(out.space, GeodesicSpace::riemannian(cfg.k), cfg.langevin);
  timer.stop();

  timer.start("extract");
  out.results = extract(out.trace, out.space, cloud, cfg.extract);
  detail::to_input_frame(out.results, out.normalization);
  timer.stop();
  out.seconds = timer.times();
  return out;
}

/// Translational variant in a flat space; shifts shorter than `min_shift`
/// (normalized units) are discarded.
template <int D>
Detection<D> detect_translations(const PointCloud<D>& input, const DetectConfig& cfg,
                                 double min_shift) {
  Detection<D> out;
  StageTimer timer;
  out.normalization = normalizing_transform(input);
  const PointCloud<D> cloud = apply(out.normalization, input);
  timer.start("space");
  out.space = build_translation_space(cloud, cfg.num_pairs, cfg.seed);
  timer.stop();
  timer.start("langevin");
  out.trace = run_langevin(out.space, GeodesicSpace::euclidean(), cfg.langevin);
  timer.stop();
  timer.start("extract");
  out.results = extract_translations(out.trace, cloud, cfg.extract, min_shift);
  detail::to_input_frame(out.results, out.normalization);
  timer.stop();
  out.seconds = timer.times();
  return out;
}

enum class BaselineExtraction { basins, dbscan };

/// Mean-shift comparison pipeline over the same vote space as the detector.
struct BaselineConfig {
  MeanShiftConfig meanshift;
  BaselineExtraction extraction = BaselineExtraction::basins;
  double min_basin = 0.01;  // basins: fraction of trajectories a mode must attract
  DbscanConfig dbscan{0.05, 4};  // dbscan: run directly on the votes
  ExtractConfig extract;
  double k = 0.3;
  std::size_t num_pairs = 50000;
  std::uint64_t seed = 0;
};

inline BaselineConfig default_baseline_config(int dim) {
  const DetectConfig d = default_detect_config(dim);
  BaselineConfig cfg;
  cfg.k = d.k;
  cfg.num_pairs = d.num_pairs;
  cfg.extract = d.extract;
  cfg.meanshift.bandwidth = 0.05;
  cfg.dbscan = DbscanConfig{cfg.meanshift.bandwidth, static_cast<std::size_t>(2 * dim)};
  return cfg;
}

/// Modes that landed inside the invalid ball are pushed out to its surface.
template <int D>
Vec<D> to_valid(const Vec<D>& x, double k) {
  const double r = x.norm();
  if (r >= k) return x;
  return r > 0 ? Vec<D>(x / r * k) : Vec<D>(Vec<D>::UnitX() * k);
}

template <int D>
Detection<D> baseline_reflective(const PointCloud<D>& input, const BaselineConfig& cfg) {
  require(cfg.min_basin >= 0 && cfg.min_basin <= 1, "min_basin must be in [0, 1]");
  Detection<D> out;
  StageTimer timer;
  out.normalization = normalizing_transform(input);
  const PointCloud<D> cloud = apply(out.normalization, input);
  timer.start("space");
  out.space = build_reflective_space(cloud, cfg.num_pairs, cfg.k, cfg.seed);
  timer.stop();

  std::vector<Vec<D>> modes;
  std::vector<std::size_t> weights;
  if (cfg.extraction == BaselineExtraction::basins) {
    timer.start("meanshift");
    const auto ms = mean_shift(out.space, cfg.meanshift);
    timer.stop();
    std::size_t total = 0;
    for (const auto& m : ms) total += m.basin;
    for (const auto& m : ms) {
      if (static_cast<double>(m.basin) < cfg.min_basin * static_cast<double>(total)) continue;
      modes.push_back(to_valid(m.point, cfg.k));
      weights.push_back(m.basin);
    }
  } else {
    timer.start("dbscan");
    const Clustering cl = dbscan(out.space.samples, cfg.dbscan, GeodesicSpace::euclidean());
    timer.stop();
    modes = centroids(out.space.samples, cl.clusters, 0.0);
    for (auto& m : modes) m = to_valid(m, cfg.k);
    for (const auto& c : cl.clusters) weights.push_back(c.size());
  }
  timer.start("extract");
  out.results = results_from_modes(modes, weights, cfg.k, cloud, cfg.extract);
  detail::to_input_frame(out.results, out.normalization);
  timer.stop();
  out.seconds = timer.times();
  return out;
}

/// Precision/recall/F1, association and compression of a prediction.
template <int D>
EvalReport evaluate(const std::vector<SymmetryResult<D>>& pred, const GroundTruth<D>& gt,
                    const PointCloud<D>& cloud, double delta, double k, double support_eps) {
  EvalReport r;
  r.delta = delta;
  // compare in the normalized frame, where delta and k are defined
  const Similarity<D> t = normalizing_transform(cloud);
  std::vector<HoughPlane<D>> p, g;
  for (const auto& x : planes_of(pred)) p.push_back(t.apply(x));
  for (const auto& x : gt.symmetries) g.push_back(t.apply(x));
  const F1Score f = match_f1(p, g, delta, GeodesicSpace::riemannian(k));
  r.precision = f.precision;
  r.recall = f.recall;
  r.f1 = f.f1;
  r.matches = f.matches;
  r.num_pred = p.size();
  r.num_gt = g.size();
  const PointCloud<D> norm = apply(t, cloud);
  r.association = association(p, norm, support_eps);
  r.compression_ratio = compress(norm, p, support_eps).ratio;
  return r;
}

/// Applications take support_eps in normalized units; these wrappers run
/// them in the shape's normalized frame and hand back input coordinates.
template <int D>
Vec<D> denormalize(const Vec<D>& x, const Similarity<D>& t) {
  return Vec<D>(x / t.scale + t.center);
}

template <int D>
Compressed<D> compress_input_frame(const PointCloud<D>& input, const std::vector<HoughPlane<D>>& planes,
                                   double support_eps) {
  const Similarity<D> t = normalizing_transform(input);
  std::vector<HoughPlane<D>> local;
  for (const auto& p : planes) local.push_back(t.apply(p));
  Compressed<D> c = compress(apply(t, input), local, support_eps);
  // pairs index the same points in both frames, and a similarity maps
  // mirror pairs to mirror pairs
  for (std::size_t i = 0; i < c.kept.size(); ++i) c.points[i] = input.points[c.kept[i]];
  for (auto& st : c.stages) st.plane = planes[st.plane_index].canonical();
  return c;
}

template <int D>
PointCloud<D> symmetrize_input_frame(const PointCloud<D>& input, const HoughPlane<D>& plane,
                                     const SymmetrizeConfig& cfg) {
  const Similarity<D> t = normalizing_transform(input);
  PointCloud<D> out = symmetrize(apply(t, input), t.apply(plane), cfg);
  for (auto& p : out.points) p = denormalize(p, t);
  out.normals = input.normals;
  return out;
}

}  // namespace symwalk
