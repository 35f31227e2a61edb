#pragma once

#include <symwalk/transform_space.hpp>
#include <symwalk/neighbor_index.hpp>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace symwalk {

enum class Kernel { gaussian, epanechnikov };

/// Classic mean-shift over raw votes with Euclidean distances.
struct MeanShiftConfig {
  double bandwidth = 0.05;           // h
  double neighborhood_radius = 0;    // 0: 3h; infinity: every vote
  std::size_t max_iters = 500;
  double tol = 1e-6;                 // stop once an iterate moves less than this
  Kernel kernel = Kernel::gaussian;  // gaussian: exp(-|u|^2/h^2), epanechnikov: max(0, 1 - |u|^2/h^2)
  std::size_t max_trajectories = 2000;
  double merge_radius = 0;           // 0: h / 2
  std::uint64_t seed = 0;            // picks the starting votes when subsampling

  void validate() const {
    require(bandwidth > 0, "bandwidth must be positive");
    require(tol > 0, "convergence tolerance must be positive");
    require(neighborhood_radius >= 0 && merge_radius >= 0, "radii must be non-negative");
    require(max_iters >= 1 && max_trajectories >= 1, "mean-shift iteration counts must be >= 1");
  }
  double radius() const { return neighborhood_radius > 0 ? neighborhood_radius : 3 * bandwidth; }
  double merge() const { return merge_radius > 0 ? merge_radius : 0.5 * bandwidth; }
};

template <int D>
struct Mode {
  Vec<D> point;
  std::size_t basin = 0;  // trajectories that ended here
};

/// One kernel-weighted mean over the votes near x; x itself when none are near.
template <int D>
Vec<D> mean_shift_step(const Vec<D>& x, const NeighborIndex<D>& votes, const MeanShiftConfig& cfg,
                       std::vector<std::size_t>& scratch) {
  const double h_sq = cfg.bandwidth * cfg.bandwidth;
  const double radius = cfg.radius();
  scratch.clear();
  if (std::isinf(radius)) {
    scratch.resize(votes.size());
    std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  } else {
    votes.radius(x, radius, scratch);
  }
  // Gaussian weights are taken relative to the nearest neighbor so that far
  // starting points do not underflow.
  double ref = 0;
  if (cfg.kernel == Kernel::gaussian) {
    ref = std::numeric_limits<double>::infinity();
    for (std::size_t i : scratch) ref = std::min(ref, (votes.point(i) - x).squaredNorm());
  }
  Vec<D> sum = Vec<D>::Zero();
  double total = 0;
  for (std::size_t i : scratch) {
    const double u = (votes.point(i) - x).squaredNorm();
    const double w = cfg.kernel == Kernel::gaussian ? std::exp(-(u - ref) / h_sq)
                                                    : std::max(0.0, 1 - u / h_sq);
    sum += w * votes.point(i);
    total += w;
  }
  return total > 0 ? Vec<D>(sum / total) : x;
}

/// Runs one trajectory per (subsampled) vote to convergence and merges the
/// endpoints; modes come back sorted by basin size.
template <int D>
std::vector<Mode<D>> mean_shift(const TransformSpace<D>& space, const MeanShiftConfig& cfg) {
  cfg.validate();
  require(!space.samples.empty(), "mean-shift needs at least one vote");
  const NeighborIndex<D> votes(space.samples);

  std::vector<std::size_t> starts(space.samples.size());
  std::iota(starts.begin(), starts.end(), std::size_t{0});
  if (starts.size() > cfg.max_trajectories) {
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(starts.begin(), starts.end(), rng);
    starts.resize(cfg.max_trajectories);
    std::sort(starts.begin(), starts.end());
  }

  std::vector<Vec<D>> ends(starts.size());
  parallel_for(starts.size(), [&](std::size_t t) {
    std::vector<std::size_t> scratch;
    Vec<D> x = space.samples[starts[t]];
    for (std::size_t it = 0; it < cfg.max_iters; ++it) {
      const Vec<D> next = mean_shift_step(x, votes, cfg, scratch);
      const double moved = (next - x).norm();
      x = next;
      if (moved < cfg.tol) break;
    }
    ends[t] = x;
  });

  std::vector<Mode<D>> modes;
  const double merge_sq = cfg.merge() * cfg.merge();
  for (const auto& e : ends) {
    auto it = std::find_if(modes.begin(), modes.end(), [&](const Mode<D>& m) {
      return (m.point - e).squaredNorm() <= merge_sq;
    });
    if (it == modes.end()) {
      modes.push_back({e, 1});
    } else {
      ++it->basin;
    }
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode<D>& a, const Mode<D>& b) { return a.basin > b.basin; });
  return modes;
}

}  // namespace symwalk
