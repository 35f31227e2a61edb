#pragma once

#include <symwalk/geodesic.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace symwalk {

/// Annealed Langevin settings.
///
/// `step_size` is dimensionless: the absolute step at the final noise level
/// is step_size * kernel_size^2, and level i uses that value scaled by
/// (sigma_i / kernel_size)^2. Per step the walker first moves by noise of
/// standard deviation beta * sqrt(step_size) * sigma_i, then by
/// -step_size * score(sigma_i), which is the exact gradient step on the
/// kernel-smoothed log density.
struct LangevinConfig {
  double kernel_size = 0.025;     // final noise level
  std::size_t num_levels = 10;
  double sigma_max = 0.5;         // first noise level
  double step_size = 0.06;
  std::size_t steps_per_level = 5000;
  std::size_t num_walkers = 200;
  double beta = 1.0;
  // Trailing steps of the last level replaced by noise-free mean-shift steps
  // (step 1, exact score), which pull each walker onto the mode it was
  // sampling around. At short schedules the small Langevin drift alone leaves
  // walkers short of the mode along flat directions.
  std::size_t settle_steps = 0;
  // Votes used per score evaluation; 0 uses every vote within the kernel
  // cutoff. A random subset per step turns the drift into a stochastic
  // gradient; it only bites at wide kernels, where most votes are in range.
  std::size_t score_batch = 0;
  std::uint64_t seed = 0;
  std::size_t trace_every = 0;    // 0 records only the final positions

  void validate() const {
    require(kernel_size > 0, "kernel_size must be positive");
    require(sigma_max >= kernel_size, "sigma_max must be >= kernel_size");
    require(step_size > 0, "step_size must be positive");
    require(steps_per_level >= 1, "steps must be >= 1");
    require(num_levels >= 1, "levels must be >= 1");
    require(num_walkers >= 1, "walkers must be >= 1");
    require(beta >= 0, "beta must be non-negative");
  }

  std::size_t total_steps() const { return steps_per_level * num_levels; }

  /// Geometric schedule sigma_max -> kernel_size.
  std::vector<double> noise_levels() const {
    std::vector<double> s(num_levels);
    for (std::size_t i = 0; i < num_levels; ++i) {
      const double t = num_levels == 1 ? 1.0 : static_cast<double>(i) / (num_levels - 1);
      s[i] = sigma_max * std::pow(kernel_size / sigma_max, t);
    }
    return s;
  }
};

/// Experiment defaults: 2D kernel 0.025, step 0.06, k 0.3; 3D kernel 0.08,
/// step 0.02, k 0.5; 200 walkers; 50K steps.
struct DetectorDefaults {
  LangevinConfig langevin;
  double k = 0.3;
  std::size_t num_pairs = 50000;
};

inline DetectorDefaults default_detector(int dim) {
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  DetectorDefaults d;
  d.langevin.num_walkers = 200;
  d.langevin.num_levels = 10;
  d.langevin.steps_per_level = 50000 / d.langevin.num_levels;
  d.langevin.settle_steps = 50;
  d.langevin.score_batch = 512;
  d.langevin.beta = 0.35;
  if (dim == 2) {
    d.langevin.kernel_size = 0.025;
    d.langevin.step_size = 0.06;
    d.k = 0.3;
  } else {
    d.langevin.kernel_size = 0.08;
    d.langevin.step_size = 0.02;
    d.k = 0.5;
  }
  return d;
}

inline LangevinConfig default_config(int dim) { return default_detector(dim).langevin; }

/// Sets the total step budget, split evenly over the noise levels, keeping
/// the settle phase as it is.
inline void set_total_steps(LangevinConfig& cfg, std::size_t total) {
  require(total >= 1, "steps must be >= 1");
  cfg.steps_per_level = std::max<std::size_t>(1, total / cfg.num_levels);
}

/// Moves x by g. A target inside the ball means the plane was pushed past
/// the origin: the motion enters the sphere at Y, re-emerges at the antipode
/// (planes (n, 0) and (-n, 0) coincide), and the residual displacement
/// splits into an arc along the sphere (its tangential part, mirrored like the
/// antipode) and an outward distance (its radial part).
template <int D>
Vec<D> walk(const Vec<D>& x, const Vec<D>& g, double k) {
  require(x.norm() >= k - 1e-9, "walk started inside the invalid region", ErrorKind::numerical);
  const Vec<D> target = x + g;
  if (target.norm() >= k || g.squaredNorm() == 0) return target;
  // first crossing of |x + s g| = k for s in [0, 1]
  const double a = g.squaredNorm(), b = x.dot(g), c = x.squaredNorm() - k * k;
  const double disc = std::max(0.0, b * b - a * c);
  const double s = std::clamp((-b - std::sqrt(disc)) / a, 0.0, 1.0);
  const Vec<D> yhat = Vec<D>(x + s * g).normalized();
  const Vec<D> rest = (1 - s) * g;
  const double radial = rest.dot(yhat);
  const Vec<D> tangent = rest - radial * yhat;
  const double t = tangent.norm();
  Vec<D> dir = yhat;
  if (t > 0) dir = std::cos(t / k) * yhat + std::sin(t / k) * (tangent / t);
  return -dir * (k + std::abs(radial));
}

template <int D>
struct WalkerTrace {
  struct Record {
    std::size_t walker;
    std::size_t step;
    Vec<D> x;
  };
  std::vector<Vec<D>> final_positions;
  std::vector<Record> records;  // grouped by walker, steps increasing
};

/// Random unit direction, radius uniform in [k, k + sqrt(D)].
template <int D>
Vec<D> initial_walker(double k, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec<D> dir;
  do {
    for (int i = 0; i < D; ++i) dir[i] = gauss(rng);
  } while (dir.norm() < 1e-12);
  std::uniform_real_distribution<double> radius(k, k + std::sqrt(static_cast<double>(D)));
  return dir.normalized() * radius(rng);
}

/// One step at noise level sigma: noise of standard deviation
/// beta * sqrt(step_size) * sigma, then the drift -step_size * score.
template <int D, class Rng>
Vec<D> langevin_step(Vec<D> x, const ScoreField<D>& field, double sigma, double step_size, double beta,
                     std::size_t batch, double k, Rng& rng) {
  if (beta > 0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec<D> eps;
    for (int i = 0; i < D; ++i) eps[i] = gauss(rng);
    x = walk(x, Vec<D>(beta * std::sqrt(step_size) * sigma * eps), k);
  }
  const Vec<D> g = field.score(x, sigma, batch, rng);
  return walk(x, Vec<D>(-step_size * g), k);
}

/// Annealed Langevin dynamics over the vote density. Each walker owns an RNG
/// stream seeded from (seed, walker index), so results do not depend on the
/// thread count.
template <int D>
WalkerTrace<D> run_langevin(const TransformSpace<D>& space, const GeodesicSpace& geo,
                            const LangevinConfig& cfg) {
  cfg.validate();
  require(geo.mode == Metric::euclidean || space.k == geo.k,
          "transform space and geodesic disagree on k");
  const ScoreField<D> field(space, geo);
  const double k = geo.mode == Metric::euclidean ? 0.0 : geo.k;
  const auto sigmas = cfg.noise_levels();
  const std::size_t total = cfg.total_steps();
  const std::size_t settle_from = total - std::min(cfg.settle_steps, cfg.steps_per_level);

  std::vector<std::vector<typename WalkerTrace<D>::Record>> per_walker(cfg.num_walkers);
  WalkerTrace<D> trace;
  trace.final_positions.resize(cfg.num_walkers);

  parallel_for(cfg.num_walkers, [&](std::size_t w) {
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(w),
                      std::uint64_t{0x5eed}};
    std::mt19937_64 rng(seq);
    Vec<D> x = initial_walker<D>(k, rng);
    if (cfg.trace_every) per_walker[w].push_back({w, 0, x});
    std::size_t step = 0;
    for (double sigma : sigmas) {
      for (std::size_t t = 0; t < cfg.steps_per_level; ++t, ++step) {
        if (step >= settle_from) {
          x = langevin_step(x, field, sigma, 1.0, 0.0, 0, k, rng);
        } else {
          x = langevin_step(x, field, sigma, cfg.step_size, cfg.beta, cfg.score_batch, k, rng);
        }
        if (cfg.trace_every && (step + 1) % cfg.trace_every == 0)
          per_walker[w].push_back({w, step + 1, x});
      }
    }
    trace.final_positions[w] = x;
  });
  for (auto& recs : per_walker)
    trace.records.insert(trace.records.end(), recs.begin(), recs.end());
  return trace;
}

}  // namespace symwalk
