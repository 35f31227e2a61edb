#pragma once

#include <symwalk/neighbor_index.hpp>
#include <symwalk/transform_space.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>

namespace symwalk {

enum class Metric { riemannian, euclidean };

/// Premetric on the embedded reflective space: paths may not enter the open
/// ball of radius k, and a path reaching the sphere at z may continue from -z
/// (a plane moving through the origin flips its normal).
struct GeodesicSpace {
  double k = 0;
  Metric mode = Metric::riemannian;

  static GeodesicSpace riemannian(double k) {
    require(k > 0, "riemannian geodesic needs k > 0");
    return {k, Metric::riemannian};
  }
  static GeodesicSpace euclidean() { return {0.0, Metric::euclidean}; }
};

template <int D>
struct GeodesicValue {
  double distance = 0;
  Vec<D> grad = Vec<D>::Zero();  // d/dx; unit length wherever defined, zero at x == y
};

namespace detail {

// Per-point quantities reused across many geodesic evaluations.
template <int D>
struct GeoCache {
  double r = 0;        // ||x||
  double tangent = 0;  // sqrt(r^2 - k^2)
  double half = 0;     // acos(k / r): angle between x and its tangent point

  GeoCache() = default;
  GeoCache(const Vec<D>& x, double k) {
    r = std::max(x.norm(), k);
    tangent = std::sqrt(std::max(0.0, r * r - k * k));
    half = r > 0 ? std::acos(std::min(1.0, k / r)) : 0.0;
  }
};

// How far inside the sphere a point may be and still count as valid.
inline constexpr double kValidTol = 1e-9;

// Any unit vector orthogonal to x (x nonzero).
template <int D>
Vec<D> any_orthogonal(const Vec<D>& x) {
  Vec<D> e = Vec<D>::Zero();
  int i = 0;
  x.cwiseAbs().minCoeff(&i);
  e[i] = 1;
  Vec<D> u = e - e.dot(x) / x.squaredNorm() * x;
  return u.normalized();
}

// Squared distance from the origin to segment [a, b].
template <int D>
double segment_origin_sq(const Vec<D>& a, const Vec<D>& b) {
  const Vec<D> ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0) return a.squaredNorm();
  const double t = std::clamp(-a.dot(ab) / len_sq, 0.0, 1.0);
  return (a + t * ab).squaredNorm();
}

// Length of the shortest path x -> y that stays outside the open ball:
// the straight segment when it misses the ball, else tangent segment,
// great-circle arc, tangent segment (all in span{x, y}).
template <int D>
double outside_length(const Vec<D>& x, const GeoCache<D>& cx, const Vec<D>& y,
                      const GeoCache<D>& cy, double k, bool& straight) {
  // Valid points may sit up to kValidTol inside the sphere; a segment ending
  // at such a point must still count as straight, or an endpoint on the
  // sphere would be charged a full tangent detour.
  straight = segment_origin_sq(x, y) >= (k - kValidTol) * (k - kValidTol);
  if (straight) return (x - y).norm();
  const double cosang = std::clamp(x.dot(y) / (cx.r * cy.r), -1.0, 1.0);
  const double arc = std::max(0.0, std::acos(cosang) - cx.half - cy.half);
  return cx.tangent + cy.tangent + k * arc;
}

// Gradient of outside_length in x (x != y).
template <int D>
Vec<D> outside_grad(const Vec<D>& x, const GeoCache<D>& cx, const Vec<D>& y,
                    const GeoCache<D>& cy, double k, bool straight) {
  if (straight) return (x - y).normalized();
  // unit vector from x's tangent point towards x
  const Vec<D> xhat = x / cx.r;
  Vec<D> perp = y - y.dot(xhat) * xhat;
  const double pn = perp.norm();
  perp = pn > 1e-14 * cy.r ? Vec<D>(perp / pn) : any_orthogonal(x);
  const Vec<D> touch = (k / cx.r) * (k * xhat + cx.tangent * perp);
  const Vec<D> g = x - touch;
  const double gn = g.norm();
  // on the sphere itself the path leaves tangentially, away from y
  return gn > 1e-12 * k ? Vec<D>(g / gn) : Vec<D>(-perp);
}

template <int D>
GeodesicValue<D> outside_branch(const Vec<D>& x, const GeoCache<D>& cx, const Vec<D>& y,
                                const GeoCache<D>& cy, double k) {
  GeodesicValue<D> out;
  if (x == y) return out;
  bool straight = false;
  out.distance = outside_length(x, cx, y, cy, k, straight);
  out.grad = outside_grad(x, cx, y, cy, k, straight);
  return out;
}

// min over ||z|| = k of ||x - z|| + ||w - z||, with x and w outside the ball
// and the segment [x, w] missing it. The minimizer lies on the great-circle arc
// between the directions of x and w where both points are visible, and obeys
// the reflection law there (the window is never empty: some point of the
// sphere sees the whole segment). Cleared of denominators the law is a smooth
// trigonometric polynomial in the angle of z, positive at the start of the
// visible window and negative at its end, so bracketed Newton converges fast
// even when x or w sits on the sphere, where the distance sum itself has a kink.
template <int D>
GeodesicValue<D> through_branch_sphere(const Vec<D>& x, const GeoCache<D>& cx, const Vec<D>& w,
                                       const GeoCache<D>& cw, double k) {
  const double rx = cx.r, rw = cw.r;
  const Vec<D> e1 = x / rx;
  const double w1 = w.dot(e1);
  Vec<D> e2 = w - w1 * e1;
  const double w2 = e2.norm();
  GeodesicValue<D> out;
  if (w2 <= 1e-14 * rw) {
    // w on the ray of x: touch the sphere right below both points
    out.distance = (rx - k) + (rw - k);
    out.grad = e1;
    return out;
  }
  e2 /= w2;

  // z = k (c e1 + s e2) with the angle t parametrized by u = tan(t / 2), so
  // c = (1 - u^2) / (1 + u^2), s = 2u / (1 + u^2); the loop needs no trig.
  // The window bounds follow from cos/sin of phi and of the half angles.
  const double cphi = w1 / rw, sphi = w2 / rw;
  const double ch_w = k / rw, sh_w = cw.tangent / rw;
  const double u_phi = sphi / (1 + cphi);
  const double u_x = cx.tangent / (rx + k);  // tan(half_x / 2)
  double lo = 0;
  if (cphi < ch_w) {
    // phi > half_w: tan((phi - half_w) / 2) via the difference formulas
    const double c = cphi * ch_w + sphi * sh_w, s = sphi * ch_w - cphi * sh_w;
    lo = s / (1 + c);
  }
  double hi = std::min(u_phi, u_x);

  // tan of the incidence angles at z: x side -rx s / (rx c - k), w side
  // (w2 c - w1 s) / (w1 c + w2 s - k); equal and opposite at the optimum.
  auto law = [&](double u, double& p, double& dp) {
    const double q = 1 / (1 + u * u);
    const double c = (1 - u * u) * q, s = 2 * u * q;
    const double a = w2 * c - w1 * s;
    const double b = rx * c - k;
    const double cc = w1 * c + w2 * s - k;
    p = a * b - rx * s * cc;
    dp = (-(cc + k) * b - 2 * rx * s * a - rx * c * cc) * 2 * q;  // d/du = d/dt * 2 / (1 + u^2)
  };
  double u = lo;
  if (hi > lo) {
    u = 0.5 * (lo + hi);
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      law(u, p, dp);
      if (p > 0) lo = u; else hi = u;
      const double step = dp < 0 ? -p / dp : std::numeric_limits<double>::infinity();
      if (std::abs(step) < 1e-7 * (1 + u * u) || hi - lo < 1e-12 * (1 + u * u)) {
        u = std::clamp(u + (std::isfinite(step) ? step : 0.0), lo, hi);
        break;
      }
      u = (u + step > lo && u + step < hi) ? u + step : 0.5 * (lo + hi);
    }
  }
  const double q = 1 / (1 + u * u);
  const Vec<D> z = k * ((1 - u * u) * q * e1 + 2 * u * q * e2);
  const double best_f = (x - z).norm() + (w - z).norm();
  out.distance = best_f;
  const Vec<D> g = x - z;
  const double gn = g.norm();
  out.grad = gn > 0 ? Vec<D>(g / gn) : e1;
  return out;
}

// Full premetric with cached norms. Ties go to the outside branch.
template <int D>
GeodesicValue<D> geodesic_cached(const Vec<D>& x, const GeoCache<D>& cx, const Vec<D>& y,
                                 const GeoCache<D>& cy, double k) {
  GeodesicValue<D> best;
  if (x == y) return best;
  bool straight = false;
  const double outside = outside_length(x, cx, y, cy, k, straight);
  auto outside_value = [&] {
    best.distance = outside;
    best.grad = outside_grad(x, cx, y, cy, k, straight);
    return best;
  };
  const Vec<D> sum = x + y;
  const double sum_sq = sum.squaredNorm();
  // Lower bounds on the through-origin branch: the straight line x -> -y, and
  // (Minkowski over the radial and angular parts of both legs)
  // sqrt((rx + ry - 2k)^2 + 4 k min(rx, ry) sin^2(angle(x, -y) / 2)).
  const double gap = cx.r + cy.r - 2 * k;
  const double half_sin_sq = 0.5 * (1 + x.dot(y) / (cx.r * cy.r));
  const double radial = gap * gap + 4 * k * std::min(cx.r, cy.r) * std::max(0.0, half_sin_sq);
  if (std::max(sum_sq, radial) >= outside * outside) return outside_value();
  const Vec<D> w = -y;
  if (segment_origin_sq(x, w) <= (k + kValidTol) * (k + kValidTol)) {
    // The segment x -> -y crosses the ball. Jumping where it enters would
    // leave the second leg inside, so the cheapest valid jump path is the
    // mirror of the shortest path x -> -y around the ball, which touches the
    // sphere anyway.
    bool through_straight = false;
    const double len = outside_length(x, cx, w, cy, k, through_straight);
    if (!(len < outside)) return outside_value();
    best.distance = len;
    if (len > 0) best.grad = outside_grad(x, cx, w, cy, k, through_straight);
    return best;
  }
  const GeodesicValue<D> through = through_branch_sphere(x, cx, w, cy, k);
  return through.distance < outside ? through : outside_value();
}

}  // namespace detail

template <int D>
void check_valid(const Vec<D>& x, const GeodesicSpace& space) {
  if (space.mode == Metric::riemannian)
    require(x.norm() >= space.k - detail::kValidTol, "invalid transform point", ErrorKind::numerical);
}

/// Geodesic distance and its gradient with respect to x.
template <int D>
GeodesicValue<D> geodesic_eval(const Vec<D>& x, const Vec<D>& y, const GeodesicSpace& space) {
  if (space.mode == Metric::euclidean) {
    GeodesicValue<D> out;
    const Vec<D> diff = x - y;
    out.distance = diff.norm();
    if (out.distance > 0) out.grad = diff / out.distance;
    return out;
  }
  check_valid(x, space);
  check_valid(y, space);
  return detail::geodesic_cached(x, detail::GeoCache<D>(x, space.k), y,
                                 detail::GeoCache<D>(y, space.k), space.k);
}

template <int D>
double geodesic(const Vec<D>& x, const Vec<D>& y, const GeodesicSpace& space) {
  return geodesic_eval(x, y, space).distance;
}

template <int D>
Vec<D> geodesic_grad(const Vec<D>& x, const Vec<D>& y, const GeodesicSpace& space) {
  require(x != y, "gradient undefined at x == y", ErrorKind::numerical);
  return geodesic_eval(x, y, space).grad;
}

/// Kernel score field over a fixed vote set.
///
/// score(x, sigma) returns sum_i w_i d_i grad d_i / |grad d_i|^2 with
/// w_i proportional to exp(-d_i^2 / sigma^2). Moving against it
/// (x - step * score) climbs the smoothed vote density.
template <int D>
class ScoreField {
 public:
  /// Votes whose kernel weight falls below e^-cutoff times the nearest
  /// vote's weight are skipped; an infinite cutoff keeps every vote.
  ScoreField(const TransformSpace<D>& data, GeodesicSpace space, double cutoff = 20.0)
      : space_(space), index_(data.samples), cutoff_(cutoff) {
    require(cutoff > 0, "score cutoff must be positive");
    require(!data.samples.empty(), "score field needs at least one vote");
    require(space.mode == Metric::euclidean || data.k == space.k,
            "transform space and geodesic disagree on k");
    if (space.mode == Metric::riemannian)
      for (const auto& y : data.samples) check_valid(y, space);
    cache_.reserve(data.samples.size());
    for (const auto& y : data.samples) cache_.emplace_back(y, space.k);
    max_norm_ = 0;
    for (const auto& c : cache_) max_norm_ = std::max(max_norm_, c.r);
  }

  const GeodesicSpace& space() const { return space_; }
  std::size_t size() const { return index_.size(); }

  struct Term {
    std::size_t index;
    double distance;
    Vec<D> grad;
  };

  /// Votes within the kernel cutoff, with exact geodesic distances and gradients.
  std::vector<Term> neighborhood(const Vec<D>& x, double sigma) const {
    std::vector<Term> terms;
    for_each_term(x, sigma, [&](std::size_t i, const GeodesicValue<D>& v) {
      terms.push_back({i, v.distance, v.grad});
    });
    return terms;
  }

  /// Normalized kernel weights over `terms` (same order).
  static std::vector<double> weights(const std::vector<Term>& terms, double sigma) {
    std::vector<double> w(terms.size());
    double min_sq = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) min_sq = std::min(min_sq, t.distance * t.distance);
    double total = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      w[i] = std::exp(-(terms[i].distance * terms[i].distance - min_sq) / (sigma * sigma));
      total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
  }

  Vec<D> score(const Vec<D>& x, double sigma) const { return score_impl(x, sigma, Exact{}); }

  /// Minibatch estimate: when more than `batch` votes can pass the cutoff, a
  /// uniform subset of about `batch` of them (drawn with `rng`) stands in for
  /// all. batch == 0 is exact.
  template <class Rng>
  Vec<D> score(const Vec<D>& x, double sigma, std::size_t batch, Rng& rng) const {
    return score_impl(x, sigma, Minibatch<Rng>{batch, &rng});
  }

 private:
  struct Exact {
    bool draw(std::size_t, std::vector<std::size_t>&) const { return false; }
    template <class Near>
    bool reject(std::size_t, const Near&, std::vector<std::size_t>&) const { return false; }
    void thin(std::vector<std::size_t>&) const {}
  };

  template <class Rng>
  struct Minibatch {
    std::size_t batch;
    Rng* rng;

    // Wide kernels: `batch` distinct votes drawn from all n, before any
    // distance test, so the cost does not grow with n.
    bool draw(std::size_t n, std::vector<std::size_t>& ids) const {
      if (batch == 0 || batch >= n) return false;
      thread_local std::vector<std::uint64_t> stamp;
      thread_local std::uint64_t round = 0;
      if (stamp.size() < n) stamp.assign(n, 0);
      ++round;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      while (ids.size() < batch) {
        const std::size_t i = pick(*rng);
        if (stamp[i] == round) continue;
        stamp[i] = round;
        ids.push_back(i);
      }
      return true;
    }

    // Narrow kernels with many votes in range: draw from all n and keep the
    // first `batch` that pass `near`. Those form a uniform subset of the votes
    // in range, as the thinned tree query would, without visiting them all.
    // Gives up after a fixed number of tries when few votes are in range.
    template <class Near>
    bool reject(std::size_t n, const Near& near, std::vector<std::size_t>& ids) const {
      if (batch == 0 || n < 8 * batch) return false;
      thread_local std::vector<std::uint64_t> stamp;
      thread_local std::uint64_t round = 0;
      if (stamp.size() < n) stamp.assign(n, 0);
      ++round;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t tries = 0; tries < 4 * batch; ++tries) {
        const std::size_t i = pick(*rng);
        if (stamp[i] == round) continue;
        stamp[i] = round;
        if (!near(i)) continue;
        ids.push_back(i);
        if (ids.size() == batch) return true;
      }
      ids.clear();
      return false;
    }

    // partial Fisher-Yates
    void thin(std::vector<std::size_t>& ids) const {
      if (batch == 0 || ids.size() <= batch) return;
      for (std::size_t j = 0; j < batch; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, ids.size() - 1);
        std::swap(ids[j], ids[pick(*rng)]);
      }
      ids.resize(batch);
    }
  };

  template <class Select>
  Vec<D> score_impl(const Vec<D>& x, double sigma, Select&& select) const {
    require(sigma > 0, "sigma must be positive");
    check_valid(x, space_);
    // streaming normalization: weights are kept relative to the smallest
    // squared distance seen so far
    const double inv = 1 / (sigma * sigma);
    double ref = std::numeric_limits<double>::infinity(), total = 0;
    Vec<D> acc = Vec<D>::Zero();
    for_each_term(x, sigma, select, [&](std::size_t, const GeodesicValue<D>& v) {
      const double gsq = v.grad.squaredNorm();
      const double dsq = v.distance * v.distance;
      if (dsq < ref) {
        const double rescale = std::isinf(ref) ? 0.0 : std::exp(-(ref - dsq) * inv);
        acc *= rescale;
        total *= rescale;
        ref = dsq;
      }
      const double w = std::exp(-(dsq - ref) * inv);
      total += w;
      if (gsq == 0) return;
      assert(std::abs(gsq - 1) < 1e-6);
      acc += (w * v.distance / gsq) * v.grad;
    });
    return acc / total;
  }

  GeodesicValue<D> eval(const Vec<D>& x, const detail::GeoCache<D>& cx, std::size_t i) const {
    const Vec<D>& y = index_.point(i);
    if (space_.mode == Metric::euclidean) {
      GeodesicValue<D> v;
      const Vec<D> diff = x - y;
      v.distance = diff.norm();
      if (v.distance > 0) v.grad = diff / v.distance;
      return v;
    }
    return detail::geodesic_cached(x, cx, y, cache_[i], space_.k);
  }

  template <class Fn>
  void for_each_term(const Vec<D>& x, double sigma, Fn&& fn) const {
    for_each_term(x, sigma, Exact{}, fn);
  }

  // Gathers the votes that can pass the cutoff, lets `select` thin the list,
  // then calls fn(index, value) for those within the cutoff radius.
  template <class Select, class Fn>
  void for_each_term(const Vec<D>& x, double sigma, Select&& select, Fn&& fn) const {
    const bool curved = space_.mode == Metric::riemannian;
    const detail::GeoCache<D> cx(x, space_.k);
    const std::size_t n = index_.size();
    thread_local std::vector<std::size_t> ids;
    ids.clear();
    double radius = std::numeric_limits<double>::infinity();
    if (std::isinf(cutoff_)) {
      ids.resize(n);
      std::iota(ids.begin(), ids.end(), std::size_t{0});
    } else {
      // Upper bound on the nearest geodesic distance from the Euclidean
      // nearest votes of x and -x.
      double upper = eval(x, cx, index_.nearest(x).index).distance;
      if (curved) upper = std::min(upper, eval(x, cx, index_.nearest(Vec<D>(-x)).index).distance);
      radius = std::sqrt(upper * upper + cutoff_ * sigma * sigma);

      // d(x, y) <= R implies ||x - y|| <= R or ||x + y|| <= R.
      const double r_sq = radius * radius;
      const auto near = [&](std::size_t i) {
        const Vec<D>& y = index_.point(i);
        return (x - y).squaredNorm() <= r_sq || (curved && (x + y).squaredNorm() <= r_sq);
      };
      if (radius >= 0.5 * (cx.r + max_norm_)) {
        // wide kernels reach most votes; a linear scan beats two tree queries
        if (select.draw(n, ids)) {
          std::erase_if(ids, [&](std::size_t i) { return !near(i); });
        } else {
          for (std::size_t i = 0; i < n; ++i)
            if (near(i)) ids.push_back(i);
        }
      } else if (!select.reject(n, near, ids)) {
        index_.radius(x, radius, ids);
        const std::size_t near_x = ids.size();
        if (curved) {
          index_.radius(Vec<D>(-x), radius, ids);
          // the second query repeats votes already found around x
          std::size_t out = near_x;
          for (std::size_t j = near_x; j < ids.size(); ++j)
            if ((x - index_.point(ids[j])).squaredNorm() > r_sq) ids[out++] = ids[j];
          ids.resize(out);
        }
      }
    }
    select.thin(ids);
    for (std::size_t i : ids) {
      const auto v = eval(x, cx, i);
      if (v.distance <= radius) fn(i, v);
    }
  }

  GeodesicSpace space_;
  NeighborIndex<D> index_;
  std::vector<detail::GeoCache<D>> cache_;
  double cutoff_ = 20.0;
  double max_norm_ = 0;
};

}  // namespace symwalk
