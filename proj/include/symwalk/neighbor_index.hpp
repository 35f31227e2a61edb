#pragma once

#include <symwalk/core.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace symwalk {

/// Exact kd-tree over a fixed point set. Read-only after construction.
template <int D>
class NeighborIndex {
 public:
  struct Hit {
    std::size_t index = 0;
    double distance = std::numeric_limits<double>::infinity();
  };

  NeighborIndex() = default;

  explicit NeighborIndex(std::span<const Vec<D>> points)
      : points_(points.begin(), points.end()), order_(points.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 2);
      build(0, points_.size());
    }
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec<D>& point(std::size_t i) const { return points_[i]; }
  const std::vector<Vec<D>>& points() const { return points_; }

  /// Nearest neighbor of q; `skip` excludes one index (e.g. the query itself).
  Hit nearest(const Vec<D>& q, std::size_t skip = npos) const {
    Hit best;
    double best_sq = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) nearest_rec(0, q, skip, best, best_sq);
    if (best_sq < std::numeric_limits<double>::infinity()) best.distance = std::sqrt(best_sq);
    return best;
  }

  /// Appends every index with ||p - q|| <= radius to out (unordered).
  void radius(const Vec<D>& q, double radius, std::vector<std::size_t>& out) const {
    if (nodes_.empty() || radius < 0) return;
    radius_rec(0, q, radius * radius, out);
  }

  std::vector<std::size_t> radius(const Vec<D>& q, double r) const {
    std::vector<std::size_t> out;
    radius(q, r, out);
    return out;
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

 private:
  static constexpr std::size_t kLeafSize = 12;

  struct Node {
    std::size_t begin = 0, end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0;
    std::size_t left = 0, right = 0;
    Vec<D> lo, hi;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    Vec<D> lo = Vec<D>::Constant(std::numeric_limits<double>::infinity());
    Vec<D> hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double box_sq(const Node& n, const Vec<D>& q) {
    const Vec<D> d = (n.lo - q).cwiseMax(q - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
  }

  void nearest_rec(std::size_t id, const Vec<D>& q, std::size_t skip, Hit& best,
                   double& best_sq) const {
    const Node& n = nodes_[id];
    if (box_sq(n, q) > best_sq) return;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == skip) continue;
        const double d = (points_[idx] - q).squaredNorm();
        if (d < best_sq || (d == best_sq && idx < best.index)) {
          best_sq = d;
          best.index = idx;
        }
      }
      return;
    }
    const bool go_left = q[n.axis] < n.split;
    nearest_rec(go_left ? n.left : n.right, q, skip, best, best_sq);
    nearest_rec(go_left ? n.right : n.left, q, skip, best, best_sq);
  }

  void radius_rec(std::size_t id, const Vec<D>& q, double r_sq,
                  std::vector<std::size_t>& out) const {
    const Node& n = nodes_[id];
    if (box_sq(n, q) > r_sq) return;
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i)
        if ((points_[order_[i]] - q).squaredNorm() <= r_sq) out.push_back(order_[i]);
      return;
    }
    radius_rec(n.left, q, r_sq, out);
    radius_rec(n.right, q, r_sq, out);
  }

  std::vector<Vec<D>> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace symwalk
