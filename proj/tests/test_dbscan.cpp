#include <symwalk/dbscan.hpp>

#include <gtest/gtest.h>

#include <random>
#include <map>

namespace symwalk {
namespace {

// Textbook DBSCAN over an explicit distance matrix, used as the reference.
struct Reference {
  std::vector<int> labels;
  std::vector<char> core;
};

Reference reference_dbscan(const std::vector<std::vector<double>>& dist, double eps, std::size_t min_pts) {
  const std::size_t n = dist.size();
  Reference r;
  r.labels.assign(n, -1);
  r.core.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c += dist[i][j] <= eps;
    r.core[i] = c >= min_pts;
  }
  int id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.core[i] || r.labels[i] >= 0) continue;
    // flood fill over core points
    std::vector<std::size_t> stack{i};
    r.labels[i] = id;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (!r.core[b] || r.labels[b] >= 0 || dist[a][b] > eps) continue;
        r.labels[b] = id;
        stack.push_back(b);
      }
    }
    ++id;
  }
  return r;
}

// Core points must form exactly the same partition; a border point must be
// in the cluster of some core point within eps; noise must be exactly the
// points with no core point within eps.
template <int D>
void expect_matches_reference(const std::vector<Vec<D>>& pts, double eps, std::size_t min_pts,
                              const GeodesicSpace& geo) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = i == j ? 0.0 : geodesic(pts[i], pts[j], geo);
  const Reference ref = reference_dbscan(dist, eps, min_pts);
  const Clustering got = dbscan(pts, DbscanConfig{eps, min_pts}, geo);

  std::map<int, int> to_ref, from_ref;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ref.core[i]) continue;
    ASSERT_GE(got.labels[i], 0);
    const auto [it, fresh] = to_ref.emplace(got.labels[i], ref.labels[i]);
    EXPECT_EQ(it->second, ref.labels[i]);
    const auto [jt, fresh2] = from_ref.emplace(ref.labels[i], got.labels[i]);
    EXPECT_EQ(jt->second, got.labels[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ref.core[i]) continue;
    bool reachable = false, consistent = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!ref.core[j] || dist[i][j] > eps) continue;
      reachable = true;
      consistent |= got.labels[i] == got.labels[j];
    }
    if (reachable) {
      EXPECT_TRUE(consistent) << "border point " << i;
    } else {
      EXPECT_EQ(got.labels[i], Clustering::kNoise) << "point " << i;
    }
  }
  std::size_t members = 0;
  for (std::size_t c = 0; c < got.clusters.size(); ++c) {
    members += got.clusters[c].size();
    ASSERT_FALSE(got.clusters[c].empty());
    EXPECT_TRUE(ref.core[got.clusters[c].front()]);
    for (std::size_t i : got.clusters[c]) EXPECT_EQ(got.labels[i], static_cast<int>(c));
  }
  std::size_t labeled = 0;
  for (int l : got.labels) labeled += l >= 0;
  EXPECT_EQ(members, labeled);
}

TEST(Dbscan, TwoSeparatedBlobs) {
  std::vector<Vec<2>> pts;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 0.01);
  for (int i = 0; i < 100; ++i) pts.push_back(Vec<2>(g(rng), g(rng)));
  for (int i = 0; i < 100; ++i) pts.push_back(Vec<2>(1 + g(rng), g(rng)));
  const auto c = dbscan(pts, DbscanConfig{0.05, 5}, GeodesicSpace::euclidean());
  EXPECT_EQ(c.clusters.size(), 2u);
  for (int l : c.labels) EXPECT_NE(l, Clustering::kNoise);
}

TEST(Dbscan, SparsePointsAreNoise) {
  const std::vector<Vec<2>> pts{Vec<2>(0, 0), Vec<2>(1, 0), Vec<2>(0, 1)};
  const auto c = dbscan(pts, DbscanConfig{0.1, 2}, GeodesicSpace::euclidean());
  EXPECT_TRUE(c.clusters.empty());
  for (int l : c.labels) EXPECT_EQ(l, Clustering::kNoise);
  EXPECT_TRUE(dbscan(std::vector<Vec<2>>{}, DbscanConfig{}, GeodesicSpace::euclidean()).labels.empty());
  EXPECT_THROW(dbscan(pts, DbscanConfig{0, 2}, GeodesicSpace::euclidean()), Error);
}

TEST(Dbscan, AntipodalPointsOnTheSphereJoinOneCluster) {
  // a blob straddling (0.3, 0) == (-0.3, 0)
  const double k = 0.3;
  std::vector<Vec<2>> pts;
  for (int i = 0; i < 10; ++i) {
    const double a = 0.01 * i;
    pts.push_back(k * Vec<2>(std::cos(a), std::sin(a)));
    pts.push_back(-k * Vec<2>(std::cos(a + 0.005), std::sin(a + 0.005)));
  }
  EXPECT_EQ(dbscan(pts, DbscanConfig{0.01, 3}, GeodesicSpace::riemannian(k)).clusters.size(), 1u);
  EXPECT_EQ(dbscan(pts, DbscanConfig{0.01, 3}, GeodesicSpace::euclidean()).clusters.size(), 2u);
}

TEST(Dbscan, MatchesReferenceOnRandomData) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec<2>> flat;
    for (int i = 0; i < 300; ++i) flat.push_back(Vec<2>(u(rng), u(rng)));
    expect_matches_reference(flat, 0.05, 4, GeodesicSpace::euclidean());

    const double k = 0.3;
    std::vector<Vec<3>> curved;
    for (int i = 0; i < 250; ++i)
      curved.push_back(Vec<3>(g(rng), g(rng), g(rng)).normalized() * (k + 0.3 * u(rng) * u(rng)));
    expect_matches_reference(curved, 0.12, 4, GeodesicSpace::riemannian(k));
  }
}

}  // namespace
}  // namespace symwalk
