#include <symwalk/applications.hpp>
#include <symwalk/shapes.hpp>

#include <gtest/gtest.h>

namespace symwalk {
namespace {

TEST(Symmetrize, SymmetricCloudIsUnchanged) {
  const auto s = gen_shape_2d(ShapeKind::square);
  const auto out = symmetrize(s.cloud, s.planes[1], SymmetrizeConfig{});
  for (std::size_t i = 0; i < s.cloud.size(); ++i)
    EXPECT_LT((out.points[i] - s.cloud.points[i]).norm(), 1e-9);
}

TEST(Symmetrize, BlendZeroIsIdentity) {
  const auto s = gen_shape_2d(ShapeKind::square);
  const auto noisy = add_noise(s.cloud, 0.03, NoiseMode::isotropic, 7);
  SymmetrizeConfig c;
  c.blend = 0;
  EXPECT_EQ(symmetrize(noisy, s.planes[0], c).points, noisy.points);
}

TEST(Symmetrize, ShrinksTheAsymmetryOfANoisySquare) {
  const auto s = gen_shape_2d(ShapeKind::square);
  const auto noisy = add_noise(s.cloud, 0.03, NoiseMode::isotropic, 7);
  // vertical axis
  HoughPlane<2> axis = s.planes[0];
  for (const auto& p : s.planes)
    if (std::abs(p.normal.x()) > 0.99) axis = p;
  SymmetrizeConfig c;
  // correspondences must reach across the noise
  c.support_eps = 0.1;
  const double before = asymmetry_residual(noisy, axis);
  double prev = before;
  PointCloud<2> cur = noisy;
  SymmetrizeConfig one = c;
  one.iterations = 1;
  for (int it = 0; it < 3; ++it) {
    cur = symmetrize(cur, axis, one);
    const double r = asymmetry_residual(cur, axis);
    EXPECT_LE(r, prev + 1e-12);
    prev = r;
  }
  EXPECT_EQ(symmetrize(noisy, axis, c).points, cur.points);
  EXPECT_LE(prev * 5, before);
}

TEST(Symmetrize, RejectsBadBlend) {
  SymmetrizeConfig c;
  c.blend = 1.5;
  EXPECT_THROW(symmetrize(PointCloud<2>{}, HoughPlane<2>{}, c), Error);
}

TEST(SequentialCompress, SnapshotsShrinkAndMatchTheStages) {
  const auto s = gen_shape_2d(ShapeKind::square);
  std::vector<SymmetryResult<2>> results;
  for (const auto& p : s.planes) results.push_back(plane_support(p, s.cloud, 0.02));
  const auto sc = sequential_compress(s.cloud, results, 0.02);
  ASSERT_EQ(sc.snapshots.size(), sc.compressed.stages.size() + 1);
  EXPECT_EQ(sc.snapshots[0].size(), s.cloud.size());
  for (std::size_t i = 1; i < sc.snapshots.size(); ++i) {
    EXPECT_LE(sc.snapshots[i].size(), sc.snapshots[i - 1].size());
    EXPECT_EQ(sc.snapshots[i].size(), sc.compressed.stages[i - 1].remaining);
  }
  EXPECT_LE(sc.compressed.ratio, 0.35);
}

TEST(SequentialCompress, NothingDetected) {
  const auto s = gen_shape_2d(ShapeKind::square);
  const auto sc = sequential_compress(s.cloud, std::vector<SymmetryResult<2>>{}, 0.02);
  EXPECT_EQ(sc.snapshots.size(), 1u);
  EXPECT_EQ(sc.compressed.ratio, 1.0);
}

}  // namespace
}  // namespace symwalk
