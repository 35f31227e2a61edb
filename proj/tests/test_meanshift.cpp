#include <symwalk/meanshift.hpp>

#include <gtest/gtest.h>

#include <random>

namespace symwalk {
namespace {

TransformSpace<2> blobs(std::initializer_list<Vec<2>> centers, int per, double sd, std::uint64_t seed) {
  TransformSpace<2> s{SpaceKind::translational, 0.0, {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, sd);
  for (const auto& c : centers)
    for (int i = 0; i < per; ++i) s.samples.push_back(Vec<2>(c.x() + g(rng), c.y() + g(rng)));
  return s;
}

TEST(MeanShiftStep, IsTheKernelWeightedMean) {
  const std::vector<Vec<2>> pts{Vec<2>(0, 0), Vec<2>(1, 0)};
  const NeighborIndex<2> index(pts);
  MeanShiftConfig c;
  c.bandwidth = 1;
  c.neighborhood_radius = 10;
  std::vector<std::size_t> scratch;
  // from (0.25, 0): weights e^-0.0625 and e^-0.5625
  const double w0 = std::exp(-0.0625), w1 = std::exp(-0.5625);
  EXPECT_NEAR(mean_shift_step(Vec<2>(0.25, 0), index, c, scratch).x(), w1 / (w0 + w1), 1e-15);
  c.kernel = Kernel::epanechnikov;
  // weights 1 - 0.0625 and 1 - 0.5625
  EXPECT_NEAR(mean_shift_step(Vec<2>(0.25, 0), index, c, scratch).x(), 0.4375 / 1.375, 1e-15);
}

TEST(MeanShiftStep, StaysPutWithNoNeighbors) {
  const std::vector<Vec<2>> pts{Vec<2>(5, 5)};
  const NeighborIndex<2> index(pts);
  MeanShiftConfig c;
  std::vector<std::size_t> scratch;
  EXPECT_EQ(mean_shift_step(Vec<2>(0, 0), index, c, scratch), Vec<2>(0, 0));
}

TEST(MeanShift, FindsEachBlobWithItsBasin) {
  const auto s = blobs({Vec<2>(0.5, 0.5), Vec<2>(-0.6, 0.2)}, 200, 0.02, 3);
  MeanShiftConfig c;
  c.bandwidth = 0.05;
  const auto modes = mean_shift(s, c);
  ASSERT_GE(modes.size(), 2u);
  std::size_t near_a = 0, near_b = 0;
  for (const auto& m : modes) {
    if ((m.point - Vec<2>(0.5, 0.5)).norm() < 0.01) near_a += m.basin;
    if ((m.point - Vec<2>(-0.6, 0.2)).norm() < 0.01) near_b += m.basin;
  }
  EXPECT_EQ(near_a, 200u);
  EXPECT_EQ(near_b, 200u);
  for (std::size_t i = 1; i < modes.size(); ++i) EXPECT_GE(modes[i - 1].basin, modes[i].basin);
}

TEST(MeanShift, SubsamplesTrajectoriesDeterministically) {
  const auto s = blobs({Vec<2>(0, 0)}, 500, 0.05, 4);
  MeanShiftConfig c;
  c.max_trajectories = 50;
  c.seed = 2;
  const auto a = mean_shift(s, c), b = mean_shift(s, c);
  std::size_t total = 0;
  for (const auto& m : a) total += m.basin;
  EXPECT_EQ(total, 50u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].point, b[i].point);
}

TEST(MeanShift, RejectsBadConfig) {
  const auto s = blobs({Vec<2>(0, 0)}, 5, 0.05, 4);
  MeanShiftConfig c;
  c.bandwidth = 0;
  EXPECT_THROW(mean_shift(s, c), Error);
  TransformSpace<2> empty{SpaceKind::translational, 0.0, {}};
  EXPECT_THROW(mean_shift(empty, MeanShiftConfig{}), Error);
}

}  // namespace
}  // namespace symwalk
