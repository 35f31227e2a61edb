#include <symwalk/shapes.hpp>
#include <symwalk/transform_space.hpp>

#include <gtest/gtest.h>

#include <random>

namespace symwalk {
namespace {

TEST(PairToPlane, SwapsThePair) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 1000; ++t) {
    const Vec<3> p(u(rng), u(rng), u(rng)), q(u(rng), u(rng), u(rng));
    const auto plane = pair_to_plane(p, q);
    EXPECT_LT((reflect_point(p, plane) - q).norm(), 1e-12);
    EXPECT_GE(plane.offset, 0.0);
    EXPECT_NEAR(plane.normal.norm(), 1.0, 1e-15);
  }
}

TEST(PairToPlane, KnownPair) {
  // (1,0) and (-1,0) swap across x = 0
  const auto plane = pair_to_plane(Vec<2>(1, 0), Vec<2>(-1, 0));
  EXPECT_EQ(plane.normal, Vec<2>(1, 0));
  EXPECT_EQ(plane.offset, 0.0);
  EXPECT_THROW(pair_to_plane(Vec<2>(0.5, 0.5), Vec<2>(0.5, 0.5)), Error);
}

TEST(Embed, KnownValues) {
  // plane x = 0.2 with k = 0.3 sits at (0.5, 0)
  const Vec<2> e = embed_plane(HoughPlane<2>{Vec<2>(1, 0), 0.2}, 0.3);
  EXPECT_NEAR((e - Vec<2>(0.5, 0)).norm(), 0.0, 1e-15);
  const auto d = decode_sample(e, 0.3);
  EXPECT_NEAR(d.offset, 0.2, 1e-15);
  EXPECT_THROW(decode_sample(Vec<2>(0.1, 0), 0.3), Error);
}

TEST(Embed, RoundTripsAndStaysValid) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> off(0, 2);
  for (int t = 0; t < 20000; ++t) {
    const HoughPlane<3> p{Vec<3>(g(rng), g(rng), g(rng)).normalized(), off(rng)};
    const Vec<3> x = embed_plane(p, 0.5);
    EXPECT_GE(x.norm(), 0.5 - 1e-12);
    const auto back = decode_sample(x, 0.5);
    EXPECT_LT((back.normal - p.normal).norm(), 1e-12);
    EXPECT_NEAR(back.offset, p.offset, 1e-12);
  }
}

TEST(ReflectiveSpace, CountsValidityAndDeterminism) {
  const auto s = gen_shape_2d(ShapeKind::square);
  const auto a = build_reflective_space(s.cloud, 3000, 0.3, 9);
  const auto b = build_reflective_space(s.cloud, 3000, 0.3, 9);
  ASSERT_EQ(a.samples.size(), 3000u);
  EXPECT_EQ(a.kind, SpaceKind::reflective);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_GE(a.samples[i].norm(), 0.3 - 1e-12);
    EXPECT_EQ(a.samples[i], b.samples[i]);
  }
}

TEST(ReflectiveSpace, RejectsTinyClouds) {
  PointCloud<2> c;
  c.points = {Vec<2>(0, 0)};
  EXPECT_THROW(build_reflective_space(c, 10, 0.3, 0), Error);
  c.points.push_back(Vec<2>(0, 0));
  EXPECT_THROW(build_reflective_space(c, 10, 0.3, 0), Error);
}

TEST(ReflectiveSpace, MirrorPairVotesLandOnTheAxes) {
  // For a mirror-symmetric square, the share of votes within 1e-9 of an axis
  // embed equals the share of sampled pairs that are exact mirror pairs.
  const auto s = gen_shape_2d(ShapeKind::square);
  const double k = 0.3;
  const auto space = build_reflective_space(s.cloud, 20000, k, 4);
  std::size_t on_axis = 0;
  for (const auto& x : space.samples) {
    for (const auto& p : s.planes) {
      const Vec<2> e = embed_plane(p.canonical(), k);
      if ((x - e).norm() < 1e-9 || (x + e).norm() < 1e-9) {
        ++on_axis;
        break;
      }
    }
  }
  // brute-force oracle over all ordered pairs
  const NeighborIndex<2> index(s.cloud.points);
  std::size_t mirror_pairs = 0, all = 0;
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    for (std::size_t j = 0; j < s.cloud.size(); ++j) {
      if (i == j) continue;
      ++all;
      for (const auto& p : s.planes) {
        if ((reflect_point(s.cloud.points[i], p) - s.cloud.points[j]).norm() < 1e-9) {
          ++mirror_pairs;
          break;
        }
      }
    }
  }
  const double expect = static_cast<double>(mirror_pairs) / static_cast<double>(all);
  const double got = static_cast<double>(on_axis) / static_cast<double>(space.samples.size());
  const double se = std::sqrt(expect * (1 - expect) / static_cast<double>(space.samples.size()));
  EXPECT_NEAR(got, expect, 4 * se);
}

TEST(TranslationSpace, VotesAreDisplacements) {
  PointCloud<2> c;
  c.points = {Vec<2>(0, 0), Vec<2>(1, 0)};
  const auto t = build_translation_space(c, 50, 3);
  EXPECT_EQ(t.k, 0.0);
  for (const auto& v : t.samples) EXPECT_NEAR(std::abs(v.x()), 1.0, 1e-15);
}

TEST(Rotation, TwoReflectionsGiveTwiceTheAngle) {
  const double a = 0.3, b = 0.3 + std::numbers::pi / 4;
  const HoughPlane<2> p1{Vec<2>(-std::sin(a), std::cos(a)), 0.0};
  const HoughPlane<2> p2{Vec<2>(-std::sin(b), std::cos(b)), 0.0};
  const Rotation<2> r = compose_rotation(p1, p2);
  const Vec<2> x(0.7, -0.2);
  const Vec<2> two_step = reflect_point(reflect_point(x, p1), p2);
  EXPECT_LT((r.apply(x) - two_step).norm(), 1e-12);
  EXPECT_NEAR(std::min(r.angle, 2 * std::numbers::pi - r.angle), std::numbers::pi / 2, 1e-12);
}

TEST(Rotation, EmbedDecodeRoundTrip) {
  Rotation<2> r;
  r.point = Vec<2>(0.1, -0.3);
  r.angle = 1.2;
  const Rotation<2> back = decode_rotation(embed_rotation(r));
  EXPECT_NEAR(back.angle, r.angle, 1e-12);
  EXPECT_LT((back.point - r.point).norm(), 1e-12);
}

TEST(SpaceKind, ParseRoundTrip) {
  for (auto k : {SpaceKind::reflective, SpaceKind::translational, SpaceKind::rotational2d})
    EXPECT_EQ(parse_space_kind(to_string(k)), k);
  EXPECT_THROW(parse_space_kind("shear"), Error);
}

}  // namespace
}  // namespace symwalk
