#include <gtest/gtest.h>
#include <toritrop/support.hpp>

using namespace toritrop;

namespace {

SupportQ onP2(long a, long b, long c) { return SupportQ(Fan::P2(), {Rational(a), Rational(b), Rational(c)}); }

// max(0, v1, v2) sampled on a fan that carries it
SupportQ maxFn(const Fan& f) {
  return SupportQ::sample(f, [](const V2& v) { return Rational(std::max({Integer(0), v.x, v.y})); });
}
Fan hexFan() { return Fan::fromVectors({V2(1, 0), V2(1, 1), V2(0, 1), V2(-1, 0), V2(-1, -1), V2(0, -1)}); }
SupportQ O1() { return SupportQ::sample(Fan::P2(), [](const V2& v) { return Rational(std::max({Integer(0), -v.x, -v.y})); }); }

// Second difference along the circle: psi(N r + s) + psi(N r - s) - 2 N psi(r) with det(r, s) = 1.
Rational secondDifference(const SupportQ& psi, const RayQ& r) {
  Integer x, y;
  extGcd(r.a(), r.b(), x, y);
  V2 s(-y, x);
  Integer N("1000000000000");
  V2 Nr = N * r.v;
  return psi(Nr + s) + psi(Nr - s) - Rational(2 * N) * psi(r.v);
}

}  // namespace

TEST(Evaluate, Examples) {
  EXPECT_EQ(SupportQ::zero()(V2(3, -7)), 0);
  auto lin = SupportQ::sample(Fan::quadric(), [](const V2& v) { return Rational(2 * v.x - 3 * v.y); });
  EXPECT_EQ(lin(Q2(Rational(1, 3), Rational(5, 2))), Rational(2, 3) - Rational(15, 2));
  EXPECT_EQ(onP2(1, 1, 0)(V2(1, 1)), 2);
  EXPECT_NEAR(onP2(1, 1, 0)(0.3, 0.2), 0.5, 1e-15);
}

TEST(Convexity, Examples) {
  Fan f = hexFan();
  EXPECT_TRUE(isConvex(maxFn(f)));
  EXPECT_TRUE(isConvex(SupportQ::sample(Fan::P2(), [](const V2& v) { return Rational(v.x + 4 * v.y); })));
  EXPECT_FALSE(isConvex(Rational(-1) * maxFn(f)));
}

TEST(CornerMeasure, MatchesCircularSecondDifference) {
  Fan f = hexFan();
  auto psi = maxFn(f);
  auto m = cornerMeasure(psi);
  for (size_t i = 0; i < f.size(); ++i) EXPECT_EQ(m[i], secondDifference(psi, f.ray(i)));
  EXPECT_EQ(m[*f.indexOf(RayQ(1, 0))], 0);
  EXPECT_GT(m[*f.indexOf(RayQ(1, 1))], 0);
  EXPECT_GT(m[*f.indexOf(RayQ(-1, 0))], 0);
  EXPECT_GT(m[*f.indexOf(RayQ(0, -1))], 0);

  auto absv = SupportQ::sample(Fan::quadric(), [](const V2& v) { return Rational(iabs(v.x)); });
  auto ma = cornerMeasure(absv);
  EXPECT_EQ(ma[*Fan::quadric().indexOf(RayQ(0, 1))], 2);
  EXPECT_EQ(ma[*Fan::quadric().indexOf(RayQ(0, -1))], 2);
  EXPECT_EQ(ma[*Fan::quadric().indexOf(RayQ(1, 0))], 0);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto P = randomLatticePolygon(rng, 6);
    auto s = supportOf(P);
    for (size_t i = 0; i < s.fan().size(); ++i) ASSERT_EQ(s.cornerMass(i), secondDifference(s, s.fan().ray(i)));
  }
}

TEST(Subdifferential, Examples) {
  auto pt = subdifferential(SupportQ::zero());
  ASSERT_EQ(pt.vertices.size(), 1u);
  EXPECT_EQ(pt.vertices[0], Q2(V2(0, 0)));
  Fan f = hexFan();
  auto tri = subdifferential(maxFn(f));
  EXPECT_EQ(tri.vertices.size(), 3u);
  EXPECT_EQ(tri.area2(), 1);
  auto sq = subdifferential(SupportQ::sample(refineToSmooth(Fan::fromVectors({V2(1, 1), V2(-1, 1), V2(-1, -1), V2(1, -1)})),
                                             [](const V2& v) { return Rational(iabs(v.x) + iabs(v.y)); }));
  EXPECT_EQ(sq.vertices.size(), 4u);
  EXPECT_EQ(sq.area2(), 8);
  EXPECT_THROW(subdifferential(Rational(-1) * maxFn(f)), DomainError);
}

TEST(MixedArea, Examples) {
  PolytopeQ tri{{Q2(V2(0, 0)), Q2(V2(1, 0)), Q2(V2(0, 1))}};
  PolytopeQ sq{{Q2(V2(0, 0)), Q2(V2(1, 0)), Q2(V2(1, 1)), Q2(V2(0, 1))}};
  PolytopeQ pt{{Q2(V2(3, 4))}};
  EXPECT_EQ(mixedArea(tri, tri), 1);
  EXPECT_EQ(mixedArea(pt, sq), 0);
  EXPECT_EQ(mixedArea(sq, sq), 2);
  EXPECT_EQ(mixedArea(tri, sq), mixedArea(sq, tri));
}

TEST(Intersection, ClassicalNumbers) {
  EXPECT_EQ(intersectionNumber(O1(), O1()), 1);
  EXPECT_EQ(intersectionNumberFan(O1(), O1()), 1);
  auto r1 = SupportQ::sample(Fan::quadric(), [](const V2& v) { return Rational(std::max(Integer(0), v.x)); });
  auto r2 = SupportQ::sample(Fan::quadric(), [](const V2& v) { return Rational(std::max(Integer(0), v.y)); });
  EXPECT_EQ(intersectionNumber(r1, r2), 1);
  EXPECT_EQ(intersectionNumberFan(r1, r2), 1);
  EXPECT_EQ(intersectionNumber(r1, r1), 0);
  auto lin = SupportQ::sample(Fan::P2(), [](const V2& v) { return Rational(v.x - v.y); });
  EXPECT_EQ(intersectionNumber(lin, r2), 0);
  EXPECT_EQ(intersectionNumberFan(lin, r2), 0);
}

TEST(Intersection, FanPathEqualsMixedAreaOnRandomPairs) {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 100; ++t) {
    auto P = randomLatticePolygon(rng, 5), Q = randomLatticePolygon(rng, 5);
    Rational s(std::uniform_int_distribution<int>(1, 7)(rng), std::uniform_int_distribution<int>(1, 5)(rng));
    auto a = s * supportOf(P), b = supportOf(Q);
    auto x = intersectionNumberFan(a, b);
    ASSERT_EQ(x, intersectionNumber(a, b));
    ASSERT_EQ(x, intersectionNumberFan(b, a));
    ASSERT_EQ(x, pairing(a, b));
    // Hodge index direction on nef classes
    ASSERT_GE(x * x, intersectionNumber(a, a) * intersectionNumber(b, b));
  }
}

TEST(Newton, Examples) {
  auto mono = newtonSupport({V2(2, 3)});
  for (auto& m : mono.cornerMasses()) EXPECT_EQ(m, 0);

  auto line = newtonSupport({V2(0, 0), V2(1, 0), V2(0, 1)});
  EXPECT_EQ(line.fan(), Fan::P2());
  for (auto& m : line.cornerMasses()) EXPECT_EQ(m, 1);
  EXPECT_EQ(line(V2(-1, -1)), 1);
  EXPECT_EQ(line(V2(1, 0)), 0);

  auto quad = newtonSupport({V2(0, 0), V2(1, 0), V2(0, 1), V2(1, 1)});
  EXPECT_EQ(quad.fan(), Fan::quadric());
  for (auto& m : quad.cornerMasses()) EXPECT_EQ(m, 1);

  auto bin = newtonSupport({V2(0, 0), V2(2, -1)});
  EXPECT_EQ(bin(V2(1, 2)) + bin(V2(-1, -2)), 0);
  EXPECT_GT(bin(V2(1, 0)) + bin(V2(-1, 0)), 0);
  EXPECT_THROW(newtonSupport({}), DomainError);
}

TEST(Homogenize, Examples) {
  std::vector<RayQ> rays = {RayQ(1, 0), RayQ(0, 1), RayQ(-1, -1), RayQ(2, -1)};
  auto exact = O1();
  RadialEvaluator hom = [&](double x, double y) { return exact(x, y); };
  auto h = homogenize(hom, rays, 8);
  for (auto& r : rays) EXPECT_DOUBLE_EQ(h.psi(r.v), toDouble(exact(r.v)));

  RadialEvaluator off = [&](double x, double y) { return exact(x, y) + 3 * std::sin(x + 2 * y); };
  auto ho = homogenize(off, rays, 60);
  for (auto& r : rays) EXPECT_LE(std::abs(ho.psi(r.v) - toDouble(exact(r.v))), 3.0 / 60 + 1e-12);

  RadialEvaluator soft = [](double x, double) { return std::log1p(std::exp(x)); };
  auto hs = homogenize(soft, {RayQ(1, 0), RayQ(0, 1), RayQ(-1, -1)}, 50);
  EXPECT_NEAR(hs.psi(V2(1, 0)), 1.0, 1e-6);
}

TEST(Homogenize, GapReport) {
  auto exact = toDoubleSupport(O1());
  std::vector<RayQ> rays = {RayQ(1, 0), RayQ(-1, -1), RayQ(3, 1)};
  std::vector<double> grid = {1, 2, 4, 8, 16};
  auto g0 = nearHomogeneityGap([&](double x, double y) { return exact(x, y); }, exact, rays, grid);
  EXPECT_EQ(g0.gap, 0);
  EXPECT_TRUE(g0.monotone);
  RadialEvaluator e = [&](double x, double y) {
    double t = std::max(std::abs(x), std::abs(y));
    return exact(x, y) - std::min(t, 5.0);
  };
  auto g = nearHomogeneityGap(e, exact, {RayQ(1, 0), RayQ(0, 1)}, grid);
  EXPECT_DOUBLE_EQ(g.gap, 5);
  EXPECT_TRUE(g.monotone);
}

TEST(Lelong, Examples) {
  auto lin = SupportQ::sample(Fan::P2(), [](const V2& v) { return Rational(v.x + v.y); });
  EXPECT_EQ(lelongAtCorner(lin, Cone2(RayQ(1, 0), RayQ(0, 1))), 0);
  auto m = maxFn(hexFan());
  EXPECT_EQ(lelongAtCorner(m, Cone2(RayQ(1, 0), RayQ(0, 1))), 1);
  EXPECT_EQ(lelongAtCorner(m, Cone2(RayQ(0, 1), RayQ(-1, -1))), 1);
  EXPECT_THROW(lelongAtCorner(m, Cone2(RayQ(1, 0), RayQ(1, 2))), DomainError);
}

TEST(Anticanonical, ClassicalValuesAndBlowupDrop) {
  EXPECT_EQ(anticanonicalPairing(O1()), 3);
  auto lin = SupportQ::sample(Fan::P2(), [](const V2& v) { return Rational(5 * v.x - v.y); });
  EXPECT_EQ(anticanonicalPairing(lin), 0);
  // max(0, v1, v2) is the class 2H in the Log = -log|.| orientation
  auto m = maxFn(hexFan());
  EXPECT_EQ(anticanonicalPairing(m, Fan::P2()), 6);
  Fan b = blowup(Fan::P2(), Cone2(RayQ(1, 0), RayQ(0, 1)));
  EXPECT_EQ(anticanonicalPairing(m, b), 5);

  std::mt19937_64 rng(99);
  for (int t = 0; t < 100; ++t) {
    auto psi = supportOf(randomLatticePolygon(rng, 6));
    Fan X = Fan::P2();
    Rational prev = anticanonicalPairing(psi, X);
    ASSERT_GE(prev, 0);
    for (int k = 0; k < 5; ++k) {
      Cone2 s = X.sector(std::uniform_int_distribution<size_t>(0, X.size() - 1)(rng));
      Rational nu = lelongAtCorner(psi, s);
      X = blowup(X, s);
      Rational cur = anticanonicalPairing(psi, X);
      ASSERT_EQ(prev - cur, nu);
      ASSERT_GE(nu, 0);
      ASSERT_GE(cur, 0);
      prev = cur;
    }
  }
}
