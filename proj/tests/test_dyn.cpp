#include <gtest/gtest.h>

#include "toritrop/toric_dyn.hpp"

using namespace toritrop;

namespace {

const ExcCurve* findExc(const ExcIndData& d, const Laurent& F) {
  for (auto& e : d.exc)
    if (e.factor == F) return &e;
  return nullptr;
}

ToricGenerator artificial(int k) {
  Factored f;
  Laurent one(Rational(1));
  f.num[0] = {Laurent::x1()};
  for (int i = 0; i < k; ++i) f.num[0].push_back(one - Laurent::x1());
  f.num[1] = {Laurent::x2()};
  return ToricGenerator::birational(f, "art");
}

}  // namespace

TEST(ExcInd, MonomialIsEmpty) {
  auto d = excIndData(monomialWord(IntMat2(1, 2, -2, 1)));
  EXPECT_TRUE(d.exc.empty());
  EXPECT_TRUE(d.ind.empty());
}

TEST(ExcInd, Involution) {
  ToricMapWord w{{exampleG()}, "g"};
  auto d = excIndData(w);
  Laurent x = Laurent::x1(), y = Laurent::x2(), one(Rational(1));
  struct Want {
    Laurent F;
    V2 ray;
  };
  std::vector<Want> want = {{one - x - y, V2(-1, -1)}, {one - x + y, V2(1, 0)}, {one + x - y, V2(0, 1)}};
  ASSERT_EQ(d.exc.size(), 3u);
  for (auto& wnt : want) {
    auto* e = findExc(d, wnt.F);
    ASSERT_NE(e, nullptr) << wnt.F.str();
    EXPECT_EQ(e->stageImage, wnt.ray);
    ASSERT_TRUE(e->contracted);
    EXPECT_NEAR(std::abs(e->stagePoint->fiber() - CplxL(1)), 0.0L, 1e-15L);
    EXPECT_FALSE(e->lowConfidence);
  }
  // the three classical base points, all on the poles
  ASSERT_EQ(d.ind.size(), 3u);
  for (auto& p : d.ind) {
    EXPECT_TRUE(p.onPole);
    EXPECT_TRUE(p.certified);
    EXPECT_EQ(p.multiplicity, 2);
    EXPECT_NEAR(std::abs(p.fiber - CplxL(1)), 0.0L, 1e-15L);
    bool known = p.ray == V2(-1, -1) || p.ray == V2(1, 0) || p.ray == V2(0, 1);
    EXPECT_TRUE(known);
  }
}

TEST(ExcInd, ExampleWordPullsBack) {
  auto d = excIndData(exampleWord());
  ASSERT_EQ(d.exc.size(), 3u);
  Laurent x = Laurent::x1(), y = Laurent::x2(), one(Rational(1));
  auto* e = findExc(d, one - x - y);
  ASSERT_NE(e, nullptr);
  ASSERT_TRUE(e->pulled.has_value());
  // 1 - x1 x2^2 - x1^-2 x2, cleared of x1^-2
  Laurent want = Laurent::monomial(2, 0) - Laurent::monomial(3, 2) - Laurent::monomial(0, 1);
  EXPECT_EQ(*e->pulled, want);
  EXPECT_EQ(e->stage, 1u);
  EXPECT_EQ(e->wordImage, V2(-1, -1));
  ASSERT_TRUE(e->wordPoint.has_value());
  EXPECT_EQ(e->wordPoint->ray, V2(-1, -1));
}

TEST(ExcInd, TorusIndeterminacy) {
  // (x1, x2) -> ((x1 - 1)/(x2 - 1), x2): the lines x1 = 1 and x2 = 1 meet at (1, 1)
  Laurent one(Rational(1));
  Factored f;
  f.num[0] = {Laurent::x1() - one};
  f.den[0] = {Laurent::x2() - one};
  f.num[1] = {Laurent::x2()};
  auto d = excIndData(ToricMapWord{{ToricGenerator::birational(f)}, "t"});
  int torus = 0;
  for (auto& p : d.ind)
    if (!p.onPole) {
      ++torus;
      EXPECT_NEAR(double(std::abs(p.point[0] - CplxL(1))), 0.0, 1e-20);
      EXPECT_NEAR(double(std::abs(p.point[1] - CplxL(1))), 0.0, 1e-20);
      EXPECT_TRUE(p.certified);
    }
  EXPECT_EQ(torus, 1);
}

TEST(PoleDynamics, MatchesEvaluationNearThePole) {
  // x = c s^tau with s tiny: the leading behaviour of f(x) must match the pole step
  auto w = exampleWord();
  PrecisionScope scope(120);
  std::vector<V2> taus = {V2(2, 1), V2(-1, 3), V2(-1, -1), V2(5, -2), V2(1, 0)};
  Real s = boost::multiprecision::pow(Real(10), -40);
  for (auto& tau : taus) {
    // c = (2+i, 3): fiber x^perp(tau)
    std::array<CR, 2> c = {CR(Real(2), Real(1)), CR(Real(3))};
    V2 m = perpOf(tau);
    CR lam = CR(Real(m.x)) * logC(c[0]) + CR(Real(m.y)) * logC(c[1]);
    PolePoint p{tau, lam};
    bool hit = false;
    PolePoint q = pushPole(w, 0, p, Real(1e-30), hit);
    EXPECT_FALSE(hit);
    std::array<CR, 2> x = {c[0] * expC(CR(boost::multiprecision::log(s) * Real(tau.x))),
                           c[1] * expC(CR(boost::multiprecision::log(s) * Real(tau.y)))};
    auto y = evalWordIn(w, x, [](const Rational& r) { return CR::fromRational(r); });
    V2 m2 = perpOf(q.ray);
    CR lamY = CR(Real(m2.x)) * logC(y[0]) + CR(Real(m2.y)) * logC(y[1]);
    CR diff = expC(lamY - q.lam) - CR(1);
    EXPECT_LT(abs(diff).convert_to<double>(), 1e-30);
    // the ray agrees with the tropicalization
    Q2 img = tropicalComposite(w)(Q2(tau));
    EXPECT_EQ(q.ray, primitive(clearDenominators(img)).v);
  }
}

TEST(ContractionOrder, ExampleLines) {
  auto w = exampleWord();
  auto d = excIndData(w);
  for (auto& e : d.exc) {
    auto c = estimateContractionOrder(w, e);
    EXPECT_TRUE(c.stable) << e.factor.str();
    EXPECT_GT(c.slope, 0);
    EXPECT_EQ(c.rounded, Rational(1));
    EXPECT_NEAR(c.value, 1.0, 0.02);
  }
}

TEST(ContractionOrder, ScalesWithMultiplicity) {
  for (int k = 1; k <= 3; ++k) {
    ToricMapWord w{{artificial(k)}, "art"};
    auto d = excIndData(w);
    ASSERT_EQ(d.exc.size(), 1u);
    EXPECT_FALSE(d.exc[0].contracted);  // {x1 = 1} maps onto a pole, not to a point
    auto c = estimateContractionOrder(w, d.exc[0]);
    EXPECT_TRUE(c.stable);
    EXPECT_NEAR(c.slope, double(k), 0.02 * k);
    EXPECT_EQ(c.rounded, Rational(k));
  }
}

TEST(InternalStability, MonomialIsVacuous) {
  auto r = checkInternalStability(monomialWord(IntMat2(1, 2, -2, 1)), 50);
  EXPECT_TRUE(r.orbits.empty());
  EXPECT_TRUE(r.stable);
}

TEST(InternalStability, ExampleWord) {
  auto r = checkInternalStability(exampleWord(), 50, 1e-8);
  ASSERT_EQ(r.orbits.size(), 3u);
  EXPECT_EQ(r.indCount, 3u);
  for (auto& o : r.orbits) {
    EXPECT_EQ(o.status, "clean");
    EXPECT_EQ(o.rays.size(), 51u);
  }
  EXPECT_TRUE(r.stable);
  EXPECT_TRUE(r.conclusive);
}

TEST(InternalStability, DetectsPlantedCollision) {
  // g alone: each contracted line lands on a base point of g itself
  auto r = checkInternalStability(ToricMapWord{{exampleG()}, "g"}, 5, 1e-8);
  ASSERT_EQ(r.orbits.size(), 3u);
  for (auto& o : r.orbits) {
    EXPECT_EQ(o.status, "collision");
    EXPECT_EQ(o.iterate, 1);
  }
  EXPECT_FALSE(r.stable);
}

TEST(Preimages, MonomialRootsOfUnity) {
  IntMat2 M(1, 2, -2, 1);
  auto r = preimages(monomialWord(M), {CR(1), CR(1)}, 64);
  ASSERT_EQ(r.points.size(), 5u);
  EXPECT_TRUE(r.ok);
  PrecisionScope scope(64);
  for (size_t i = 0; i < r.points.size(); ++i) {
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(abs(r.points[i][k]).convert_to<double>(), 1.0, 1e-30);
    // fifth roots of unity
    for (int k = 0; k < 2; ++k) {
      CR z = r.points[i][k], p = z * z * z * z * z;
      EXPECT_LT(abs(p - CR(1)).convert_to<double>(), 1e-30);
    }
    for (size_t j = 0; j < i; ++j) EXPECT_GT(detail::dist2(r.points[i], r.points[j]).convert_to<double>(), 0.1);
  }
}

TEST(Preimages, ExampleWordAndDegree) {
  auto w = exampleWord();
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    PrecisionScope scope(64);
    PointC p = {CR(Real(randomRational(rng, -2, 2)), Real(randomRational(rng, -2, 2))),
                CR(Real(randomRational(rng, -2, 2)), Real(randomRational(rng, -2, 2)))};
    auto r = preimages(w, p, 64);
    EXPECT_EQ(r.points.size(), 5u);
    EXPECT_LT(r.maxResidual, 1e-10);
    EXPECT_TRUE(r.ok);
  }
  EXPECT_EQ(checkedTopologicalDegree(identityWord()), 1);
  EXPECT_EQ(checkedTopologicalDegree(monomialWord(IntMat2(1, 2, -2, 1))), 5);
  EXPECT_EQ(checkedTopologicalDegree(w), 5);
}

TEST(Preimages, EliminationMatchesInvolution) {
  // g without its involution flag goes through elimination
  Factored f = exampleG().factored();
  f.involution = false;
  ToricMapWord plain{{ToricGenerator::birational(f)}, "g'"};
  ToricMapWord w{{exampleG()}, "g"};
  std::mt19937_64 rng(4);
  for (int k = 0; k < 5; ++k) {
    PrecisionScope scope(64);
    PointC p = {CR(Real(randomRational(rng, -2, 2)), Real(randomRational(rng, -2, 2))),
                CR(Real(randomRational(rng, -2, 2)), Real(randomRational(rng, -2, 2)))};
    auto a = preimages(plain, p, 64), b = preimages(w, p, 64);
    ASSERT_EQ(a.points.size(), 1u);
    ASSERT_EQ(b.points.size(), 1u);
    EXPECT_LT(detail::dist2(a.points[0], b.points[0]).convert_to<double>(), 1e-25);
  }
  // a wrong dtop declaration is caught
  Factored bad = f;
  bad.dtop = 2;
  EXPECT_THROW(checkedTopologicalDegree(ToricMapWord{{ToricGenerator::birational(bad)}, "bad"}), StructuralError);
}
