#include <gtest/gtest.h>

#include "toritrop/toric_map.hpp"

#include <chrono>

using namespace toritrop;

TEST(ToricEval, Examples) {
  auto w = monomialWord(IntMat2(1, 2, -2, 1));
  auto y = evalWord(w, {Rational(2), Rational(3)});
  EXPECT_EQ(y[0], Rational(18));
  EXPECT_EQ(y[1], Rational(3, 4));
  auto id = evalWord(identityWord(), {Rational(5, 7), Rational(-2)});
  EXPECT_EQ(id[0], Rational(5, 7));
  EXPECT_EQ(id[1], Rational(-2));
  ToricMapWord g{{exampleG()}, "g"};
  try {
    evalWord(g, {Rational(1, 3), Rational(2, 3)});
    FAIL() << "expected a hit";
  } catch (const ExceptionalHit& e) {
    EXPECT_EQ(e.stage, 0u);
  }
  // the hit is reported at the right stage of a longer word
  try {
    evalWord(exampleWord(), {Rational(1, 2), Rational(1, 2)});  // h(1/2,1/2) = (1/8, 2): 1-x1+x2 != 0 ...
  } catch (const ExceptionalHit& e) {
    EXPECT_EQ(e.stage, 1u);
  }
}

TEST(ToricEval, InvolutionAndFloat) {
  ToricMapWord gg{{exampleG(), exampleG()}, "gg"};
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    PointQ p = {randomRational(rng, -3, 3), randomRational(rng, -3, 3)};
    if (p[0] == 0 || p[1] == 0) continue;
    try {
      auto q = evalWord(gg, p);
      EXPECT_EQ(q[0], p[0]);
      EXPECT_EQ(q[1], p[1]);
    } catch (const ExceptionalHit&) {
    }
  }
  auto f = exampleWord();
  PointQ p = {Rational(2, 7), Rational(-3, 5)};
  auto exact = evalWord(f, p);
  PrecisionScope s(80);
  auto fl = evalWordFloat(f, {CR::fromRational(p[0]), CR::fromRational(p[1])}, 40);
  for (int i = 0; i < 2; ++i) {
    Real err = abs(fl.value[size_t(i)] - CR::fromRational(exact[size_t(i)]));
    EXPECT_LT(err.convert_to<double>(), 1e-35);
  }
}

TEST(Toricity, Rho) {
  EXPECT_EQ(verifyToric(monomialWord(IntMat2(1, 2, -2, 1))), 5);
  EXPECT_EQ(verifyToric(monomialWord(IntMat2(0, 1, 1, 0))), -1);
  Integer rg = verifyToric(ToricMapWord{{exampleG()}, "g"});
  EXPECT_EQ(iabs(rg), 1);
  EXPECT_EQ(iabs(verifyToric(exampleWord())), 5);
  // a map that is not toric: (x1 + 1, x2)
  Factored bad;
  bad.num[0] = {Laurent::x1() + Laurent(Rational(1))};
  bad.num[1] = {Laurent::x2()};
  EXPECT_THROW(verifyToric(ToricMapWord{{ToricGenerator::birational(bad)}, "bad"}), StructuralError);
  // wrong declaration
  Factored g = exampleG().factored();
  g.rho = 3;
  EXPECT_THROW(verifyToric(ToricMapWord{{ToricGenerator::birational(g)}, "g3"}), StructuralError);
}

TEST(Tropicalize, MonomialAndGenerator) {
  IntMat2 M(1, 2, -2, 1);
  EXPECT_EQ(tropicalize(monomialWord(M), 6), PLMap(M));
  EXPECT_TRUE(tropicalize(monomialWord(M), 6).isLinear());
  EXPECT_EQ(PLMap(M)(V2(1, 0)), V2(1, -2));
  ToricMapWord g{{exampleG()}, "g"};
  PLMap Ag = tropicalize(g, 12);
  EXPECT_EQ(Ag, generatorTropical(exampleG()));
  EXPECT_TRUE(isHomeo(Ag));
  // g is an involution, so is its tropicalization
  EXPECT_EQ(composePL(Ag, Ag), PLMap());
}

TEST(Tropicalize, CompositeWord) {
  auto f = exampleWord();
  PLMap A = tropicalize(f, 16);
  EXPECT_EQ(A, tropicalComposite(f));
  Integer r = iabs(verifyToric(f));
  for (auto& m : A.matrices()) EXPECT_EQ(iabs(m.det()), r);
  // same answer over a prime field
  EXPECT_EQ(tropicalize<Fn>(f, 16, 5), A);
  // the square needs precision escalation at some rays
  auto f2 = f.power(2);
  EXPECT_EQ(tropicalize<Fn>(f2, 10, 9), tropicalComposite(f2));
}

TEST(Degrees, Monomial) {
  IntMat2 M(1, 2, -2, 1);
  EXPECT_EQ(monomialDegree(M), 5);
  EXPECT_EQ(monomialDegree(IntMat2::identity()), 1);
  auto d = degreeSequence(monomialWord(M), 6);
  EXPECT_TRUE(d.agree);
  for (unsigned n = 1; n <= 6; ++n) EXPECT_EQ(d.line.degrees[n - 1], monomialDegree(power(M, n)));
  auto id = degreeSequenceInterp(identityWord(), 4);
  for (auto& x : id.degrees) EXPECT_EQ(x, 1);
  auto est = dynDegreeEstimate(degreeSequenceLine(monomialWord(M), 40).degrees);
  EXPECT_NEAR(est.estimate, std::sqrt(5.0), 0.1);
}

TEST(Degrees, ExampleWord) {
  ToricMapWord g{{exampleG()}, "g"};
  EXPECT_EQ(degreeSequenceLine(g, 3).degrees, (std::vector<Integer>{2, 1, 2}));
  EXPECT_EQ(degreeSequenceInterp(g, 3).degrees, (std::vector<Integer>{2, 1, 2}));
  auto c = degreeSequence(exampleWord(), 3);
  EXPECT_TRUE(c.agree);
  EXPECT_TRUE(c.submultiplicative);
  EXPECT_EQ(c.line.degrees, (std::vector<Integer>{10, 66, 454}));
}

TEST(Degrees, DynDegreeEstimate) {
  auto a = dynDegreeEstimate({1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(a.upper, 1);
  EXPECT_DOUBLE_EQ(a.estimate, 1);
  auto b = dynDegreeEstimate({2, 4, 8, 16});
  EXPECT_DOUBLE_EQ(b.upper, 2);
  EXPECT_DOUBLE_EQ(b.estimate, 2);
}

#include "toritrop/projective.hpp"

TEST(Projective, Examples) {
  auto id = toProjective(identityWord(), 1);
  EXPECT_EQ(id.map.degree, 1);
  EXPECT_EQ(id.map.str(), "[X : Y : Z]");
  auto g = toProjective(ToricMapWord{{exampleG()}, "g"}, 1);
  EXPECT_EQ(g.map.degree, 2);
  // -X(Z - X + Y) etc. up to a common sign
  EXPECT_EQ(g.map.str(), "[-X^2 + X*Y + X*Z : X*Y - Y^2 + Y*Z : X*Z + Y*Z - Z^2]");
  EXPECT_EQ(toProjective(ToricMapWord{{exampleG()}, "g"}, 2).map.degree, 1);
}

TEST(Projective, AgreesWithEvaluationAndDegrees) {
  auto f = exampleWord();
  auto P = toProjective(f, 2);
  ASSERT_TRUE(P.complete);
  EXPECT_EQ(P.map.degree, 66);
  EXPECT_LE(P.map.degree, 10 * 10);
  std::mt19937_64 rng(5);
  auto f2 = f.power(2);
  for (int k = 0; k < 10; ++k) {
    PointQ p = {randomRational(rng, -2, 2, 13), randomRational(rng, -2, 2, 13)};
    if (p[0] == 0 || p[1] == 0) continue;
    try {
      EXPECT_EQ(P.map.evalAffine(p), evalWord(f2, p));
    } catch (const ExceptionalHit&) {
    }
  }
  // components are coprime
  Poly2 g01 = gcd(P.map.comps[0], P.map.comps[1]);
  EXPECT_EQ(gcd(g01, P.map.comps[2]).totalDegree(), 0);
  // budget: the a priori bound for f^2 is 100
  auto cut = toProjective(f, 2, 50);
  EXPECT_FALSE(cut.complete);
  EXPECT_EQ(cut.achieved, 1u);
  EXPECT_EQ(cut.map.degree, 10);
}

TEST(Projective, MonomialWords) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    IntMat2 M(long(rng() % 7) - 3, long(rng() % 7) - 3, long(rng() % 7) - 3, long(rng() % 7) - 3);
    if (M.det() == 0) continue;
    auto w = monomialWord(M);
    EXPECT_EQ(toProjective(w, 2).map.degree, monomialDegree(M * M));
    EXPECT_EQ(degreeSequenceInterp(w, 2).degrees[1], monomialDegree(M * M));
  }
}

TEST(Poly2, HeuristicGcd) {
  Poly2 x = Poly2::x(), y = Poly2::y(), one = Poly2::constant(1);
  Poly2 a = x * x - 3 * Poly2::constant(1) * y + one, b = x * y + 2 * (y * y) - one, c = x - y * y * y + 5 * one;
  EXPECT_EQ(gcd(a * c, b * c), c);
  EXPECT_EQ(gcd(a * c * c, b * c), c);
  EXPECT_EQ(gcd(Integer(6) * (a * b), Integer(4) * (a * c)), a);
  EXPECT_EQ(gcd(a, b).totalDegree(), 0);
  EXPECT_EQ(*(a * b).divExact(b), a);
  EXPECT_FALSE((a * b + one).divExact(b));
}
