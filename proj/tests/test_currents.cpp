#include <gtest/gtest.h>

#include "toritrop/currents.hpp"

using namespace toritrop;

namespace {

SupportQ lineClass() { return newtonSupport({V2(0, 0), V2(1, 0), V2(0, 1)}); }

bool differByLinear(const SupportD& a, const SupportD& b, double tol) {
  SupportD d = a;
  d *= -1.0;
  d = d + b;
  for (double m : d.cornerMasses())
    if (std::abs(m) > tol) return false;
  return true;
}

PointC sample(std::mt19937_64& rng, double radius) {
  PrecisionScope scope(64);
  return randomTorusPoint(rng, radius);
}

}  // namespace

TEST(ClassOperator, ReproducesDegreeSequence) {
  auto w = exampleWord();
  auto deg = degreeSequenceLine(w, 4).degrees;
  ASSERT_EQ(deg.size(), 4u);
  std::vector<Integer> frozen = {10, 66, 454};
  for (size_t i = 0; i < frozen.size(); ++i) EXPECT_EQ(deg[i], frozen[i]);

  SupportQ L = lineClass(), p = L;
  auto F = forwardOperator(w);
  for (int n = 1; n <= 4; ++n) {
    p = F(p);
    EXPECT_EQ(intersectionNumber(p, L), Rational(deg[n - 1])) << n;
  }
  auto B = backwardOperator(w);
  p = L;
  for (int n = 1; n <= 3; ++n) {
    p = B(p);
    EXPECT_EQ(intersectionNumber(p, L), Rational(deg[n - 1])) << n;
  }
}

TEST(ClassOperator, LinearAndMonotone) {
  auto F = forwardOperator(exampleWord());
  SupportQ a = lineClass();
  SupportQ b = newtonSupport({V2(0, 0), V2(2, 1), V2(-1, 3)});
  SupportQ lhs = F(Rational(2) * a + Rational(3) * b);
  SupportQ rhs = Rational(2) * F(a) + Rational(3) * F(b);
  Fan u = unionFan(lhs.fan(), rhs.fan());
  for (auto& r : u.rays()) EXPECT_EQ(lhs(r.v), rhs(r.v));
  EXPECT_TRUE(isConvex(F(a)));
  EXPECT_TRUE(isConvex(F(b)));
}

TEST(ClassOperator, WordLevelMatchesStages) {
  auto w = exampleWord();
  SupportD L = convertSupport<double>(lineClass());
  auto a = forwardOperator(w)(L), b = forwardOperatorByStages(w)(L);
  EXPECT_TRUE(differByLinear(a, b, 1e-9));
}

TEST(EigenSupport, MonomialSpectralRadius) {
  struct Case {
    IntMat2 M;
    double lambda;
  };
  std::vector<Case> cases = {
      {IntMat2(2, 1, 1, 1), (3 + std::sqrt(5.0)) / 2},  // hyperbolic
      {IntMat2(3, 0, 0, 2), 3.0},                       // diagonal
      {IntMat2(0, -1, 1, 0), 1.0},                      // finite order
      {IntMat2(1, 2, -2, 1), std::sqrt(5.0)},           // conformal
  };
  for (auto& c : cases) {
    auto e = eigenSupport(monomialWord(c.M), Direction::Forward, 400, 1e-12);
    EXPECT_NEAR(e.lambda, c.lambda, 1e-8) << c.M.a << c.M.b << c.M.c << c.M.d;
  }
}

TEST(EigenSupport, ForwardAndBackwardAgree) {
  auto w = exampleWord();
  auto f = eigenSupport(w, Direction::Forward, 200, 1e-12);
  auto b = eigenSupport(w, Direction::Backward, 200, 1e-12);
  EXPECT_TRUE(f.converged);
  EXPECT_TRUE(b.converged);
  EXPECT_TRUE(f.convex);
  EXPECT_NEAR(f.lambda, b.lambda, 1e-6);
  EXPECT_LT(f.residual, 1e-6);
  auto est = dynDegreeEstimate(degreeSequenceLine(w, 4).degrees);
  EXPECT_NEAR(f.lambda / est.estimate, 1.0, 0.05);
  EXPECT_LE(f.lambda, est.upper + 1e-9);
}

TEST(GreenForward, ConformalMonomialIsHomogeneous) {
  auto w = monomialWord(IntMat2(1, 2, -2, 1));
  auto ge = makeGreenEvaluator(w, Direction::Forward);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) {
    PointC p = sample(rng, 4);
    auto g = greenForward(ge, p, 1);
    auto l = [&] {
      PrecisionScope s(64);
      return logOf(p);
    }();
    EXPECT_NEAR(g.value, std::hypot(l[0], l[1]), 1e-12);
    EXPECT_NEAR(g.escape.back(), 0.0, 1e-12);
  }
  // the real torus
  PrecisionScope scope(64);
  PointC p = {polar(Real(1), Real(0.3)), polar(Real(1), Real(2.1))};
  EXPECT_NEAR(greenForward(ge, p, 4).value, 0.0, 1e-12);
}

TEST(GreenForward, SeriesDecreasesAndIdentityHolds) {
  auto w = exampleWord();
  auto ge = makeGreenEvaluator(w, Direction::Forward);
  ASSERT_TRUE(ge.seriesAvailable);
  EXPECT_GT(ge.K, ge.phiMax);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 30; ++k) {
    PointC p = sample(rng, 3);
    auto g = greenForward(ge, p, 7);
    ASSERT_EQ(g.guard, "clear");
    EXPECT_TRUE(monotoneNonIncreasing(g.series));
    EXPECT_LT(g.maxTerm, ge.K);
    EXPECT_LT(g.seriesRatio, 0.9);
    auto h = greenForward(ge, g.orbit[1], 6);
    // escape form: lambda^-(N-1) psi(Log f^(N-1) (f p)) = lambda lambda^-N psi(Log f^N p)
    double base = ge.psi(logOf(p)[0], logOf(p)[1]), fbase = ge.psi(logOf(g.orbit[1])[0], logOf(g.orbit[1])[1]);
    double ef = h.escape.back() + fbase, ep = g.escape.back() + base;
    EXPECT_NEAR(ef, ge.lambda * ep, 1e-9 * (1 + std::abs(ef)));
    // series form: lambda G(p) = G(f p) + sum c psi(w) log|P/x^m0|(p) - lambda K
    double corr = 0;
    for (auto& d : ge.data) corr += toDouble(d.c) * ge.psi(toDouble(d.ray.x), toDouble(d.ray.y)) * logRatio(d.factor, p);
    EXPECT_NEAR(ge.lambda * g.value, h.value + corr - ge.lambda * ge.K, 1e-9 * (1 + std::abs(h.value)));
    // and the potential stays within a bounded distance of psi o Log
    EXPECT_LT(std::abs(g.value - base), 2 * ge.K * ge.lambda / (ge.lambda - 1) + 1);
  }
}

TEST(GreenForward, EscapeFormIsNotMonotoneEverywhere) {
  // the uncorrected form lambda^-n psi(Log f^n p) need not decrease; record that it does not
  auto ge = makeGreenEvaluator(exampleWord(), Direction::Forward);
  std::mt19937_64 rng(11);
  int bad = 0;
  for (int k = 0; k < 100; ++k)
    if (!monotoneNonIncreasing(greenForward(ge, sample(rng, 3)).escape)) ++bad;
  EXPECT_GT(bad, 0);
}

TEST(GreenBackward, MonomialRootsOfUnity) {
  auto ge = makeGreenEvaluator(monomialWord(IntMat2(1, 2, -2, 1)), Direction::Backward);
  auto b = greenBackward(ge, {CR(1), CR(1)}, 3);
  EXPECT_EQ(b.leaves, 125u);
  for (double v : b.levels) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(GreenBackward, FastPathMatchesTree) {
  auto ge = makeGreenEvaluator(exampleWord(), Direction::Backward);
  ASSERT_FALSE(ge.backCorr.empty());
  FastBackward fb(ge);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 3; ++k) {
    PointC p = sample(rng, 2);
    auto b = greenBackward(ge, p, 3);
    PrecisionScope s(64);
    std::array<std::complex<double>, 2> z = {std::complex<double>(p[0].re.convert_to<double>(), p[0].im.convert_to<double>()),
                                             std::complex<double>(p[1].re.convert_to<double>(), p[1].im.convert_to<double>())};
    EXPECT_NEAR(fb(z, 3), b.value, 1e-8);
  }
}

TEST(GreenBackward, StaysNearTheHomogeneousPotential) {
  // without the corrections on contracted curves, lambda^-N f^N_* psi o Log decays to 0 at infinity
  auto ge = makeGreenEvaluator(exampleWord(), Direction::Backward);
  FastBackward fb(ge);
  for (double t = 0; t < 6.28; t += 0.7) {
    double R = 12, l1 = R * std::cos(t), l2 = R * std::sin(t);
    std::array<std::complex<double>, 2> z = {std::polar(std::exp(-l1), 0.4), std::polar(std::exp(-l2), 1.9)};
    EXPECT_LT(std::abs(fb(z, 3) - ge.psi(l1, l2)), 1.0) << t;
  }
}

TEST(GreenBackward, DifferencesDecayAtTheDegreeRatio) {
  auto w = exampleWord();
  auto ge = makeGreenEvaluator(w, Direction::Backward);
  std::mt19937_64 rng(5);
  // single steps are noisy; compare over three levels against the dtop / lambda envelope
  double d2 = 0, d5 = 0;
  for (int k = 0; k < 3; ++k) {
    auto b = greenBackward(ge, sample(rng, 1.5), 5);
    EXPECT_EQ(b.leaves, 3125u);
    EXPECT_LT(b.maxResidual, 1e-20);
    d2 += std::abs(b.levels[2] - b.levels[1]);
    d5 += std::abs(b.levels[5] - b.levels[4]);
  }
  EXPECT_LT(d5 / d2, std::pow(0.9, 3));
}

TEST(TropicalApproximation, BoundedOffTheExceptionalCurves) {
  auto r = tropicalApproxExperiment(exampleWord(), {10, 20, 40}, 300, 1e-3);
  ASSERT_EQ(r.shells.size(), 3u);
  for (auto& s : r.shells) {
    EXPECT_GT(s.accepted, 250u);
    // bounded by -log(margin) plus the number of factors
    EXPECT_LT(s.max, -std::log(1e-3) + 3);
  }
  EXPECT_EQ(r.samples.size(), r.shells[0].accepted + r.shells[1].accepted + r.shells[2].accepted);
}

TEST(TropicalApproximation, MonomialIsExact) {
  auto r = tropicalApproxExperiment(monomialWord(IntMat2(2, 1, 1, 1)), {5, 10}, 50, 0);
  for (auto& s : r.shells) EXPECT_LT(s.max, 1e-9);
}
