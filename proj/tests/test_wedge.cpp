#include <gtest/gtest.h>

#include "toritrop/wedge.hpp"

using namespace toritrop;

namespace {

GridSpec box(double a, double b, unsigned nr, unsigned nt) {
  GridSpec g;
  g.lo = {a, a};
  g.hi = {b, b};
  g.nr = nr;
  g.nt = nt;
  return g;
}

GridPotential fromFn(const GridSpec& g, std::function<double(const NodePoint&)> f) {
  return samplePotential([f](const NodePoint& p) -> std::optional<double> { return f(p); }, g, "test");
}

SupportD maxPlane() {
  // max(0, v1, v2)
  return SupportD::sample(Fan({RayQ(1, 1), RayQ(-1, 0), RayQ(0, -1)}),
                          [](const V2& v) { return std::max({0.0, toDouble(v.x), toDouble(v.y)}); });
}

// The radial span covered by the cells that carry weight.
std::array<double, 2> carried(const GridSpec& g, int k) {
  return {g.r(k, 2) - 0.5 * g.hr(k), g.r(k, g.nr - 3) + 0.5 * g.hr(k)};
}

}  // namespace

TEST(MongeAmpere, FubiniStudyMatchesMomentMapArea) {
  // (dd^c 1/2 log(1 + |z|^2))^2 has density 8 x1 x2 / (1 + x1 + x2)^3 in (r1, r2), x = e^{2r}
  GridSpec g = box(-3, 3, 41, 12);
  auto U = fromFn(g, [](const NodePoint& p) { return 0.5 * std::log(1 + std::exp(2 * p.r1) + std::exp(2 * p.r2)); });
  auto mu = mixedMongeAmpere(U, U);
  auto s1 = carried(g, 0), s2 = carried(g, 1);
  double want = 0;
  const int n = 400;
  double d1 = (s1[1] - s1[0]) / n, d2 = (s2[1] - s2[0]) / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x1 = std::exp(2 * (s1[0] + (i + 0.5) * d1)), x2 = std::exp(2 * (s2[0] + (j + 0.5) * d2));
      want += 8 * x1 * x2 / std::pow(1 + x1 + x2, 3) * d1 * d2;
    }
  EXPECT_NEAR(mu.mass, want, 0.02 * want);
  EXPECT_GT(want, 0.9);
  EXPECT_FALSE(mu.signedFlag);
}

TEST(MongeAmpere, PluriharmonicGivesZero) {
  GridSpec g = box(-1, 1, 12, 12);
  auto V = fromFn(g, [](const NodePoint& p) { return std::exp(2 * p.r1) + std::exp(2 * p.r2); });
  double scale = 0;
  for (double w : mixedMongeAmpere(V, V).weights) scale = std::max(scale, std::abs(w));
  // log|z1^2 z2^-3| is killed exactly by the stencil
  auto L = fromFn(g, [](const NodePoint& p) { return 2 * p.r1 - 3 * p.r2 + 0.7; });
  for (double w : mixedMongeAmpere(L, V).weights) EXPECT_NEAR(w, 0.0, 1e-12 * scale);
  // Re z1 up to the O(h^2) truncation error of the stencil
  auto U = fromFn(g, [](const NodePoint& p) { return std::exp(p.r1) * std::cos(p.t1); });
  double h2 = g.ht() * g.ht();
  for (double w : mixedMongeAmpere(U, V).weights) EXPECT_LT(std::abs(w), h2 * scale);
}

TEST(MongeAmpere, SquaredNormClosedForm) {
  // (dd^c |z|^2)^2 = 2 (4 / pi^2) dA1 dA2 (the cross term of the square counts twice), so a box of
  // log-radii [a, b] carries 8 (e^{2b1} - e^{2a1})(e^{2b2} - e^{2a2})
  GridSpec g = box(-1, 1, 41, 12);
  auto U = fromFn(g, [](const NodePoint& p) { return std::exp(2 * p.r1) + std::exp(2 * p.r2); });
  auto mu = mixedMongeAmpere(U, U);
  auto s1 = carried(g, 0), s2 = carried(g, 1);
  double want = 8 * (std::exp(2 * s1[1]) - std::exp(2 * s1[0])) * (std::exp(2 * s2[1]) - std::exp(2 * s2[0]));
  EXPECT_NEAR(mu.mass, want, 0.02 * want);
  // constant in the angles
  EXPECT_NEAR(mu.weights[g.index(10, 0, 20, 0)], mu.weights[g.index(10, 7, 20, 3)], 1e-12);
}

TEST(MongeAmpere, SymmetricAndBilinear) {
  GridSpec g = box(-1, 1, 10, 10);
  auto f1 = [](const NodePoint& p) { return std::log(1 + std::exp(2 * p.r1) + 0.5 * std::exp(p.r1 + p.r2) * std::cos(p.t1 - p.t2)); };
  auto f2 = [](const NodePoint& p) { return std::exp(p.r2) * std::sin(p.t2) * std::exp(p.r1) + std::exp(2 * p.r2); };
  auto U1 = fromFn(g, f1), U2 = fromFn(g, f2);
  auto V = fromFn(g, [](const NodePoint& p) { return std::exp(2 * p.r1) + std::exp(2 * p.r2) + 0.3 * p.r1; });
  auto W = fromFn(g, [&](const NodePoint& p) { return 2 * f1(p) - 3 * f2(p); });
  auto a = mixedMongeAmpere(U1, V), b = mixedMongeAmpere(V, U1);
  auto c = mixedMongeAmpere(U2, V), d = mixedMongeAmpere(W, V);
  double scale = 0;
  for (double w : a.weights) scale = std::max(scale, std::abs(w));
  for (size_t k = 0; k < a.weights.size(); ++k) {
    EXPECT_NEAR(a.weights[k], b.weights[k], 1e-12 * scale);
    EXPECT_NEAR(d.weights[k], 2 * a.weights[k] - 3 * c.weights[k], 1e-10 * scale);
  }
}

TEST(MongeAmpere, MaskedNodesAreFilledAndCounted) {
  GridSpec g = box(-1, 1, 10, 10);
  auto U = samplePotential(
      [](const NodePoint& p) -> std::optional<double> {
        if (std::abs(p.r1) < 0.2 && std::abs(p.r2) < 0.2 && p.t1 == 0 && p.t2 == 0) return std::nullopt;
        return 1.0;
      },
      g, "test");
  EXPECT_GT(U.maskedCount, 0u);
  for (double v : U.values) EXPECT_DOUBLE_EQ(v, 1.0);
  auto V = fromFn(g, [](const NodePoint& p) { return std::exp(2 * p.r1); });
  EXPECT_GT(mixedMongeAmpere(U, V).zeroedCells, 0u);
  auto all = [](const NodePoint&) -> std::optional<double> { return std::nullopt; };
  EXPECT_THROW(samplePotential(all, g, "test"), StructuralError);
}

TEST(Haar, MaxPlaneSquaredIsHaarOnTheRealTorus) {
  SupportD psi = maxPlane();
  ASSERT_NEAR(pairing(psi, psi), 1.0, 1e-12);
  auto r = haarTest(psi, psi, box(-1, 1, 17, 8));
  EXPECT_NEAR(r.mass, 1.0, 0.02);
  EXPECT_GE(r.concentration, 0.95);
  EXPECT_LT(r.mu.negative, 1e-6 * r.mass);
  // uniform in the angles at the centre
  const GridSpec& g = r.mu.grid;
  EXPECT_NEAR(r.mu.weights[g.index(8, 0, 8, 0)], r.mu.weights[g.index(8, 3, 8, 5)], 1e-12);
}

TEST(Haar, LinearGivesZero) {
  SupportD lin = SupportD::sample(Fan::P2(), [](const V2& v) { return 2 * toDouble(v.x) - toDouble(v.y); });
  auto r = haarTest(lin, maxPlane(), box(-1, 1, 12, 8));
  EXPECT_NEAR(r.mass, 0.0, 1e-12);
}

TEST(Haar, ProductOfCoordinateKinks) {
  auto k1 = SupportD::sample(Fan::quadric(), [](const V2& v) { return std::max(0.0, toDouble(v.x)); });
  auto k2 = SupportD::sample(Fan::quadric(), [](const V2& v) { return std::max(0.0, toDouble(v.y)); });
  ASSERT_NEAR(pairing(k1, k2), 1.0, 1e-12);
  auto r = haarTest(k1, k2, box(-1, 1, 13, 8));
  EXPECT_NEAR(r.mass, 1.0, 0.02);
  EXPECT_GE(r.concentration, 0.95);
}

TEST(Haar, MassSequenceIsCauchy) {
  SupportD psi = maxPlane();
  auto s = haarSequence(psi, psi, 1.0, {9, 17, 33}, 8);
  ASSERT_EQ(s.masses.size(), 3u);
  for (double m : s.masses) EXPECT_NEAR(m, 1.0, 0.02);
  for (double q : s.ratios) EXPECT_LT(q, 0.5);
  EXPECT_FALSE(s.underResolved);
}

TEST(Equilibrium, DepthZeroIsTheHaarTest) {
  GridSpec g = box(-2, 2, 10, 8);
  EquilibriumOptions o;
  o.depthForward = o.depthBackward = 0;
  auto rep = equilibriumMeasure(exampleWord(), g, o);
  auto h = haarTest(rep.psiForward, rep.psiBackward, g, o.smoothing);
  ASSERT_EQ(rep.mu.weights.size(), h.mu.weights.size());
  for (size_t k = 0; k < h.mu.weights.size(); ++k) EXPECT_EQ(rep.mu.weights[k], h.mu.weights[k]);
  EXPECT_NEAR(pairing(rep.psiForward, rep.psiBackward), 1.0, 1e-9);
}

TEST(Equilibrium, MonomialWordIsRejected) {
  try {
    equilibriumMeasure(monomialWord(IntMat2(1, 2, -2, 1)), box(-2, 2, 10, 8));
    FAIL() << "no error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("small topological degree required"), std::string::npos);
  }
}

TEST(Equilibrium, CoarseGreenMeasureHasMassNearOne) {
  // small grid, shallow depth: a smoke test of the Green path; the acceptance suite runs the full size
  GridSpec g = box(-4, 4, 10, 8);
  EquilibriumOptions o;
  o.depthForward = o.depthBackward = 2;
  auto rep = equilibriumMeasure(exampleWord(), g, o);
  EXPECT_NEAR(rep.mass, 1.0, 0.3);
  EXPECT_EQ(rep.maskedForward + rep.maskedBackward, 0u);
  EXPECT_EQ(rep.tubes.size(), 3u);
}

TEST(Invariance, ConstantIsExact) {
  auto h = haarTest(maxPlane(), maxPlane(), box(-1, 1, 12, 8));
  TestFn one = [](const std::array<double, 2>&) { return 1.0; };
  auto r = invarianceTest(h.mu, exampleWord(), {one}, 300, 4);
  EXPECT_EQ(r.rows[0].difference, 0.0);
  EXPECT_GT(r.rows[0].integral, 0.0);
}

TEST(Invariance, HaarUnderAMonomialMap) {
  // Haar measure on the real torus is invariant under monomial maps; a bump at Log = 0 sees only
  // the discretization spread
  auto h = haarTest(maxPlane(), maxPlane(), box(-1, 1, 33, 8));
  auto r = invarianceTest(h.mu, monomialWord(IntMat2(2, 1, 1, 1)), {bump({0, 0}, 0.8)}, 2000, 5);
  EXPECT_LT(r.rows[0].relative, 0.1);
}

TEST(Correlation, TrivialCases) {
  auto h = haarTest(maxPlane(), maxPlane(), box(-1, 1, 12, 8));
  auto w = monomialWord(IntMat2(2, 1, 1, 1));
  TestFn one = [](const std::array<double, 2>&) { return 1.0; };
  TestFn a = bump({0.05, 0}, 0.2);
  auto c = correlationExperiment(h.mu, w, one, a, 3, 500, 6);
  for (double x : c.C) EXPECT_NEAR(x, 0.0, 1e-12);
  auto v = correlationExperiment(h.mu, w, a, a, 0, 500, 6);
  EXPECT_GE(v.C[0], 0.0);
}

TEST(Sampling, WorkersGiveIdenticalPotentials) {
  GridSpec g = box(-2, 2, 12, 8);
  auto ge = makeGreenEvaluator(exampleWord(), Direction::Backward);
  FastBackward fb(ge);
  PotentialFn f = [&fb](const NodePoint& p) -> std::optional<double> { return fb(p.z(), 2); };
  auto a = samplePotential(f, g, "serial", 1), b = samplePotential(f, g, "threads", 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.masked, b.masked);
}
