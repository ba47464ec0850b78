#include <gtest/gtest.h>

#include "toritrop/laurent.hpp"
#include "toritrop/series.hpp"

using namespace toritrop;

namespace {

template <class F>
PolyP<F> randomPoly(std::mt19937_64& rng, size_t n) {
  PolyP<F> p(n);
  for (auto& c : p) c = F((long long)(rng() % 1000000007ULL));
  trim(p);
  return p;
}

template <class F>
PolyP<F> schoolbook(const PolyP<F>& a, const PolyP<F>& b) {
  PolyP<F> r(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

}  // namespace

TEST(ModP, FieldAxioms) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    Fm a = Fm::raw(rng() % kMersenne61), b = Fm::raw(rng() % kMersenne61);
    if (b.isZero()) continue;
    EXPECT_EQ((a / b) * b, a);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a - b + b, a);
    // reduction agrees with 128-bit modular arithmetic
    unsigned __int128 t = (unsigned __int128)a.v * b.v;
    EXPECT_EQ((a * b).v, uint64_t(t % kMersenne61));
  }
  EXPECT_EQ(Fn::fromRational(Rational(1, 3)) * Fn(3), Fn(1));
  EXPECT_EQ(Fn(-1).v, kNttPrime - 1);
}

TEST(ModP, NttMatchesSchoolbook) {
  std::mt19937_64 rng(2);
  for (size_t n : {1, 5, 49, 64, 200, 1000}) {
    auto a = randomPoly<Fn>(rng, n), b = randomPoly<Fn>(rng, n + 3);
    EXPECT_EQ(mul(a, b), schoolbook(a, b));
  }
}

TEST(ModP, GcdRecoversPlantedFactor) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    auto g = monic(randomPoly<Fn>(rng, 1 + rng() % 30));
    auto a = randomPoly<Fn>(rng, 1 + rng() % 40), b = randomPoly<Fn>(rng, 1 + rng() % 40);
    auto d = gcd(mul(g, a), mul(g, b));
    // gcd(a, b) is 1 with overwhelming probability
    EXPECT_EQ(d, g);
    EXPECT_EQ(mul(exactDiv(mul(g, a), d), d), mul(g, a));
  }
}

TEST(ModP, InterpolationAndReconstruction) {
  std::mt19937_64 rng(4);
  auto num = randomPoly<Fm>(rng, 13), den = monic(randomPoly<Fm>(rng, 9));
  size_t N = 12 + 8 + 2;
  std::vector<Fm> xs, ys;
  for (size_t i = 0; i < N; ++i) {
    Fm x = Fm::raw(rng() % kMersenne61);
    xs.push_back(x);
    ys.push_back(evalP(num, x) / evalP(den, x));
  }
  auto p = interpolate(xs, ys);
  for (size_t i = 0; i < N; ++i) EXPECT_EQ(evalP(p, xs[i]), ys[i]);
  PolyP<Fm> M = {Fm(1)};
  for (auto x : xs) M = mul(M, PolyP<Fm>{-x, Fm(1)});
  PolyP<Fm> a, b;
  auto rr = rationalReconstruct(M, p, 12, &a, &b);
  ASSERT_TRUE(rr.ok);
  EXPECT_EQ(rr.degNum, 12);
  EXPECT_EQ(rr.degDen, 8);
  EXPECT_EQ(monic(b), den);
}

TEST(Laurent, ArithmeticAndEval) {
  Laurent x = Laurent::x1(), y = Laurent::x2();
  Laurent p = Laurent(1) - x - y;
  EXPECT_EQ((p * p).size(), 6u);
  EXPECT_EQ(p.evalQ(Rational(1, 2), Rational(1, 3)), Rational(1, 6));
  Laurent q = Laurent::monomial(-2, 1, 3);
  EXPECT_EQ(q.evalQ(2, 5), Rational(15, 4));
  EXPECT_EQ(q.eulerDerivative(0), Laurent::monomial(-2, 1, -6));
  EXPECT_EQ(p.initialForm(V2(1, 1)), Laurent(1));
  EXPECT_EQ(p.initialForm(V2(-1, -1)), -x - y);
  EXPECT_EQ(p.initialForm(V2(-1, 0)), -x);
}

TEST(Series, ValuationsAlongMonomialCurves) {
  using S = Series<Rational>;
  // 1 - x1 - x2 along x = (2 s^a, 3 s^b)
  Laurent p = Laurent(1) - Laurent::x1() - Laurent::x2();
  auto conv = [](const Rational& c) { return S(c, 0); };
  auto at = [&](long a, long b) { return p.eval(S(Rational(2), a), S(Rational(3), b), conv); };
  EXPECT_EQ(at(1, 1).valuation(), 0);
  EXPECT_EQ(at(-1, 2).valuation(), -1);
  EXPECT_EQ(at(-1, -1).valuation(), -1);
  EXPECT_EQ(at(-1, -1).lead(), Rational(-5));
  // inverse of a non-monomial series has finite precision; the product is 1 to that precision
  S::workingPrecision() = 6;
  S u = at(1, 2);
  S w = u * u.inverse();
  EXPECT_EQ(w.valuation(), 0);
  EXPECT_EQ(w.lead(), Rational(1));
  EXPECT_EQ(w.relPrec(), 6);
  // exact cancellation is reported, not silently truncated
  EXPECT_THROW(S(Rational(1), 0) - S(Rational(1), 0), IdenticallyZero);
  S t = S(Rational(1), 0) + S(Rational(1), 1);
  EXPECT_THROW(t.inverse() - S(Rational(1), 0) + S(Rational(1), 1) - S(Rational(1), 2) + S(Rational(1), 3) -
                   S(Rational(1), 4) + S(Rational(1), 5),
               PrecisionLoss);
  S::workingPrecision() = 1;
}
