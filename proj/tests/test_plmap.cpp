#include <gtest/gtest.h>
#include <toritrop/plmap.hpp>

using namespace toritrop;

namespace {

// v -> (v1 + k min(0, v2), v2): tropicalization of a shear x1 -> x1 (1 + x2^k)-type map
PLMap shear(long k) {
  return PLMap(Fan::quadric(), {IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, 1), IntMat2(1, k, 0, 1), IntMat2(1, k, 0, 1)});
}

IntMat2 randomUnimodular(std::mt19937_64& rng) {
  IntMat2 m;
  std::uniform_int_distribution<int> c(0, 3), k(-2, 2);
  for (int i = 0; i < 4; ++i) {
    int t = c(rng);
    long s = k(rng);
    if (t == 0) m = IntMat2(1, s, 0, 1) * m;
    if (t == 1) m = IntMat2(1, 0, s, 1) * m;
    if (t == 2) m = IntMat2(0, -1, 1, 0) * m;
    if (t == 3) m = IntMat2(1, 1, 0, 1) * m;
  }
  return m;
}

PLMap randomHomeo(std::mt19937_64& rng) {
  PLMap a(randomUnimodular(rng));
  a = composePL(shear(std::uniform_int_distribution<long>(-3, 3)(rng)), a);
  a = composePL(PLMap(randomUnimodular(rng)), a);
  return composePL(shear(std::uniform_int_distribution<long>(-2, 2)(rng)), a);
}

Q2 randomQ2(std::mt19937_64& rng) {
  return {randomRational(rng, -20, 20), randomRational(rng, -20, 20)};
}

}  // namespace

TEST(PLMap, EvalExamples) {
  PLMap id;
  EXPECT_EQ(id(V2(3, -4)), V2(3, -4));
  PLMap m(IntMat2(1, 2, -2, 1));
  EXPECT_EQ(m(V2(1, 0)), V2(1, -2));
  PLMap s = shear(2);
  EXPECT_EQ(s(V2(3, -1)), V2(1, -1));
  EXPECT_EQ(s(V2(3, 1)), V2(3, 1));
  EXPECT_EQ(s.matrix(1)(V2(-1, 0)), s.matrix(2)(V2(-1, 0)));
  EXPECT_THROW(PLMap(Fan::quadric(), {IntMat2(1, 0, 0, 1), IntMat2(2, 0, 0, 1), IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, 1)}),
               DomainError);
}

TEST(PLMap, ComposeExamples) {
  PLMap a = shear(3);
  EXPECT_EQ(composePL(PLMap(), a), a);
  IntMat2 m(2, 1, 1, 1);
  EXPECT_TRUE(composePL(PLMap(m), PLMap(m.adj())).isLinear());
  EXPECT_EQ(composePL(PLMap(m), PLMap(m.adj())).matrix(0), IntMat2());
}

TEST(PLMap, CompositionIsPointwiseAndAssociative) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    PLMap a = randomHomeo(rng), b = randomHomeo(rng), c = randomHomeo(rng);
    PLMap ab_c = composePL(composePL(a, b), c), a_bc = composePL(a, composePL(b, c));
    for (int k = 0; k < 100; ++k) {
      Q2 v = randomQ2(rng);
      Q2 direct = a(b(c(v)));
      ASSERT_EQ(ab_c(v), direct);
      ASSERT_EQ(a_bc(v), direct);
    }
    EXPECT_EQ(rho(ab_c), rho(a) * rho(b) * rho(c));
  }
}

TEST(PLMap, RhoAndRamification) {
  EXPECT_EQ(rho(PLMap()), 1);
  EXPECT_EQ(rho(PLMap(IntMat2(1, 2, -2, 1))), 5);
  PLMap bad(Fan::quadric(), {IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, 2), IntMat2(1, 0, 0, 2)});
  EXPECT_THROW(rho(bad), StructuralError);
  auto r0 = ramification(PLMap(), 1, RayQ(2, 3));
  EXPECT_EQ(r0.ram, 1);
  EXPECT_EQ(r0.coveringDegree, 1);
  auto r2 = ramification(PLMap(IntMat2(2, 0, 0, 2)), 4, RayQ(1, 0));
  EXPECT_EQ(r2.ram, 2);
  EXPECT_EQ(r2.coveringDegree, 2);
  auto r5 = ramification(PLMap(IntMat2(1, 2, -2, 1)), 5, RayQ(1, 0));
  EXPECT_EQ(r5.ram, 1);
  EXPECT_EQ(r5.coveringDegree, 5);
  EXPECT_THROW(ramification(PLMap(IntMat2(2, 0, 0, 2)), 3, RayQ(1, 0)), StructuralError);
}

TEST(PLMap, Homeomorphism) {
  EXPECT_TRUE(isHomeo(PLMap(IntMat2(2, 1, 1, 1))));
  EXPECT_TRUE(isHomeo(PLMap(IntMat2(2, 0, 0, 2))));
  EXPECT_TRUE(isHomeo(shear(-4)));
  PLMap fold(Fan::quadric(), {IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, 1), IntMat2(1, 0, 0, -1), IntMat2(1, 0, 0, -1)});
  EXPECT_FALSE(isHomeo(fold));
  // z -> z^2 on directions: winds twice
  std::vector<V2> oct = {V2(1, 0), V2(1, 1), V2(0, 1), V2(-1, 1), V2(-1, 0), V2(-1, -1), V2(0, -1), V2(1, -1)};
  std::vector<V2> img = {V2(1, 0), V2(0, 1), V2(-1, 0), V2(0, -1), V2(1, 0), V2(0, 1), V2(-1, 0), V2(0, -1)};
  std::vector<IntMat2> mats;
  for (size_t i = 0; i < 8; ++i) {
    // M [u w] = [Mu Mw], det [u w] = 1
    IntMat2 uw = IntMat2::fromColumns(oct[i], oct[(i + 1) % 8]);
    mats.push_back(IntMat2::fromColumns(img[i], img[(i + 1) % 8]) * uw.adj());
  }
  PLMap dbl(Fan::fromVectors(oct), mats);
  EXPECT_EQ(windingNumber(dbl), 2);
  EXPECT_FALSE(isHomeo(dbl));
}

TEST(Inverse, UnimodularHomeo) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    PLMap a = randomHomeo(rng);
    PLMap ai = inversePL(a);
    for (int k = 0; k < 50; ++k) {
      Q2 v = randomQ2(rng);
      ASSERT_EQ(ai(a(v)), v);
    }
  }
}

TEST(Rotation, Examples) {
  auto r0 = rotationNumber(PLMap());
  EXPECT_TRUE(r0.exact);
  EXPECT_EQ(r0.midpoint, 0);
  auto rq = rotationNumber(PLMap(IntMat2(0, -1, 1, 0)));
  EXPECT_TRUE(rq.exact);
  EXPECT_EQ(rq.midpoint, Rational(1, 4));
  auto rc = rotationNumber(PLMap(IntMat2(1, 2, -2, 1)), 0, 4e-7);
  EXPECT_FALSE(rc.exact);
  double closed = 1 - std::atan(2.0) / (2 * M_PI);
  EXPECT_LE(2 * rc.radius, 1e-6);
  EXPECT_NEAR(toDouble(rc.midpoint), closed, rc.radius);
}

TEST(Rotation, PowersMultiplyRotationNumber) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 5; ++t) {
    PLMap a = composePL(PLMap(IntMat2(1, 2, -2, 1)), randomHomeo(rng));
    PLMap a3 = powerPL(a, 3);
    auto r1 = rotationNumber(a, 200000), r3 = rotationNumber(a3, 200000);
    double d = std::fmod(3 * toDouble(r1.midpoint) - toDouble(r3.midpoint) + 10.5, 1.0) - 0.5;
    EXPECT_LE(std::abs(d), 3 * r1.radius + r3.radius);
  }
}

TEST(PeriodicRay, Examples) {
  auto p1 = findPeriodicRay(PLMap(), 10, 4);
  ASSERT_TRUE(p1);
  EXPECT_EQ(p1->ray, RayQ(1, 0));
  EXPECT_EQ(p1->period, 1u);
  auto p4 = findPeriodicRay(PLMap(IntMat2(0, -1, 1, 0)), 10, 8);
  ASSERT_TRUE(p4);
  EXPECT_EQ(p4->ray, RayQ(1, 0));
  EXPECT_EQ(p4->period, 4u);
  EXPECT_FALSE(findPeriodicRay(PLMap(IntMat2(1, 2, -2, 1)), Integer(10000), 64));
  // hyperbolic: rational eigenrays exist only for perfect-square discriminants
  auto ph = findPeriodicRay(PLMap(IntMat2(2, 1, 0, 3)), 10, 2);
  ASSERT_TRUE(ph);
  EXPECT_EQ(PLMap(IntMat2(2, 1, 0, 3))(ph->ray.v), Integer(ph->ray.v.x == 1 && ph->ray.v.y == 0 ? 2 : 3) * ph->ray.v);
}

TEST(AlmostConformal, Examples) {
  auto c = almostConformalPower(PLMap(IntMat2(1, 2, -2, 1)), 0.01, 5);
  EXPECT_TRUE(c.found);
  EXPECT_EQ(c.n, 1u);
  auto d = almostConformalPower(PLMap(IntMat2(2, 0, 0, 1)), 0.01, 2, 20);
  EXPECT_FALSE(d.found);
  EXPECT_GT(d.gap.back(), d.gap.front());
}
