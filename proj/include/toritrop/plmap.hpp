#pragma once
// Integral, positively homogeneous, continuous piecewise-linear maps of the plane
// and the circle dynamics they induce.

#include "support.hpp"

#include <cmath>
#include <optional>

namespace toritrop {

class PLMap {
 public:
  PLMap() : PLMap(IntMat2::identity()) {}
  explicit PLMap(const IntMat2& m) : fan_(Fan::quadric()), mats_(4, m) { check(); }
  PLMap(Fan fan, std::vector<IntMat2> mats) : fan_(std::move(fan)), mats_(std::move(mats)) { check(); }

  const Fan& fan() const { return fan_; }
  const std::vector<IntMat2>& matrices() const { return mats_; }
  size_t pieces() const { return mats_.size(); }
  Cone2 cone(size_t i) const { return fan_.sector(i); }
  const IntMat2& matrix(size_t i) const { return mats_[i % mats_.size()]; }
  const IntMat2& matrixAt(const V2& v) const { return mats_[fan_.locate(v)]; }

  V2 operator()(const V2& v) const { return matrixAt(v)(v); }
  Q2 operator()(const Q2& q) const {
    if (q.x == 0 && q.y == 0) return q;
    Integer l = boost::multiprecision::lcm(denom(q.x), denom(q.y));
    V2 w = (*this)(V2(numer(q.x * l), numer(q.y * l)));
    return {Rational(w.x, l), Rational(w.y, l)};
  }
  std::array<double, 2> operator()(double x, double y) const {
    const IntMat2& m = mats_[locateD(x, y)];
    return {toDouble(m.a) * x + toDouble(m.b) * y, toDouble(m.c) * x + toDouble(m.d) * y};
  }
  size_t locateD(double x, double y) const {
    double t = std::atan2(y, x);
    if (t < 0) t += 2 * M_PI;
    size_t i = size_t(std::upper_bound(angles_.begin(), angles_.end(), t) - angles_.begin());
    return i == 0 ? angles_.size() - 1 : i - 1;
  }

  bool isLinear() const {
    for (auto& m : mats_)
      if (!(m == mats_[0])) return false;
    return true;
  }

  // Merge adjacent pieces with equal matrices where the merged sector stays strictly convex.
  PLMap simplified() const {
    std::vector<RayQ> rays = fan_.rays();
    std::vector<IntMat2> mats = mats_;
    bool changed = true;
    while (changed && rays.size() > 3) {
      changed = false;
      for (size_t i = 0; i < rays.size() && rays.size() > 3; ++i) {
        size_t p = (i + rays.size() - 1) % rays.size(), n = (i + 1) % rays.size();
        if (!(mats[p] == mats[i])) continue;
        if (cross(rays[p].v, rays[n].v) <= 0) continue;
        rays.erase(rays.begin() + long(i));
        mats.erase(mats.begin() + long(i));
        changed = true;
        break;
      }
    }
    return PLMap(Fan(rays), mats);
  }

  // Equal as functions: both are linear on every sector of the union fan, so its rays decide.
  friend bool operator==(const PLMap& a, const PLMap& b) {
    Fan u = unionFan(a.fan_, b.fan_);
    for (auto& r : u.rays())
      if (!(a(r.v) == b(r.v))) return false;
    return true;
  }

 private:
  void check() {
    if (mats_.size() != fan_.size()) throw DomainError("PLMap needs one matrix per sector");
    for (size_t i = 0; i < mats_.size(); ++i) {
      if (mats_[i].det() == 0) throw DomainError("PLMap pieces must be invertible");
      const RayQ& r = fan_.ray(i + 1);
      if (!(mats_[i](r.v) == matrix(i + 1)(r.v))) throw DomainError("PLMap pieces disagree on a shared ray");
    }
    angles_.clear();
    for (auto& r : fan_.rays()) {
      double t = std::atan2(toDouble(r.b()), toDouble(r.a()));
      angles_.push_back(t < 0 ? t + 2 * M_PI : t);
    }
  }
  Fan fan_;
  std::vector<IntMat2> mats_;
  std::vector<double> angles_;
};

// Direction of the preimage of w under an invertible matrix.
inline V2 preimageDirection(const IntMat2& m, const V2& w) {
  V2 p = m.adj()(w);
  return m.det() > 0 ? p : -p;
}

// A o B
inline PLMap composePL(const PLMap& A, const PLMap& B) {
  std::vector<RayQ> rays = B.fan().rays();
  for (size_t i = 0; i < B.pieces(); ++i) {
    const IntMat2& m = B.matrix(i);
    Cone2 c = B.cone(i);
    for (auto& a : A.fan().rays()) {
      V2 p = preimageDirection(m, a.v);
      if (c.containsInterior(p)) rays.push_back(primitive(p));
    }
  }
  Fan f(rays);
  std::vector<IntMat2> mats;
  for (size_t i = 0; i < f.size(); ++i) {
    V2 mid = f.ray(i).v + f.ray(i + 1).v;  // interior point of the sector
    const IntMat2& mb = B.matrixAt(mid);
    mats.push_back(A.matrixAt(mb(mid)) * mb);
  }
  return PLMap(f, mats).simplified();
}

inline PLMap powerPL(const PLMap& A, unsigned k) {
  PLMap r;
  for (unsigned i = 0; i < k; ++i) r = composePL(A, r);
  return r;
}

// Inverse of a PL homeomorphism with unimodular pieces.
inline PLMap inversePL(const PLMap& A) {
  std::vector<RayQ> rays;
  for (auto& r : A.fan().rays()) rays.push_back(primitive(A(r.v)));
  Fan f(rays);
  std::vector<IntMat2> mats;
  for (size_t i = 0; i < f.size(); ++i) {
    V2 mid = f.ray(i).v + f.ray(i + 1).v;
    // the piece of A whose image cone holds mid
    bool found = false;
    for (size_t j = 0; j < A.pieces() && !found; ++j) {
      const IntMat2& m = A.matrix(j);
      if (!m.unimodular()) throw DomainError("inversePL needs unimodular pieces");
      V2 p = preimageDirection(m, mid);
      if (A.cone(j).contains(p)) {
        IntMat2 inv = m.adj();
        if (m.det() < 0) inv = IntMat2(-inv.a, -inv.b, -inv.c, -inv.d);
        mats.push_back(inv);
        found = true;
      }
    }
    if (!found) throw DomainError("inversePL: map is not a homeomorphism");
  }
  return PLMap(f, mats).simplified();
}

inline Integer rho(const PLMap& A) {
  Integer d = iabs(A.matrix(0).det());
  for (auto& m : A.matrices())
    if (iabs(m.det()) != d) throw StructuralError("pieces have different |det|; not the tropicalization of a toric map");
  return d;
}

struct Ramification {
  Integer ram, coveringDegree;
};

inline Ramification ramification(const PLMap& A, const Integer& rhoValue, const RayQ& r) {
  Integer c = content(A(r.v));
  Integer rr = iabs(rhoValue);
  if (rr % c != 0) throw StructuralError("ramification does not divide |rho|");
  return {c, rr / c};
}

// Signed number of times the image of the circle of directions winds around the origin.
inline long windingNumber(const PLMap& A) {
  const V2 e(1, 0);
  long w = 0;
  for (size_t i = 0; i < A.pieces(); ++i) {
    V2 p = A.matrix(i)(A.cone(i).r1.v), q = A.matrix(i)(A.cone(i).r2.v);
    bool pos = A.matrix(i).det() > 0;
    if (!pos) std::swap(p, q);
    bool in = sameDirection(p, e) || (cross(p, e) > 0 && cross(e, q) > 0);
    if (in) w += pos ? 1 : -1;
  }
  return w;
}

inline bool isHomeo(const PLMap& A) {
  int s = A.matrix(0).det() > 0 ? 1 : -1;
  for (auto& m : A.matrices())
    if ((m.det() > 0 ? 1 : -1) != s) return false;
  return std::abs(windingNumber(A)) == 1;
}

// ---- periodic rays ------------------------------------------------------------

struct PeriodicRay {
  RayQ ray;
  unsigned period;
};

inline bool isPerfectSquare(const Integer& n, Integer& root) {
  if (n < 0) return false;
  root = boost::multiprecision::sqrt(n);
  return root * root == n;
}

// Rational eigen-rays with positive eigenvalue of one piece, restricted to its cone.
inline std::optional<RayQ> fixedRayInCone(const IntMat2& m, const Cone2& c, const Integer& heightBound) {
  if (m.isScalar()) {
    if (m.a > 0 && height(c.r1.v) <= heightBound) return c.r1;
    return std::nullopt;
  }
  Integer t = m.trace(), disc = t * t - 4 * m.det(), s;
  if (!isPerfectSquare(disc, s)) return std::nullopt;
  for (int sg : {1, -1}) {
    Integer lam2 = t + sg * s;  // 2 * eigenvalue
    if (lam2 <= 0) continue;
    // (M - lambda) v = 0, scaled by 2
    Integer a = 2 * m.a - lam2, b = 2 * m.b, c2 = 2 * m.c, d = 2 * m.d - lam2;
    V2 v = (a != 0 || b != 0) ? V2(b, -a) : V2(d, -c2);
    if (v.isZero()) continue;
    for (V2 w : {v, V2(-v)}) {
      RayQ r = primitive(w);
      if (c.contains(r.v) && height(r.v) <= heightBound) return r;
    }
  }
  return std::nullopt;
}

inline std::optional<PeriodicRay> findPeriodicRay(const PLMap& A, const Integer& heightBound, unsigned periodBound) {
  PLMap P;
  for (unsigned k = 1; k <= periodBound; ++k) {
    P = composePL(A, P);
    for (size_t i = 0; i < P.pieces(); ++i)
      if (auto r = fixedRayInCone(P.matrix(i), P.cone(i), heightBound)) return PeriodicRay{*r, k};
  }
  return std::nullopt;
}

// ---- rotation number ------------------------------------------------------------

struct RotationEstimate {
  Rational midpoint;  // in [0, 1)
  double radius = 0;
  bool exact = false;  // certified by a periodic ray
  long iterations = 0;
};

// Continuous lift of the induced circle map, in turns.
class CircleLift {
 public:
  explicit CircleLift(const PLMap& A) : A_(A) {
    if (!isHomeo(A)) throw DomainError("circle lift needs a PL homeomorphism");
    if (A.matrix(0).det() < 0) throw DomainError("rotation number needs an orientation-preserving map");
    size_t n = A.pieces();
    for (size_t i = 0; i < n; ++i) {
      RayQ r = A.cone(i).r1;
      dr_.push_back({toDouble(r.a()), toDouble(r.b())});
      auto& m = A.matrix(i);
      md_.push_back({toDouble(m.a), toDouble(m.b), toDouble(m.c), toDouble(m.d)});
    }
    // displacement at each boundary ray, continued around the circle
    disp_.resize(n);
    disp_[0] = turnsIn01(angleOf(apply(0, dr_[0])) - angleOf(dr_[0]));
    for (size_t i = 0; i + 1 < n; ++i) {
      auto a = dr_[i], b = dr_[i + 1];
      auto ia = apply(i, a), ib = apply(i, b);
      disp_[i + 1] = disp_[i] + arc(ia, ib) - arc(a, b);
    }
  }
  // displacement F(theta) - theta for the direction v (unnormalized)
  long double displacement(const std::array<double, 2>& v, size_t sector) const {
    auto w = apply(sector, v);
    return disp_[sector] + arc(apply(sector, dr_[sector]), w) - arc(dr_[sector], v);
  }
  std::array<double, 2> step(const std::array<double, 2>& v, long double& total) const {
    size_t s = A_.locateD(v[0], v[1]);
    total += displacement(v, s);
    auto w = apply(s, v);
    double nrm = std::hypot(w[0], w[1]);
    return {w[0] / nrm, w[1] / nrm};
  }

 private:
  static long double angleOf(const std::array<double, 2>& v) { return std::atan2((long double)v[1], (long double)v[0]) / (2 * M_PIl); }
  static long double turnsIn01(long double t) { return t - std::floor(t); }
  // counterclockwise arc from a to b in turns, in [0, 1)
  static long double arc(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    long double c = (long double)a[0] * b[1] - (long double)a[1] * b[0];
    long double d = (long double)a[0] * b[0] + (long double)a[1] * b[1];
    long double t = std::atan2(c, d) / (2 * M_PIl);
    return t < 0 ? t + 1 : t;
  }
  std::array<double, 2> apply(size_t i, const std::array<double, 2>& v) const {
    auto& m = md_[i];
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
  }
  const PLMap& A_;
  std::vector<std::array<double, 2>> dr_;
  std::vector<std::array<double, 4>> md_;
  std::vector<long double> disp_;
};

inline Rational exactRational(long double x) {
  // long double -> exact binary fraction
  int e;
  long double m = std::frexp(x, &e);
  Integer num = 0;
  for (int k = 0; k < 70 && m != 0; ++k) {
    m *= 2;
    long double d = std::floor(m);
    num = 2 * num + Integer((long long)d);
    m -= d;
    --e;
  }
  Rational r(num);
  if (e > 0) r *= Rational(Integer(1) << e);
  if (e < 0) r /= Rational(Integer(1) << -e);
  return r;
}

// Enclosure from |F^n(x) - x - n tau| < 1 plus a rounding allowance.
inline RotationEstimate rotationNumber(const PLMap& A, long nIter = 0, double tol = 1e-7,
                                       unsigned certifyPeriod = 12, long certifyHeight = 1000) {
  CircleLift L(A);
  RotationEstimate out;
  if (auto pr = findPeriodicRay(A, Integer(certifyHeight), certifyPeriod)) {
    long double total = 0;
    std::array<double, 2> v = {toDouble(pr->ray.a()), toDouble(pr->ray.b())};
    double n0 = std::hypot(v[0], v[1]);
    v = {v[0] / n0, v[1] / n0};
    for (unsigned k = 0; k < pr->period; ++k) v = L.step(v, total);
    long k = long(pr->period);
    long p = ((std::lround((double)total) % k) + k) % k;
    out.midpoint = Rational(p, k);
    out.exact = true;
    out.iterations = pr->period;
    return out;
  }
  long n = nIter > 0 ? nIter : long(std::ceil(2.0 / tol));
  long double total = 0;
  std::array<double, 2> v = {1.0, 0.0};
  for (long k = 0; k < n; ++k) v = L.step(v, total);
  long double tau = total / n;
  tau -= std::floor(tau);
  out.midpoint = exactRational(tau);
  // per-step rounding of order 1e-16 accumulates to n * 1e-16 in the total, i.e. 1e-16 in tau;
  // 1e-12 is a generous allowance for that
  out.radius = 1.0 / double(n) + 1e-12;
  out.iterations = n;
  return out;
}

// ---- almost conformal iterates -----------------------------------------------------

struct ConformalReport {
  bool found = false;
  unsigned n = 0;
  std::vector<double> gap;  // per iterate: max over pieces of |log sigma - (n/2) log dtop|
};

// log of the singular values of an integer matrix (entries must fit a double)
inline std::array<double, 2> logSingularValues(const IntMat2& m) {
  double a = toDouble(m.a), b = toDouble(m.b), c = toDouble(m.c), d = toDouble(m.d);
  double fro = a * a + b * b + c * c + d * d;
  double det = std::abs(toDouble(m.det()));
  double s1sq = 0.5 * (fro + std::sqrt(std::max(0.0, (fro - 2 * det) * (fro + 2 * det))));
  double logS1 = 0.5 * std::log(s1sq);
  return {logS1, std::log(det) - logS1};
}

inline ConformalReport almostConformalPower(const PLMap& A, double delta, const Integer& dtop, unsigned cap = 64) {
  if (!isHomeo(A)) throw DomainError("almostConformalPower needs a PL homeomorphism");
  ConformalReport rep;
  PLMap P;
  double ld = std::log(toDouble(dtop));
  for (unsigned n = 1; n <= cap; ++n) {
    P = composePL(A, P);
    double g = 0;
    for (auto& m : P.matrices()) {
      auto s = logSingularValues(m);
      g = std::max({g, std::abs(s[0] - 0.5 * n * ld), std::abs(s[1] - 0.5 * n * ld)});
    }
    rep.gap.push_back(g);
    if (g <= delta) {
      rep.found = true;
      rep.n = n;
      return rep;
    }
  }
  return rep;
}

}  // namespace toritrop
