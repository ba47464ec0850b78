#pragma once
// Homogeneous piecewise-linear support functions on complete fans, their corner
// masses, Newton polygons and intersection numbers.

#include "lattice.hpp"

#include <array>
#include <functional>
#include <map>

namespace toritrop {

struct Q2 {
  Rational x, y;
  Q2() = default;
  Q2(Rational a, Rational b) : x(std::move(a)), y(std::move(b)) {}
  Q2(const V2& v) : x(v.x), y(v.y) {}
  friend Q2 operator+(const Q2& p, const Q2& q) { return {p.x + q.x, p.y + q.y}; }
  friend Q2 operator-(const Q2& p, const Q2& q) { return {p.x - q.x, p.y - q.y}; }
  friend bool operator==(const Q2& p, const Q2& q) { return p.x == q.x && p.y == q.y; }
  friend bool operator<(const Q2& p, const Q2& q) { return p.x < q.x || (p.x == q.x && p.y < q.y); }
};
inline Rational cross(const Q2& p, const Q2& q) { return p.x * q.y - p.y * q.x; }
inline Rational dot(const Q2& p, const Q2& q) { return p.x * q.x + p.y * q.y; }

// Integer multiple of a rational vector pointing the same way; zero stays zero.
inline V2 clearDenominators(const Q2& q) {
  Integer l = boost::multiprecision::lcm(denom(q.x), denom(q.y));
  return {numer(q.x * l), numer(q.y * l)};
}

template <class T> T scalarFrom(const Integer& z);
template <> inline Rational scalarFrom<Rational>(const Integer& z) { return Rational(z); }
template <> inline double scalarFrom<double>(const Integer& z) { return toDouble(z); }
template <> inline long double scalarFrom<long double>(const Integer& z) { return toLong(z); }

inline double asDouble(const Rational& q) { return toDouble(q); }
inline double asDouble(double x) { return x; }
inline double asDouble(long double x) { return double(x); }

template <class T = Rational>
class SupportFunction {
 public:
  using value_type = T;
  SupportFunction() : values_(3, T(0)) { cacheAngles(); }
  SupportFunction(Fan fan, std::vector<T> values) : fan_(std::move(fan)), values_(std::move(values)) {
    if (values_.size() != fan_.size()) throw DomainError("support function needs one value per ray");
    cacheAngles();
  }
  template <class F>
  static SupportFunction sample(const Fan& fan, F&& f) {
    std::vector<T> vals;
    for (auto& r : fan.rays()) vals.push_back(f(r.v));
    return SupportFunction(fan, std::move(vals));
  }
  static SupportFunction zero(const Fan& fan = Fan::P2()) { return SupportFunction(fan, std::vector<T>(fan.size(), T(0))); }

  const Fan& fan() const { return fan_; }
  const std::vector<T>& values() const { return values_; }
  const T& value(size_t i) const { return values_[i % values_.size()]; }

  T operator()(const V2& v) const {
    if (v.isZero()) return T(0);
    size_t i = fan_.locate(v);
    const V2& a = fan_.ray(i).v;
    const V2& b = fan_.ray(i + 1).v;
    T d = scalarFrom<T>(cross(a, b));
    return (scalarFrom<T>(cross(v, b)) * value(i) + scalarFrom<T>(cross(a, v)) * value(i + 1)) / d;
  }
  T operator()(const Q2& q) const {
    if (q.x == 0 && q.y == 0) return T(0);
    Integer l = boost::multiprecision::lcm(denom(q.x), denom(q.y));
    return (*this)(V2(numer(q.x * l), numer(q.y * l))) / scalarFrom<T>(l);
  }
  double operator()(double x, double y) const {
    if (x == 0 && y == 0) return 0;
    double t = std::atan2(y, x);
    if (t < 0) t += 2 * M_PI;
    size_t n = angles_.size();
    size_t i = size_t(std::upper_bound(angles_.begin(), angles_.end(), t) - angles_.begin());
    i = (i == 0) ? n - 1 : i - 1;
    auto& a = dr_[i];
    auto& b = dr_[(i + 1) % n];
    double d = a[0] * b[1] - a[1] * b[0];
    double al = (x * b[1] - y * b[0]) / d, be = (a[0] * y - a[1] * x) / d;
    return al * asDouble(value(i)) + be * asDouble(value(i + 1));
  }

  // Same function, values listed on a finer (or any) fan; exact when the fan refines ours.
  SupportFunction on(const Fan& f) const {
    return sample(f, [&](const V2& v) { return (*this)(v); });
  }

  SupportFunction& operator*=(const T& s) {
    for (auto& x : values_) x *= s;
    return *this;
  }
  friend SupportFunction operator*(const T& s, SupportFunction p) { return p *= s; }
  friend SupportFunction operator+(const SupportFunction& p, const SupportFunction& q) {
    Fan u = (p.fan_ == q.fan_) ? p.fan_ : unionFan(p.fan_, q.fan_);
    return sample(u, [&](const V2& v) { return p(v) + q(v); });
  }
  friend SupportFunction operator-(const SupportFunction& p, const SupportFunction& q) {
    Fan u = (p.fan_ == q.fan_) ? p.fan_ : unionFan(p.fan_, q.fan_);
    return sample(u, [&](const V2& v) { return p(v) - q(v); });
  }

  // Jump of the slope across ray i, in lattice-length units. Valid on any complete fan.
  T cornerMass(size_t i) const {
    const V2& p = fan_.ray(fan_.prev(i)).v;
    const V2& r = fan_.ray(i).v;
    const V2& n = fan_.ray(i + 1).v;
    // linear extension L of the piece on cone(p, r), evaluated at n
    T d = scalarFrom<T>(cross(p, r));
    T Ln = (scalarFrom<T>(cross(n, r)) * value(fan_.prev(i)) + scalarFrom<T>(cross(p, n)) * value(i)) / d;
    return (value(i + 1) - Ln) / scalarFrom<T>(cross(r, n));
  }
  std::vector<T> cornerMasses() const {
    std::vector<T> m;
    for (size_t i = 0; i < fan_.size(); ++i) m.push_back(cornerMass(i));
    return m;
  }

  // Drop rays where the function is locally linear (keeps at least a valid fan).
  SupportFunction simplified() const {
    std::vector<RayQ> keep;
    for (size_t i = 0; i < fan_.size(); ++i)
      if (cornerMass(i) != T(0)) keep.push_back(fan_.ray(i));
    for (size_t i = 0; i < fan_.size() && !validFan(keep); ++i)
      if (std::find(keep.begin(), keep.end(), fan_.ray(i)) == keep.end()) keep.push_back(fan_.ray(i));
    return on(Fan(keep));
  }

 private:
  static bool validFan(std::vector<RayQ> rays) {
    try {
      Fan f(std::move(rays));
      return true;
    } catch (const DomainError&) {
      return false;
    }
  }
  void cacheAngles() {
    angles_.clear();
    dr_.clear();
    for (auto& r : fan_.rays()) {
      double x = toDouble(r.a()), y = toDouble(r.b());
      double t = std::atan2(y, x);
      if (t < 0) t += 2 * M_PI;
      angles_.push_back(t);
      dr_.push_back({x, y});
    }
  }
  Fan fan_ = Fan::P2();
  std::vector<T> values_;
  std::vector<double> angles_;
  std::vector<std::array<double, 2>> dr_;
};

using SupportQ = SupportFunction<Rational>;
using SupportD = SupportFunction<double>;

inline SupportD toDoubleSupport(const SupportQ& s) {
  std::vector<double> v;
  for (auto& x : s.values()) v.push_back(toDouble(x));
  return SupportD(s.fan(), v);
}

template <class T>
bool isConvex(const SupportFunction<T>& psi) {
  for (size_t i = 0; i < psi.fan().size(); ++i)
    if (psi.cornerMass(i) < T(0)) return false;
  return true;
}

template <class T>
std::map<size_t, T> cornerMeasure(const SupportFunction<T>& psi) {
  std::map<size_t, T> m;
  for (size_t i = 0; i < psi.fan().size(); ++i) m[i] = psi.cornerMass(i);
  return m;
}

// ---- polygons -------------------------------------------------------------

struct PolytopeQ {
  std::vector<Q2> vertices;  // counterclockwise, no three collinear

  static PolytopeQ hull(std::vector<Q2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) return {pts};
    std::vector<Q2> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
      h[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
      h[k++] = pts[i];
    }
    h.resize(k - 1);
    return {h};
  }
  // twice the Euclidean area
  Rational area2() const {
    Rational a = 0;
    for (size_t i = 0; i < vertices.size(); ++i) a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
    return a;
  }
};

inline PolytopeQ minkowski(const PolytopeQ& P, const PolytopeQ& Q) {
  std::vector<Q2> s;
  for (auto& p : P.vertices)
    for (auto& q : Q.vertices) s.push_back(p + q);
  return PolytopeQ::hull(s);
}

inline Rational mixedArea(const PolytopeQ& P, const PolytopeQ& Q) {
  if (P.vertices.empty() || Q.vertices.empty()) throw DomainError("mixedArea of an empty polygon");
  return (minkowski(P, Q).area2() - P.area2() - Q.area2()) / 2;
}

// For convex psi: the polygon whose support function is psi.
inline PolytopeQ subdifferential(const SupportQ& psi) {
  if (!isConvex(psi)) throw DomainError("subdifferential of a non-convex support function");
  std::vector<Q2> pts;
  auto& f = psi.fan();
  for (size_t i = 0; i < f.size(); ++i) {
    const V2& a = f.ray(i).v;
    const V2& b = f.ray(i + 1).v;
    Rational d(cross(a, b));
    // gradient m of the piece: <m,a> = psi_a, <m,b> = psi_b
    pts.emplace_back((psi.value(i) * Rational(b.y) - psi.value(i + 1) * Rational(a.y)) / d,
                     (psi.value(i + 1) * Rational(a.x) - psi.value(i) * Rational(b.x)) / d);
  }
  return PolytopeQ::hull(pts);
}

// Support function v -> max_{m in P} <m, v> on the fan of P's outer normals.
inline SupportQ supportOf(const PolytopeQ& P) {
  std::vector<RayQ> rays = {RayQ(1, 0), RayQ(0, 1), RayQ(-1, 0), RayQ(0, -1)};
  size_t n = P.vertices.size();
  for (size_t i = 0; n >= 2 && i < n; ++i) {
    Q2 e = P.vertices[(i + 1) % n] - P.vertices[i];
    V2 d = clearDenominators(e);
    rays.push_back(primitive(V2(d.y, -d.x)));
    rays.push_back(primitive(V2(-d.y, d.x)));
  }
  return SupportQ::sample(Fan(rays), [&](const V2& v) {
    Rational m = dot(P.vertices[0], Q2(v));
    for (auto& p : P.vertices) m = std::max(m, dot(p, Q2(v)));
    return m;
  });
}

// Intersection pairing on any fan carrying both (bilinear, no convexity needed):
// sum over rays of psi1(v) times the corner mass of psi2.
template <class T>
T pairing(const SupportFunction<T>& a, const SupportFunction<T>& b) {
  Fan u = (a.fan() == b.fan()) ? a.fan() : unionFan(a.fan(), b.fan());
  auto bb = b.on(u);
  T s(0);
  for (size_t i = 0; i < u.size(); ++i) s += a(u.ray(i).v) * bb.cornerMass(i);
  return s;
}

inline Rational intersectionNumberFan(const SupportQ& a, const SupportQ& b) {
  if (!isConvex(a) || !isConvex(b)) throw DomainError("intersectionNumber needs nef (convex) classes");
  Fan u = commonRefinement(a.fan(), b.fan());
  auto bb = b.on(u);
  Rational s = 0;
  for (size_t i = 0; i < u.size(); ++i) s += a(u.ray(i).v) * bb.cornerMass(i);
  return s;
}

inline Rational intersectionNumber(const SupportQ& a, const SupportQ& b) {
  if (!isConvex(a) || !isConvex(b)) throw DomainError("intersectionNumber needs nef (convex) classes");
  return mixedArea(subdifferential(a), subdifferential(b));
}

// ---- Newton polygons --------------------------------------------------------

// Tropical support function of the curve {sum c_m x^m = 0} under Log = -log|.|:
// psi(v) = max_m <m0 - m, v>, with m0 the lexicographically smallest exponent.
inline SupportQ newtonSupport(const std::vector<V2>& exps) {
  if (exps.empty()) throw DomainError("newtonSupport of an empty support");
  V2 m0 = *std::min_element(exps.begin(), exps.end(),
                            [](const V2& a, const V2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Q2> pts;
  for (auto& m : exps) pts.push_back(Q2(m0 - m));
  return supportOf(PolytopeQ::hull(pts)).simplified();
}

// ---- homogenization ---------------------------------------------------------

// Radial samples t -> psi_T(t v) of a not necessarily homogeneous support function.
using RadialEvaluator = std::function<double(double x, double y)>;

struct Homogenized {
  SupportD psi;
  std::vector<double> errorBound;  // |psi(T v)/T - psi(T v / 2)/(T / 2)| per ray
};

inline Homogenized homogenize(const RadialEvaluator& e, const std::vector<RayQ>& rays, double tMax) {
  if (!(tMax > 0)) throw DomainError("homogenize needs tMax > 0");
  std::vector<double> vals, err;
  for (auto& r : rays) {
    double x = toDouble(r.a()), y = toDouble(r.b());
    double q2 = e(tMax * x, tMax * y) / tMax;
    double q1 = e(0.5 * tMax * x, 0.5 * tMax * y) / (0.5 * tMax);
    if (!std::isfinite(q1) || !std::isfinite(q2)) throw DomainError("radial evaluator returned a non-finite value");
    vals.push_back(q2);
    err.push_back(std::abs(q2 - q1));
  }
  // rays arrive in any order; the fan sorts them, so sample through a lookup
  Fan f(rays);
  std::vector<double> ordered(f.size());
  for (size_t i = 0; i < rays.size(); ++i) ordered[*f.indexOf(rays[i])] = vals[i];
  std::vector<double> eo(f.size());
  for (size_t i = 0; i < rays.size(); ++i) eo[*f.indexOf(rays[i])] = err[i];
  return {SupportD(f, ordered), eo};
}

struct GapReport {
  double gap = 0;
  bool monotone = true;  // t -> e(tv) - t psi(v) non-increasing on the grid, per ray
};

inline GapReport nearHomogeneityGap(const RadialEvaluator& e, const SupportD& psi, const std::vector<RayQ>& rays,
                                    std::vector<double> tGrid, double slack = 1e-9) {
  std::sort(tGrid.begin(), tGrid.end());
  GapReport g;
  for (auto& r : rays) {
    double x = toDouble(r.a()), y = toDouble(r.b());
    double pv = psi(x, y);
    double prev = 0;
    for (size_t k = 0; k < tGrid.size(); ++k) {
      double t = tGrid[k];
      double d = e(t * x, t * y) - t * pv;
      g.gap = std::max(g.gap, std::abs(d));
      if (k > 0 && d > prev + slack * (1 + std::abs(prev))) g.monotone = false;
      prev = d;
    }
  }
  return g;
}

// ---- blowup bookkeeping -------------------------------------------------------

// Coefficient drop of the external divisor when the smooth cone s is blown up.
template <class T>
T lelongAtCorner(const SupportFunction<T>& psi, const Cone2& s) {
  if (!isRegular(s)) throw DomainError("lelongAtCorner needs a smooth cone");
  return psi(s.r1.v) + psi(s.r2.v) - psi(s.r1.v + s.r2.v);
}

// <-K_X . D> where D = sum_tau psi(v_tau) C_tau on the smooth surface X.
template <class T>
T anticanonicalPairing(const SupportFunction<T>& psi, const Fan& X) {
  if (!X.smooth()) throw DomainError("anticanonicalPairing needs a smooth fan");
  T s(0);
  for (auto& r : X.rays()) s += psi(r.v) * scalarFrom<T>(2 + selfIntersection(X, r));
  return s;
}
template <class T>
T anticanonicalPairing(const SupportFunction<T>& psi) {
  return anticanonicalPairing(psi, psi.fan());
}

}  // namespace toritrop

namespace toritrop {

// Convex hull of a few random lattice points in [-h, h]^2; at least a triangle.
inline PolytopeQ randomLatticePolygon(std::mt19937_64& rng, long h, int points = 5) {
  std::uniform_int_distribution<long> d(-h, h);
  for (;;) {
    std::vector<Q2> pts;
    for (int i = 0; i < points; ++i) pts.push_back(Q2(V2(d(rng), d(rng))));
    auto P = PolytopeQ::hull(pts);
    if (P.vertices.size() >= 3) return P;
  }
}

}  // namespace toritrop
