#pragma once
// Rays, cones and complete fans in N = Z^2, plus 2x2 integer matrices.

#include "numeric.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace toritrop {

struct V2 {
  Integer x, y;
  V2() = default;
  V2(Integer a, Integer b) : x(std::move(a)), y(std::move(b)) {}
  V2(long a, long b) : x(a), y(b) {}
  friend V2 operator+(const V2& p, const V2& q) { return {p.x + q.x, p.y + q.y}; }
  friend V2 operator-(const V2& p, const V2& q) { return {p.x - q.x, p.y - q.y}; }
  friend V2 operator-(const V2& p) { return {-p.x, -p.y}; }
  friend V2 operator*(const Integer& k, const V2& p) { return {k * p.x, k * p.y}; }
  friend bool operator==(const V2& p, const V2& q) { return p.x == q.x && p.y == q.y; }
  bool isZero() const { return x == 0 && y == 0; }
};

inline Integer cross(const V2& p, const V2& q) { return p.x * q.y - p.y * q.x; }
inline Integer dot(const V2& p, const V2& q) { return p.x * q.x + p.y * q.y; }
inline Integer content(const V2& v) { return igcd(v.x, v.y); }
inline Integer height(const V2& v) { return std::max(iabs(v.x), iabs(v.y)); }

// 0 for directions in [0, pi), 1 for [pi, 2pi)
inline int halfPlane(const V2& v) { return (v.y > 0 || (v.y == 0 && v.x > 0)) ? 0 : 1; }

// Strict counterclockwise angular order on directions starting at angle 0.
inline bool angleLess(const V2& a, const V2& b) {
  int ha = halfPlane(a), hb = halfPlane(b);
  if (ha != hb) return ha < hb;
  return cross(a, b) > 0;
}
inline bool sameDirection(const V2& a, const V2& b) { return cross(a, b) == 0 && dot(a, b) > 0; }

// Primitive generator of a rational ray.
struct RayQ {
  V2 v;
  RayQ() : v(1, 0) {}
  explicit RayQ(const V2& w) : v(w) {
    if (w.isZero() || content(w) != 1) throw DomainError("RayQ requires a primitive vector");
  }
  RayQ(long a, long b) : RayQ(V2(a, b)) {}
  const Integer& a() const { return v.x; }
  const Integer& b() const { return v.y; }
  friend bool operator==(const RayQ& p, const RayQ& q) { return p.v == q.v; }
};

inline RayQ primitive(const V2& v) {
  if (v.isZero()) throw DomainError("primitive of the zero vector");
  Integer g = content(v);
  return RayQ(V2(v.x / g, v.y / g));
}
inline RayQ primitive(long a, long b) { return primitive(V2(a, b)); }

struct Cone2 {
  RayQ r1, r2;
  Cone2() : r1(1, 0), r2(0, 1) {}
  Cone2(RayQ a, RayQ b) : r1(std::move(a)), r2(std::move(b)) {
    if (cross(r1.v, r2.v) <= 0) throw DomainError("cone generators must be counterclockwise with angle < pi");
  }
  Integer det() const { return cross(r1.v, r2.v); }
  // closed cone membership
  bool contains(const V2& w) const { return cross(r1.v, w) >= 0 && cross(w, r2.v) >= 0; }
  bool containsInterior(const V2& w) const { return cross(r1.v, w) > 0 && cross(w, r2.v) > 0; }
  friend bool operator==(const Cone2& p, const Cone2& q) { return p.r1 == q.r1 && p.r2 == q.r2; }
};

inline bool isRegular(const Cone2& c) { return iabs(c.det()) == 1; }

struct IntMat2 {
  Integer a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]
  IntMat2() = default;
  IntMat2(Integer a_, Integer b_, Integer c_, Integer d_)
      : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}
  IntMat2(long a_, long b_, long c_, long d_) : a(a_), b(b_), c(c_), d(d_) {}
  Integer det() const { return a * d - b * c; }
  bool unimodular() const { return iabs(det()) == 1; }
  Integer trace() const { return a + d; }
  V2 operator()(const V2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  friend IntMat2 operator*(const IntMat2& m, const IntMat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  // adjugate: M * adj(M) = det(M) * I
  IntMat2 adj() const { return {d, -b, -c, a}; }
  IntMat2 transpose() const { return {a, c, b, d}; }
  static IntMat2 identity() { return {}; }
  static IntMat2 fromColumns(const V2& u, const V2& w) { return {u.x, w.x, u.y, w.y}; }
  friend bool operator==(const IntMat2& m, const IntMat2& n) {
    return m.a == n.a && m.b == n.b && m.c == n.c && m.d == n.d;
  }
  bool isScalar() const { return b == 0 && c == 0 && a == d; }
};

inline IntMat2 power(IntMat2 m, unsigned k) {
  IntMat2 r;
  while (k) {
    if (k & 1) r = r * m;
    m = m * m;
    k >>= 1;
  }
  return r;
}

// A complete fan: rays in counterclockwise order, consecutive pairs spanning strictly convex sectors.
class Fan {
 public:
  Fan() = default;
  explicit Fan(std::vector<RayQ> rays) : rays_(std::move(rays)) { normalize(); }

  static Fan fromVectors(const std::vector<V2>& vs) {
    std::vector<RayQ> r;
    r.reserve(vs.size());
    for (auto& v : vs) r.push_back(primitive(v));
    return Fan(std::move(r));
  }
  static Fan P2() { return Fan({RayQ(1, 0), RayQ(0, 1), RayQ(-1, -1)}); }
  static Fan quadric() { return Fan({RayQ(1, 0), RayQ(0, 1), RayQ(-1, 0), RayQ(0, -1)}); }

  size_t size() const { return rays_.size(); }
  const RayQ& ray(size_t i) const { return rays_[i % rays_.size()]; }
  const std::vector<RayQ>& rays() const { return rays_; }
  Cone2 sector(size_t i) const { return Cone2(ray(i), ray(i + 1)); }
  bool smooth() const { return smooth_; }
  size_t next(size_t i) const { return (i + 1) % rays_.size(); }
  size_t prev(size_t i) const { return (i + rays_.size() - 1) % rays_.size(); }

  std::optional<size_t> indexOf(const RayQ& r) const {
    size_t i = locate(r.v);
    if (rays_[i] == r) return i;
    return std::nullopt;
  }
  std::optional<size_t> sectorIndex(const Cone2& c) const {
    auto i = indexOf(c.r1);
    if (i && ray(*i + 1) == c.r2) return i;
    return std::nullopt;
  }
  // Index i of the sector [ray i, ray i+1) holding direction v; a boundary ray resolves counterclockwise.
  size_t locate(const V2& v) const {
    if (v.isZero()) return 0;
    auto it = std::upper_bound(rays_.begin(), rays_.end(), v,
                               [](const V2& w, const RayQ& r) { return angleLess(w, r.v); });
    if (it == rays_.begin()) return rays_.size() - 1;
    return size_t(it - rays_.begin()) - 1;
  }

  friend bool operator==(const Fan& f, const Fan& g) { return f.rays_ == g.rays_; }

 private:
  void normalize() {
    std::sort(rays_.begin(), rays_.end(), [](const RayQ& p, const RayQ& q) { return angleLess(p.v, q.v); });
    rays_.erase(std::unique(rays_.begin(), rays_.end()), rays_.end());
    if (rays_.size() < 3) throw DomainError("a complete fan needs at least three rays");
    smooth_ = true;
    for (size_t i = 0; i < rays_.size(); ++i) {
      Integer c = cross(rays_[i].v, ray(i + 1).v);
      if (c <= 0) throw DomainError("fan sectors must be strictly convex");
      if (c != 1) smooth_ = false;
    }
  }
  std::vector<RayQ> rays_;
  bool smooth_ = true;
};

// Minimal resolution of one cone: the rays strictly inside it on the boundary of
// conv((cone ∩ N) \ {0}), listed from u towards w.
inline std::vector<RayQ> resolveCone(const RayQ& u, const RayQ& w) {
  std::vector<RayQ> out;
  V2 cur = u.v;
  Integer d = cross(cur, w.v);
  while (d > 1) {
    // lattice points p with cross(cur, p) = 1 form p0 + t*cur; take the one closest to w inside the cone
    Integer s, t;
    extGcd(cur.x, cur.y, s, t);  // s*x + t*y = 1, so cross(cur, (-t, s)) = 1
    V2 p0(-t, s);
    Integer k = ceilDiv(-cross(p0, w.v), d);
    V2 p = p0 + k * cur;
    out.push_back(RayQ(p));
    cur = p;
    d = cross(cur, w.v);
  }
  return out;
}

inline Fan refineToSmooth(const Fan& f) {
  if (f.smooth()) return f;
  std::vector<RayQ> rays;
  for (size_t i = 0; i < f.size(); ++i) {
    rays.push_back(f.ray(i));
    auto extra = resolveCone(f.ray(i), f.ray(i + 1));
    rays.insert(rays.end(), extra.begin(), extra.end());
  }
  return Fan(std::move(rays));
}

inline Fan blowup(const Fan& f, const Cone2& s) {
  if (!f.sectorIndex(s)) throw DomainError("blowup: cone is not a sector of the fan");
  if (!f.smooth()) throw DomainError("blowup: fan must be smooth");
  auto rays = f.rays();
  rays.push_back(primitive(s.r1.v + s.r2.v));
  return Fan(std::move(rays));
}

// (C_r . C_r) on the smooth toric surface of f: v_prev + v_next = -a r.
inline Integer selfIntersection(const Fan& f, const RayQ& r) {
  auto i = f.indexOf(r);
  if (!i) throw DomainError("selfIntersection: ray not in fan");
  if (!f.smooth()) throw DomainError("selfIntersection: fan must be smooth");
  V2 s = f.ray(f.prev(*i)).v + f.ray(*i + 1).v;
  // s is an integer multiple of r because the two neighbouring sectors are unimodular
  if (r.v.x != 0) return -(s.x / r.v.x);
  return -(s.y / r.v.y);
}

inline Fan commonRefinement(const Fan& f, const Fan& g) {
  auto rays = f.rays();
  rays.insert(rays.end(), g.rays().begin(), g.rays().end());
  return refineToSmooth(Fan(std::move(rays)));
}

// Union of ray sets without smoothing.
inline Fan unionFan(const Fan& f, const Fan& g) {
  auto rays = f.rays();
  rays.insert(rays.end(), g.rays().begin(), g.rays().end());
  return Fan(std::move(rays));
}

// All primitive vectors with max(|a|,|b|) <= h in counterclockwise order; consecutive ones are unimodular.
inline std::vector<V2> raysOfHeight(long h) {
  std::vector<std::pair<long, long>> first;  // 0 <= b <= a, a <= h
  for (long a = 1; a <= h; ++a)
    for (long b = 0; b <= a; ++b)
      if (std::gcd(a, b) == 1) first.push_back({a, b});
  std::sort(first.begin(), first.end(), [](auto& p, auto& q) { return p.second * q.first < q.second * p.first; });
  std::vector<std::pair<long, long>> oct;  // angles in [0, pi/2)
  for (auto& [a, b] : first) oct.push_back({a, b});
  for (auto it = first.rbegin(); it != first.rend(); ++it)
    if (it->first != it->second) oct.push_back({it->second, it->first});
  oct.pop_back();  // drop (0,1); it starts the next quadrant
  std::vector<V2> out;
  out.reserve(oct.size() * 4);
  for (int q = 0; q < 4; ++q)
    for (auto [a, b] : oct) {
      long x = a, y = b;
      for (int k = 0; k < q; ++k) { long t = x; x = -y; y = t; }
      out.emplace_back(x, y);
    }
  return out;
}

}  // namespace toritrop
