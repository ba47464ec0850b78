#pragma once
// Exceptional curves and indeterminacy points of toric words, contraction
// orders, orbits of exceptional images along the poles, and preimages.

#include "toric_map.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <set>

namespace toritrop {

namespace detail {

using UPoly = std::vector<CR>;  // coefficients, low degree first

inline Real workingEps(int slack = 3) {
  return boost::multiprecision::pow(Real(10), -int(Real::default_precision()) + slack);
}

inline CR evalU(const UPoly& p, const CR& x) {
  CR r;
  for (size_t k = p.size(); k-- > 0;) r = r * x + p[k];
  return r;
}
inline UPoly derivU(const UPoly& p) {
  UPoly d;
  for (size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * CR(long(k)));
  return d;
}
inline void trimU(UPoly& p, const Real& relTol) {
  Real mx = 0;
  for (auto& c : p) mx = std::max(mx, abs(c));
  while (!p.empty() && abs(p.back()) <= relTol * mx) p.pop_back();
}

// Companion eigenvalues in long double, then Newton at working precision.
inline std::vector<CR> rootsU(UPoly p, const Real& relTol) {
  trimU(p, relTol);
  std::vector<CR> out;
  if (p.size() < 2) return out;
  size_t n = p.size() - 1;
  using M = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  M C = M::Zero(long(n), long(n));
  CR lead = p[n];
  for (size_t i = 1; i < n; ++i) C(long(i), long(i - 1)) = 1;
  for (size_t i = 0; i < n; ++i) C(long(i), long(n - 1)) = -(p[i] / lead).toL();
  Eigen::ComplexEigenSolver<M> es(C, false);
  UPoly d = derivU(p);
  Real eps = workingEps(5);
  for (long i = 0; i < long(n); ++i) {
    CR x(es.eigenvalues()(i));
    for (int it = 0; it < 200; ++it) {
      CR dv = evalU(d, x);
      if (dv.isZero()) break;
      CR dx = evalU(p, x) / dv;
      x -= dx;
      if (abs(dx) <= eps * (1 + abs(x))) break;
    }
    out.push_back(x);
  }
  return out;
}

// Bivariate polynomial with complex coefficients and nonnegative exponents.
using BPoly = std::map<Exp2, CR>;

inline BPoly toBPoly(const Laurent& F, const CR& scale = CR(1), Exp2 shift = {0, 0}) {
  BPoly b;
  for (auto& [e, c] : F.terms()) b[{e.first + shift.first, e.second + shift.second}] += scale * CR::fromRational(c);
  return b;
}
inline long degIn(const BPoly& P, int var) {
  long d = 0;
  for (auto& [e, c] : P) d = std::max(d, var == 0 ? e.first : e.second);
  return d;
}
inline CR evalB(const BPoly& P, const CR& x1, const CR& x2) {
  CR r;
  for (auto& [e, c] : P) r += c * Laurent::ipow(x1, e.first) * Laurent::ipow(x2, e.second);
  return r;
}
inline Real scaleB(const BPoly& P, const CR& x1, const CR& x2) {
  Real r = 0;
  for (auto& [e, c] : P) r += abs(c * Laurent::ipow(x1, e.first) * Laurent::ipow(x2, e.second));
  return r;
}
inline BPoly partialB(const BPoly& P, int var) {
  BPoly d;
  for (auto& [e, c] : P) {
    long k = var == 0 ? e.first : e.second;
    if (k == 0) continue;
    Exp2 f = var == 0 ? Exp2{e.first - 1, e.second} : Exp2{e.first, e.second - 1};
    d[f] += c * CR(k);
  }
  return d;
}
// coefficients of P(x1 = z, .) as a polynomial in x2 (or in x1 when var == 0)
inline UPoly specialize(const BPoly& P, const CR& z, int freeVar) {
  UPoly u(static_cast<size_t>(degIn(P, freeVar) + 1));
  for (auto& [e, c] : P) {
    long k = freeVar == 1 ? e.second : e.first;
    long o = freeVar == 1 ? e.first : e.second;
    u[size_t(k)] += c * Laurent::ipow(z, o);
  }
  return u;
}

inline CR detC(std::vector<std::vector<CR>> a) {
  size_t n = a.size();
  CR det(1);
  for (size_t c = 0; c < n; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < n; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    if (a[piv][c].isZero()) return CR(0);
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (size_t r = c + 1; r < n; ++r) {
      CR f = a[r][c] / a[c][c];
      for (size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

// Res_{x2}(P1, P2) as a polynomial in x1, by evaluation at roots of unity.
inline UPoly resultantX1(const BPoly& P1, const BPoly& P2) {
  long m = degIn(P1, 1), n = degIn(P2, 1);
  long bound = m * degIn(P2, 0) + n * degIn(P1, 0);
  long K = bound + 1;
  Real pi = piR();
  std::vector<CR> vals;
  for (long k = 0; k < K; ++k) {
    CR z = polar(Real(1), 2 * pi * k / K);
    UPoly a = specialize(P1, z, 1), b = specialize(P2, z, 1);
    size_t S = size_t(m + n);
    if (S == 0) {
      vals.push_back(CR(1));
      continue;
    }
    std::vector<std::vector<CR>> syl(S, std::vector<CR>(S));
    for (long r = 0; r < n; ++r)
      for (long j = 0; j <= m; ++j) syl[size_t(r)][size_t(r + j)] = a[size_t(m - j)];
    for (long r = 0; r < m; ++r)
      for (long j = 0; j <= n; ++j) syl[size_t(n + r)][size_t(r + j)] = b[size_t(n - j)];
    vals.push_back(detC(std::move(syl)));
  }
  UPoly c(static_cast<size_t>(K));
  for (long j = 0; j < K; ++j) {
    CR s;
    for (long k = 0; k < K; ++k) s += vals[size_t(k)] * polar(Real(1), -2 * pi * Real(j * k % K) / K);
    c[size_t(j)] = s / CR(K);
  }
  return c;
}

struct Newton2 {
  std::array<CR, 2> x;
  bool converged = false;
  Real residual;
};

inline Newton2 newton2(const BPoly& P1, const BPoly& P2, std::array<CR, 2> x, int maxIt = 100) {
  BPoly d[2][2] = {{partialB(P1, 0), partialB(P1, 1)}, {partialB(P2, 0), partialB(P2, 1)}};
  Real eps = workingEps(6);
  Newton2 r;
  for (int it = 0; it < maxIt; ++it) {
    CR f1 = evalB(P1, x[0], x[1]), f2 = evalB(P2, x[0], x[1]);
    CR a = evalB(d[0][0], x[0], x[1]), b = evalB(d[0][1], x[0], x[1]);
    CR c = evalB(d[1][0], x[0], x[1]), e = evalB(d[1][1], x[0], x[1]);
    CR det = a * e - b * c;
    if (det.isZero()) break;
    CR dx = (f1 * e - f2 * b) / det, dy = (a * f2 - c * f1) / det;
    x[0] -= dx;
    x[1] -= dy;
    if (abs(dx) + abs(dy) <= eps * (1 + abs(x[0]) + abs(x[1]))) {
      r.converged = true;
      break;
    }
  }
  r.x = x;
  Real s1 = scaleB(P1, x[0], x[1]), s2 = scaleB(P2, x[0], x[1]);
  r.residual = std::max(abs(evalB(P1, x[0], x[1])) / (s1 == 0 ? Real(1) : s1),
                        abs(evalB(P2, x[0], x[1])) / (s2 == 0 ? Real(1) : s2));
  return r;
}

struct CommonZero {
  std::array<CR, 2> x;
  int multiplicity = 1;
};
struct CommonZeros {
  std::vector<CommonZero> zeros;
  bool degenerate = false;  // resultant vanished identically
  bool clustered = false;   // some zero came out with multiplicity > 1
};

inline Real dist2(const std::array<CR, 2>& a, const std::array<CR, 2>& b) {
  return abs(a[0] - b[0]) + abs(a[1] - b[1]);
}

// Isolated common zeros of P1, P2 with both coordinates nonzero.
inline CommonZeros commonZerosInTorus(const BPoly& P1, const BPoly& P2) {
  CommonZeros out;
  Real digits = Real(Real::default_precision());
  Real relTol = boost::multiprecision::pow(Real(10), -digits / 2);
  UPoly r = resultantX1(P1, P2);
  Real mx = 0;
  for (auto& c : r) mx = std::max(mx, abs(c));
  if (mx <= relTol) {
    out.degenerate = true;
    return out;
  }
  auto roots = rootsU(r, relTol);
  Real tiny = boost::multiprecision::pow(Real(10), -digits / 4);
  Real same = boost::multiprecision::pow(Real(10), -digits / 8);
  for (auto& z : roots) {
    if (abs(z) < tiny) continue;
    std::optional<Newton2> best;
    for (const BPoly* P : {&P1, &P2}) {
      if (degIn(*P, 1) == 0) continue;
      for (auto& y : rootsU(specialize(*P, z, 1), relTol)) {
        if (abs(y) < tiny) continue;
        Newton2 nt = newton2(P1, P2, {z, y});
        if (!best || nt.residual < best->residual) best = nt;
      }
      break;
    }
    if (!best || best->residual > relTol) continue;
    if (abs(best->x[0]) < tiny || abs(best->x[1]) < tiny) continue;
    bool merged = false;
    for (auto& q : out.zeros)
      if (dist2(q.x, best->x) < same * (1 + abs(q.x[0]) + abs(q.x[1]))) {
        ++q.multiplicity;
        out.clustered = true;
        merged = true;
        break;
      }
    if (!merged) out.zeros.push_back({best->x, 1});
  }
  return out;
}

// A point on {F = 0} in the torus, at working precision.
inline std::array<CR, 2> pointOnCurve(const Laurent& F, std::mt19937_64& rng) {
  auto [lo1, lo2] = F.minExponent();
  BPoly P = toBPoly(F, CR(1), {-lo1, -lo2});
  int freeVar = degIn(P, 1) > 0 ? 1 : 0;
  Real tiny = boost::multiprecision::pow(Real(10), -int(Real::default_precision()) / 4);
  for (int attempt = 0; attempt < 50; ++attempt) {
    CR z(Real(randomRational(rng, -3, 3, 101)), Real(randomRational(rng, -3, 3, 101)));
    if (abs(z) < Real(1) / 10) continue;
    auto roots = rootsU(specialize(P, z, freeVar), tiny);
    for (auto& y : roots) {
      if (abs(y) < Real(1) / 1000 || abs(y) > 1000) continue;
      return freeVar == 1 ? std::array<CR, 2>{z, y} : std::array<CR, 2>{y, z};
    }
  }
  throw DomainError("no torus point found on " + F.str());
}

inline void reduceArg(CR& lam) {
  Real twoPi = 2 * piR();
  lam.im -= twoPi * boost::multiprecision::round(lam.im / twoPi);
}

inline long multiplicity(const std::vector<Laurent>& l, const Laurent& F) {
  return long(std::count(l.begin(), l.end(), F));
}

}  // namespace detail

// ---- pole points ----------------------------------------------------------------

inline V2 perpOf(const V2& t) { return {-t.y, t.x}; }

// A point on the pole of a primitive ray tau, with fiber coordinate x^m, m = perp(tau),
// stored through its logarithm so that heights far beyond the exponent range stay usable.
struct PolePoint {
  V2 ray;
  CR lam;
  CplxL fiber() const { return expC(lam).toL(); }
};

// The initial form of F along tau restricted to the pole, as a polynomial in the fiber coordinate.
struct FiberPoly {
  V2 e0;
  std::vector<std::pair<long, Rational>> terms;  // (power of the fiber coordinate, coefficient)
};

inline FiberPoly fiberPoly(const Laurent& F, const V2& tau) {
  Integer val = tropicalValue(F, tau);
  V2 m = perpOf(tau);
  std::vector<std::pair<V2, Rational>> in;
  for (auto& [e, c] : F.terms()) {
    V2 ev(e.first, e.second);
    if (dot(ev, tau) == val) in.push_back({ev, c});
  }
  auto lo = std::min_element(in.begin(), in.end(), [&](auto& a, auto& b) { return dot(a.first, m) < dot(b.first, m); });
  FiberPoly fp;
  fp.e0 = lo->first;
  Integer mm = dot(m, m);
  for (auto& [e, c] : in) fp.terms.push_back({(dot(e - fp.e0, m) / mm).convert_to<long>(), c});
  return fp;
}

struct FiberValue {
  CR logValue;
  Real rel;  // |value| / sum of |terms|
};

inline FiberValue evalFiber(const FiberPoly& fp, const CR& lam) {
  Real top;
  bool first = true;
  for (auto& [j, c] : fp.terms) {
    Real r = lam.re * j;
    if (first || r > top) top = r;
    first = false;
  }
  CR s;
  Real mag = 0;
  for (auto& [j, c] : fp.terms) {
    CR t = CR::fromRational(c) * expC(CR(lam.re * j - top, lam.im * j));
    s += t;
    mag += abs(t);
  }
  FiberValue v;
  v.rel = abs(s) / mag;
  v.logValue = s.isZero() ? CR(Real(-1e30)) : logC(s);
  v.logValue.re += top;
  return v;
}

struct PoleStep {
  PolePoint out;
  std::vector<Laurent> vanishing;  // distinct factors whose initial form vanishes at the point
  Real minRel = 1;                 // smallest relative initial-form value over non-monomial forms
};

inline PoleStep poleStep(const ToricGenerator& g, const PolePoint& p, const Real& tol) {
  PoleStep st;
  V2 m = perpOf(p.ray);
  Integer mm = dot(m, m);
  if (g.isMonomial()) {
    const IntMat2& M = g.matrix();
    V2 t2 = primitive(M(p.ray)).v;
    V2 vec = M.transpose()(perpOf(t2));
    Integer j = dot(vec, m) / mm;
    st.out = {t2, CR(Real(j)) * p.lam};
    detail::reduceArg(st.out.lam);
    return st;
  }
  const Factored& F = g.factored();
  std::array<V2, 2> a = {V2(0, 0), V2(0, 0)}, ord = a;
  std::array<CR, 2> ell;
  for (int i = 0; i < 2; ++i)
    for (int sgn = 0; sgn < 2; ++sgn)
      for (auto& f : sgn == 0 ? F.num[i] : F.den[i]) {
        FiberPoly fp = fiberPoly(f, p.ray);
        FiberValue fv = evalFiber(fp, p.lam);
        if (fp.terms.size() > 1) {
          st.minRel = std::min(st.minRel, fv.rel);
          if (fv.rel < tol && std::find(st.vanishing.begin(), st.vanishing.end(), f) == st.vanishing.end())
            st.vanishing.push_back(f);
        }
        Integer v = tropicalValue(f, p.ray);
        if (sgn == 0) {
          a[i] = a[i] + fp.e0;
          ell[i] += fv.logValue;
          ord[i].x += v;
        } else {
          a[i] = a[i] - fp.e0;
          ell[i] -= fv.logValue;
          ord[i].x -= v;
        }
      }
  V2 image(ord[0].x, ord[1].x);
  if (image.isZero()) throw StructuralError("pole mapped to a point: tropicalization degenerate");
  V2 t2 = primitive(image).v;
  V2 m2 = perpOf(t2);
  V2 vec = m2.x * a[0] + m2.y * a[1];
  if (dot(vec, m) % mm != 0 || cross(vec, m) != 0) throw StructuralError("pole fiber bookkeeping failed");
  Integer j = dot(vec, m) / mm;
  st.out = {t2, CR(Real(j)) * p.lam + CR(Real(m2.x)) * ell[0] + CR(Real(m2.y)) * ell[1]};
  detail::reduceArg(st.out.lam);
  return st;
}

// ---- exceptional and indeterminacy data -------------------------------------------

// F(x^M) with the monomial factor cleared; x' = x^M means x'^e = x^(M^T e).
inline Laurent pullbackMonomial(const Laurent& F, const IntMat2& M) {
  Laurent r;
  for (auto& [e, c] : F.terms()) {
    V2 f = M.transpose()(V2(e.first, e.second));
    r += Laurent::monomial(f.x.convert_to<long>(), f.y.convert_to<long>(), c);
  }
  auto [a, b] = r.minExponent();
  return r.shifted(-a, -b);
}

struct ExcCurve {
  size_t stage = 0;
  Laurent factor;                 // stage input coordinates
  std::optional<Laurent> pulled;  // word input coordinates, when every earlier stage is monomial
  V2 stageImage;                  // valuation vector of the stage output along the curve
  V2 wordImage;                   // the same at the word output
  bool contracted = false;
  std::optional<PolePoint> stagePoint, wordPoint;
  bool lowConfidence = false;     // pushing the image forward met an indeterminacy point
};

struct IndPoint {
  size_t stage = 0;
  bool onPole = false;
  V2 ray;                      // pole case
  CplxL fiber;                 // pole case, x^perp(ray)
  std::array<CplxL, 2> point;  // torus case
  int multiplicity = 1;
  bool certified = false;
};

struct ExcIndData {
  std::vector<ExcCurve> exc;
  std::vector<IndPoint> ind;
};

namespace detail {

inline std::vector<Laurent> distinctFactors(const Factored& F, bool includeMonomials) {
  std::vector<Laurent> out;
  for (int i = 0; i < 2; ++i)
    for (auto* l : {&F.num[i], &F.den[i]})
      for (auto& f : *l)
        if ((includeMonomials || !f.isMonomial()) && std::find(out.begin(), out.end(), f) == out.end())
          out.push_back(f);
  return out;
}

inline V2 stageImageOf(const Factored& F, const Laurent& C) {
  return V2(multiplicity(F.num[0], C) - multiplicity(F.den[0], C), multiplicity(F.num[1], C) - multiplicity(F.den[1], C));
}

// log of x^m on the curve C, m = perp of the primitive image; constant iff C is contracted
inline CR fiberLogOnCurve(const Factored& F, const Laurent& C, const V2& image, const std::array<CR, 2>& p) {
  V2 m = perpOf(primitive(image).v);
  CR lam;
  for (auto& G : distinctFactors(F, true)) {
    if (G == C) continue;
    Integer e = m.x * (multiplicity(F.num[0], G) - multiplicity(F.den[0], G)) +
                m.y * (multiplicity(F.num[1], G) - multiplicity(F.den[1], G));
    if (e == 0) continue;
    CR v = G.eval(p[0], p[1], [](const Rational& q) { return CR::fromRational(q); });
    lam += CR(Real(e)) * logC(v);
  }
  return lam;
}

inline std::optional<PolePoint> contractedImage(const Factored& F, const Laurent& C, const V2& image, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CR> lams;
  for (int k = 0; k < 3; ++k) lams.push_back(fiberLogOnCurve(F, C, image, pointOnCurve(C, rng)));
  Real tol = boost::multiprecision::pow(Real(10), -int(Real::default_precision()) / 2);
  for (int k = 1; k < 3; ++k)
    if (abs(expC(lams[size_t(k)] - lams[0]) - CR(1)) > tol) return std::nullopt;
  PolePoint p{primitive(image).v, lams[0]};
  reduceArg(p.lam);
  return p;
}

// Exact gcd of univariate rational polynomials (low degree first).
using QPoly = std::vector<Rational>;
inline void trimQ(QPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}
inline QPoly gcdQ(QPoly a, QPoly b) {
  trimQ(a);
  trimQ(b);
  while (!b.empty()) {
    QPoly r = a;
    while (r.size() >= b.size()) {
      Rational q = r.back() / b.back();
      size_t sh = r.size() - b.size();
      for (size_t i = 0; i < b.size(); ++i) r[sh + i] -= q * b[i];
      r.pop_back();
      trimQ(r);
    }
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Rational l = a.back();
    for (auto& c : a) c /= l;
  }
  return a;
}
inline QPoly toQPoly(const FiberPoly& fp) {
  QPoly q;
  for (auto& [j, c] : fp.terms) {
    if (q.size() <= size_t(j)) q.resize(size_t(j) + 1);
    q[size_t(j)] += c;
  }
  return q;
}

inline std::vector<V2> specialRays(const std::vector<Laurent>& factors) {
  std::vector<V2> out;
  for (auto& f : factors) {
    auto s = f.support();
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = a + 1; b < s.size(); ++b)
        for (int sg : {1, -1}) {
          V2 d = s[b] - s[a];
          V2 n = primitive(V2(-d.y * sg, d.x * sg)).v;
          if (fiberPoly(f, n).terms.size() > 1 && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
        }
  }
  return out;
}

inline void stageInd(const ToricGenerator& g, size_t stage, std::vector<IndPoint>& out) {
  if (g.isMonomial()) return;
  auto fac = distinctFactors(g.factored(), false);
  // inside the torus
  for (size_t a = 0; a < fac.size(); ++a)
    for (size_t b = a + 1; b < fac.size(); ++b) {
      auto [a1, a2] = fac[a].minExponent();
      auto [b1, b2] = fac[b].minExponent();
      auto cz = commonZerosInTorus(toBPoly(fac[a], CR(1), {-a1, -a2}), toBPoly(fac[b], CR(1), {-b1, -b2}));
      for (auto& z : cz.zeros) {
        IndPoint p;
        p.stage = stage;
        p.point = {z.x[0].toL(), z.x[1].toL()};
        p.multiplicity = z.multiplicity;
        p.certified = !cz.degenerate && z.multiplicity == 1;
        out.push_back(p);
      }
      if (cz.degenerate) {
        IndPoint p;
        p.stage = stage;
        p.multiplicity = 0;  // shared component: not isolated
        out.push_back(p);
      }
    }
  // on the poles
  Real tol = boost::multiprecision::pow(Real(10), -int(Real::default_precision()) / 2);
  for (auto& tau : specialRays(fac)) {
    std::vector<IndPoint> here;
    for (size_t a = 0; a < fac.size(); ++a)
      for (size_t b = a + 1; b < fac.size(); ++b) {
        QPoly gq = gcdQ(toQPoly(fiberPoly(fac[a], tau)), toQPoly(fiberPoly(fac[b], tau)));
        if (gq.size() < 2) continue;
        UPoly u;
        for (auto& c : gq) u.push_back(CR::fromRational(c));
        for (auto& z : rootsU(u, tol)) {
          if (abs(z) < tol) continue;
          CplxL zl = z.toL();
          bool dup = false;
          for (auto& h : here)
            if (std::abs(h.fiber - zl) < 1e-12L * (1 + std::abs(zl))) dup = true;
          if (dup) continue;
          IndPoint p;
          p.stage = stage;
          p.onPole = true;
          p.ray = tau;
          p.fiber = zl;
          p.certified = true;
          p.multiplicity = 0;
          for (auto& f : fac) {
            FiberPoly fp = fiberPoly(f, tau);
            if (fp.terms.size() > 1 && evalFiber(fp, logC(z)).rel < tol) ++p.multiplicity;
          }
          here.push_back(p);
        }
      }
    out.insert(out.end(), here.begin(), here.end());
  }
}

}  // namespace detail

// Pushes a pole point through stages [from, end); reports whether an indeterminacy point was met.
inline PolePoint pushPole(const ToricMapWord& w, size_t from, PolePoint p, const Real& tol, bool& hit) {
  for (size_t s = from; s < w.stages.size(); ++s) {
    PoleStep st = poleStep(w.stages[s], p, tol);
    if (!st.vanishing.empty()) hit = true;
    p = st.out;
  }
  return p;
}

inline ExcIndData excIndData(const ToricMapWord& w, unsigned digits = 40, uint64_t seed = 5) {
  PrecisionScope scope(digits);
  ExcIndData d;
  Real tol = boost::multiprecision::pow(Real(10), -int(digits) / 2);
  IntMat2 before;
  bool monoBefore = true;
  for (size_t s = 0; s < w.stages.size(); ++s) {
    const ToricGenerator& g = w.stages[s];
    if (!g.isMonomial()) {
      const Factored& F = g.factored();
      for (auto& C : detail::distinctFactors(F, false)) {
        ExcCurve e;
        e.stage = s;
        e.factor = C;
        e.stageImage = detail::stageImageOf(F, C);
        if (e.stageImage.isZero()) continue;  // cancels out of both coordinates
        if (monoBefore) e.pulled = pullbackMonomial(C, before);
        Q2 img(Rational(e.stageImage.x), Rational(e.stageImage.y));
        for (size_t t = s + 1; t < w.stages.size(); ++t) img = generatorTropical(w.stages[t])(img);
        e.wordImage = clearDenominators(img);
        e.stagePoint = detail::contractedImage(F, C, e.stageImage, seed + s);
        e.contracted = e.stagePoint.has_value();
        if (e.contracted) {
          bool hit = false;
          e.wordPoint = pushPole(w, s + 1, *e.stagePoint, tol, hit);
          e.lowConfidence = hit;
        }
        d.exc.push_back(std::move(e));
      }
      detail::stageInd(g, s, d.ind);
      monoBefore = false;
    } else {
      before = g.matrix() * before;
    }
  }
  return d;
}

// ---- contraction order ------------------------------------------------------------

struct ContractionOrder {
  double slope = 0;       // d ||Log f|| / d(-log|P|)
  double value = 0;       // slope divided by the norm of the primitive image ray
  Rational rounded;       // nearest small-denominator rational
  double error = 0;
  bool stable = false;    // two arcs within 2%
};

namespace detail {

struct Fit {
  double slope, stderr_;
};
inline Fit fitLine(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  double b = (n * sxy - sx * sy) / den, a = (sy - b * sx) / n;
  double ss = 0;
  for (size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - a - b * x[i], 2);
  double se = n > 2 ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0;
  return {b, se};
}

inline Rational roundSmall(double v, int maxDen = 12) {
  Rational best = Rational(Integer(std::llround(v)));
  double err = std::abs(v - std::llround(v));
  for (int d = 2; d <= maxDen; ++d) {
    long n = std::lround(v * d);
    if (std::abs(v - double(n) / d) < err - 1e-12) {
      err = std::abs(v - double(n) / d);
      best = Rational(n, d);
    }
  }
  return best;
}

}  // namespace detail

// Regression of ||Log f(p)|| against -log|P_C(p)| along generic arcs p0 + eps*dir, p0 on {P_C = 0}.
inline ContractionOrder estimateContractionOrder(const ToricMapWord& w, const ExcCurve& e, uint64_t seed = 3,
                                                 unsigned digits = 50) {
  PrecisionScope scope(digits);
  ToricMapWord sub;
  Laurent P = e.pulled ? *e.pulled : e.factor;
  if (e.pulled) {
    sub = w;
  } else {
    sub.stages.assign(w.stages.begin() + long(e.stage), w.stages.end());
  }
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  std::mt19937_64 rng(seed);
  std::vector<detail::Fit> fits;
  for (int arc = 0; arc < 2; ++arc) {
    auto p0 = detail::pointOnCurve(P, rng);
    std::uniform_real_distribution<double> U(0, 6.283185307179586);
    std::array<CR, 2> dir = {polar(Real(1), Real(U(rng))), polar(Real(1), Real(U(rng)))};
    std::vector<double> xs, ys;
    for (int k = 0; k < 10; ++k) {
      Real eps = boost::multiprecision::pow(Real(10), -(3 + k));
      std::array<CR, 2> p = {p0[0] + CR(eps) * dir[0], p0[1] + CR(eps) * dir[1]};
      CR pv = P.eval(p[0], p[1], conv);
      auto y = evalWordIn(sub, p, conv);
      double l1 = boost::multiprecision::log(abs(y[0])).convert_to<double>();
      double l2 = boost::multiprecision::log(abs(y[1])).convert_to<double>();
      xs.push_back(-boost::multiprecision::log(abs(pv)).convert_to<double>());
      ys.push_back(std::hypot(l1, l2));
    }
    fits.push_back(detail::fitLine(xs, ys));
  }
  ContractionOrder r;
  r.slope = (fits[0].slope + fits[1].slope) / 2;
  V2 prim = primitive(e.wordImage).v;
  double norm = std::hypot(toDouble(prim.x), toDouble(prim.y));
  r.value = r.slope / norm;
  r.error = (std::abs(fits[0].slope - fits[1].slope) / 2 + std::max(fits[0].stderr_, fits[1].stderr_)) / norm;
  r.stable = std::abs(fits[0].slope - fits[1].slope) <= 0.02 * std::max(std::abs(fits[0].slope), std::abs(fits[1].slope));
  r.rounded = detail::roundSmall(r.value);
  return r;
}

// ---- internal stability -------------------------------------------------------------

struct OrbitReport {
  size_t exc = 0;
  std::string status;     // clean, collision, inconclusive, not-contracted
  long iterate = -1;      // first iterate meeting an indeterminacy point
  size_t stage = 0;
  double closest = 1;     // smallest relative initial-form value seen along the orbit
  unsigned digits = 0;
  std::vector<V2> rays;   // pole rays visited
};

struct StabilityReport {
  std::vector<OrbitReport> orbits;
  size_t indCount = 0;
  bool stable = true;      // no suspected collision
  bool conclusive = true;  // every orbit settled
};

namespace detail {

struct OrbitRun {
  std::string status = "clean";
  long iterate = -1;
  size_t stage = 0;
  Real closest = 1;
  std::vector<PolePoint> pts;
};

inline OrbitRun runOrbit(const ToricMapWord& w, const ExcCurve& e, unsigned N, double tol, uint64_t seed) {
  OrbitRun r;
  Real t(tol);
  auto sp = contractedImage(w.stages[e.stage].factored(), e.factor, e.stageImage, seed + e.stage);
  if (!sp) {
    r.status = "not-contracted";
    return r;
  }
  PolePoint p = *sp;
  for (unsigned n = 0; n <= N; ++n) {
    size_t from = n == 0 ? e.stage + 1 : 0;
    for (size_t s = from; s < w.stages.size(); ++s) {
      PoleStep st = poleStep(w.stages[s], p, t);
      r.closest = std::min(r.closest, st.minRel);
      if (st.vanishing.size() >= 2 || (!st.vanishing.empty() && n > 0)) {
        // n counts completed applications of the word; the hit lies on f^(n-1)(C)'s image
        r.status = st.vanishing.size() >= 2 ? "collision" : "inconclusive";
        r.iterate = long(n);
        r.stage = s;
        return r;
      }
      p = st.out;
    }
    r.pts.push_back(p);
  }
  return r;
}

inline bool orbitsAgree(const OrbitRun& a, const OrbitRun& b) {
  if (a.status != b.status || a.iterate != b.iterate || a.pts.size() != b.pts.size()) return false;
  for (size_t i = 0; i < a.pts.size(); ++i) {
    if (!(a.pts[i].ray == b.pts[i].ray)) return false;
    CR d = a.pts[i].lam - b.pts[i].lam;
    reduceArg(d);
    if (abs(d) > Real(1e-8) * (1 + abs(a.pts[i].lam))) return false;
  }
  return true;
}

}  // namespace detail

// Follows f^n(C) for every contracted curve C along the poles and watches for indeterminacy points,
// doubling the precision until two runs agree.
inline StabilityReport checkInternalStability(const ToricMapWord& w, unsigned N = 50, double tol = 1e-8,
                                              unsigned digits = 64, unsigned maxDigits = 1024, uint64_t seed = 5) {
  StabilityReport rep;
  ExcIndData d = excIndData(w, std::max(40u, digits / 2), seed);
  rep.indCount = d.ind.size();
  for (size_t i = 0; i < d.exc.size(); ++i) {
    OrbitReport o;
    o.exc = i;
    unsigned dg = digits;
    std::optional<detail::OrbitRun> prev;
    for (;;) {
      PrecisionScope scope(dg);
      detail::OrbitRun cur = detail::runOrbit(w, d.exc[i], N, tol, seed);
      if (cur.status == "not-contracted") {
        o.status = cur.status;
        break;
      }
      if (prev && detail::orbitsAgree(*prev, cur)) {
        o.status = cur.status;
        o.iterate = cur.iterate;
        o.stage = cur.stage;
        o.closest = cur.closest.convert_to<double>();
        for (auto& p : cur.pts) o.rays.push_back(p.ray);
        o.digits = dg;
        break;
      }
      if (dg >= maxDigits) {
        o.status = "inconclusive";
        o.digits = dg;
        break;
      }
      prev = std::move(cur);
      dg = std::min(2 * dg, maxDigits);
    }
    if (o.status == "collision") rep.stable = false;
    if (o.status == "inconclusive") rep.conclusive = false;
    rep.orbits.push_back(std::move(o));
  }
  return rep;
}

// ---- preimages ------------------------------------------------------------------------

namespace detail {

// Coset representatives of Z^2 / M Z^2 from the Hermite form of the column lattice.
inline std::vector<V2> cokernelReps(const IntMat2& M) {
  Integer s, t;
  Integer g = extGcd(M.a, M.b, s, t);
  Integer r = iabs(M.det() / g);
  std::vector<V2> out;
  for (Integer i = 0; i < g; ++i)
    for (Integer j = 0; j < r; ++j) out.emplace_back(i, j);
  return out;
}

inline std::vector<std::array<CR, 2>> monomialPreimages(const IntMat2& M, const std::array<CR, 2>& y) {
  std::vector<std::array<CR, 2>> out;
  CR l1 = logC(y[0]), l2 = logC(y[1]);
  Real twoPi = 2 * piR();
  IntMat2 A = M.adj();
  Real det(M.det());
  for (auto& k : cokernelReps(M)) {
    CR b1 = l1 + CR(Real(0), twoPi * Real(k.x)), b2 = l2 + CR(Real(0), twoPi * Real(k.y));
    CR x1 = (CR(Real(A.a)) * b1 + CR(Real(A.b)) * b2) / CR(det);
    CR x2 = (CR(Real(A.c)) * b1 + CR(Real(A.d)) * b2) / CR(det);
    out.push_back({expC(x1), expC(x2)});
  }
  return out;
}

inline Laurent productOf(const std::vector<Laurent>& l) {
  Laurent p(Rational(1));
  for (auto& f : l) p = p * f;
  return p;
}

// Solve N_i(x) = y_i D_i(x) by elimination; x must avoid the zeros of D_i.
inline std::vector<std::array<CR, 2>> birationalPreimages(const Factored& F, const std::array<CR, 2>& y) {
  std::array<BPoly, 2> P;
  std::array<Laurent, 2> D;
  for (int i = 0; i < 2; ++i) {
    Laurent N = productOf(F.num[i]);
    D[i] = productOf(F.den[i]);
    auto [n1, n2] = N.minExponent();
    auto [d1, d2] = D[i].minExponent();
    Exp2 sh = {-std::min(n1, d1), -std::min(n2, d2)};
    P[i] = toBPoly(N, CR(1), sh);
    for (auto& [e, c] : toBPoly(D[i], -y[i], sh)) P[i][e] += c;
  }
  auto cz = commonZerosInTorus(P[0], P[1]);
  if (cz.degenerate) throw DomainError("preimage elimination degenerate at this target");
  Real tol = boost::multiprecision::pow(Real(10), -int(Real::default_precision()) / 3);
  std::vector<std::array<CR, 2>> out;
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  for (auto& z : cz.zeros) {
    bool bad = false;
    for (int i = 0; i < 2; ++i) {
      Real sc = scaleB(toBPoly(D[i]), z.x[0], z.x[1]);
      if (abs(D[i].eval(z.x[0], z.x[1], conv)) <= tol * sc) bad = true;  // common zero of N_i and D_i
    }
    if (bad) continue;
    if (z.multiplicity > 1) throw DomainError("target is near the branch locus");
    out.push_back(z.x);
  }
  return out;
}

inline std::vector<std::array<CR, 2>> stagePreimages(const ToricGenerator& g, const std::array<CR, 2>& y) {
  if (g.isMonomial()) return monomialPreimages(g.matrix(), y);
  const Factored& F = g.factored();
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  if (F.involution) return {g.apply(y, conv)};
  if (F.inverse) return {ToricGenerator::birational(*F.inverse).apply(y, conv)};
  return birationalPreimages(F, y);
}

}  // namespace detail

struct PreimageResult {
  std::vector<PointC> points;
  double maxResidual = 0;  // max |f(q) - p| / |p|
  bool ok = false;
};

inline PreimageResult preimages(const ToricMapWord& w, const PointC& p, unsigned digits = 64) {
  PrecisionScope scope(digits);
  std::vector<PointC> cur = {{CR(Real(p[0].re), Real(p[0].im)), CR(Real(p[1].re), Real(p[1].im))}};
  for (size_t s = w.stages.size(); s-- > 0;) {
    std::vector<PointC> next;
    for (auto& y : cur) {
      try {
        for (auto& x : detail::stagePreimages(w.stages[s], y)) next.push_back(x);
      } catch (const detail::FactorVanishes&) {
        throw DomainError("target is on the exceptional locus of a stage");
      }
    }
    cur = std::move(next);
  }
  PreimageResult r;
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  Real worst = 0, pn = abs(cur.empty() ? CR(1) : p[0]) + abs(p[1]);
  for (auto& q : cur) {
    auto fq = evalWordIn(w, q, conv);
    worst = std::max(worst, (abs(fq[0] - p[0]) + abs(fq[1] - p[1])) / pn);
  }
  r.maxResidual = worst.convert_to<double>();
  r.points = std::move(cur);
  r.ok = r.maxResidual < 10 * std::pow(10.0, -double(digits) / 2);
  return r;
}

// dtop from the declarations, cross-checked by counting preimages of random targets.
inline Integer checkedTopologicalDegree(const ToricMapWord& w, uint64_t seed = 17, int targets = 3, unsigned digits = 64) {
  Integer d = topologicalDegree(w);
  std::mt19937_64 rng(seed);
  int done = 0;
  for (int attempt = 0; done < targets && attempt < 10 * targets; ++attempt) {
    PrecisionScope scope(digits);
    PointC p = {CR(Real(randomRational(rng, -3, 3)), Real(randomRational(rng, -3, 3))),
                CR(Real(randomRational(rng, -3, 3)), Real(randomRational(rng, -3, 3)))};
    if (p[0].isZero() || p[1].isZero()) continue;
    PreimageResult r;
    try {
      r = preimages(w, p, digits);
    } catch (const DomainError&) {
      continue;  // non-generic target
    }
    if (!r.ok || Integer(r.points.size()) != d)
      throw StructuralError("declared topological degree " + d.str() + " but found " + std::to_string(r.points.size()) +
                            " preimages");
    ++done;
  }
  return d;
}

}  // namespace toritrop
