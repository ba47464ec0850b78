#pragma once
// Homogeneous representation of iterates f^n on P^2 with common factors removed.

#include "poly2.hpp"
#include "toric_map.hpp"

namespace toritrop {

struct ProjectiveMap {
  std::array<Poly2, 3> comps;  // F_k(x, y, 1); homogenize to `degree` with Z
  long degree = 0;

  // [X : Y : Z] -> [F0 : F1 : F2], as a string in X, Y, Z
  std::string str() const;
  // affine value (F0/F2, F1/F2) at a rational point
  PointQ evalAffine(const PointQ& p) const {
    Rational d = comps[2].eval(p[0], p[1]);
    if (d == 0) throw DomainError("point maps to the line at infinity");
    return {comps[0].eval(p[0], p[1]) / d, comps[1].eval(p[0], p[1]) / d};
  }
};

inline std::string ProjectiveMap::str() const {
  std::string out = "[";
  for (int k = 0; k < 3; ++k) {
    std::string s;
    const auto& T = comps[size_t(k)].terms();
    for (size_t m = 0; m < T.size(); ++m) {
      auto& t = T[m];
      long z = degree - t.i - t.j;
      s += (m == 0 ? (t.c < 0 ? "-" : "") : (t.c < 0 ? " - " : " + "));
      Integer a = iabs(t.c);
      std::string mono;
      auto var = [&](const char* v, long e) {
        if (!e) return;
        if (!mono.empty()) mono += "*";
        mono += v;
        if (e > 1) mono += "^" + std::to_string(e);
      };
      var("X", t.i);
      var("Y", t.j);
      var("Z", z);
      if (a != 1 || mono.empty()) s += a.str() + (mono.empty() ? "" : "*");
      s += mono;
    }
    out += (k ? " : " : "") + (s.empty() ? std::string("0") : s);
  }
  return out + "]";
}

namespace detail {

// u_i = s_i * n_i / e_i with n_i, e_i primitive and coprime in Z[x, y].
struct ExactImage {
  std::array<Rational, 2> s{Rational(1), Rational(1)};
  std::array<Poly2, 2> n{Poly2::x(), Poly2::y()}, e{Poly2::constant(1), Poly2::constant(1)};
};

inline void reduceExact(Rational& s, Poly2& n, Poly2& e) {
  Integer cn = n.content(), ce = e.content();
  if (n.lead().c < 0) cn = -cn;
  if (e.lead().c < 0) ce = -ce;
  n = n.primitive();
  e = e.primitive();
  s *= Rational(cn, ce);
  Poly2 g = gcd(n, e);
  if (g.totalDegree() > 0) {
    n = *n.divExact(g);
    e = *e.divExact(g);
  }
}

inline void applyExact(const ToricGenerator& g, ExactImage& I, long termBudget) {
  std::array<Poly2, 4> base = {I.n[0], I.e[0], I.n[1], I.e[1]};
  std::map<std::pair<int, long>, Poly2> cache;
  auto pw = [&](int k, long e) -> const Poly2& {
    auto key = std::make_pair(k, e);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache[key] = base[size_t(k)].pow(unsigned(e));
  };
  auto check = [&](const Poly2& p) {
    if (long(p.size()) > termBudget) throw BudgetError("toProjective: polynomial size budget exceeded");
  };
  auto scalarPow = [](const Rational& s, long k) {
    Rational r = 1;
    for (long i = 0; i < std::abs(k); ++i) r *= s;
    return k >= 0 ? r : Rational(1) / r;
  };
  ExactImage out;
  for (int i = 0; i < 2; ++i) {
    Poly2 num = Poly2::constant(1), den = Poly2::constant(1);
    Rational s = 1;
    std::array<long, 4> ex{};
    if (g.isMonomial()) {
      const IntMat2& m = g.matrix();
      long a = (i == 0 ? m.a : m.c).convert_to<long>(), b = (i == 0 ? m.b : m.d).convert_to<long>();
      ex = {a, -a, b, -b};
      s = scalarPow(I.s[0], a) * scalarPow(I.s[1], b);
    } else {
      const Factored& F = g.factored();
      for (int sgn = 0; sgn < 2; ++sgn)
        for (auto& f : sgn == 0 ? F.num[size_t(i)] : F.den[size_t(i)]) {
          long pmin = LONG_MAX, pmax = LONG_MIN, qmin = LONG_MAX, qmax = LONG_MIN;
          for (auto& [e, c] : f.terms()) {
            pmin = std::min(pmin, e.first);
            pmax = std::max(pmax, e.first);
            qmin = std::min(qmin, e.second);
            qmax = std::max(qmax, e.second);
          }
          // f(u) = sum c s1^p s2^q n1^p e1^-p n2^q e2^-q; clear to a primitive integer polynomial
          std::vector<Rational> coef;
          Integer L = 1;
          for (auto& [e, c] : f.terms()) {
            coef.push_back(c * scalarPow(I.s[0], e.first) * scalarPow(I.s[1], e.second));
            L = boost::multiprecision::lcm(L, denom(coef.back()));
          }
          Poly2 P;
          size_t k = 0;
          for (auto& [e, c] : f.terms()) {
            Poly2 t = numer(coef[k] * L) * pw(0, e.first - pmin);
            t = t * pw(1, pmax - e.first);
            t = t * pw(2, e.second - qmin);
            t = t * pw(3, qmax - e.second);
            P = P + t;
            ++k;
          }
          if (P.isZero()) throw StructuralError("toProjective: a factor vanishes identically on the image");
          Rational scal = Rational(1, L);
          long sg = sgn == 0 ? 1 : -1;
          if (sgn == 0) {
            num = num * P;
            s *= scal;
          } else {
            den = den * P;
            s /= scal;
          }
          check(num);
          check(den);
          ex[0] += sg * pmin;
          ex[1] -= sg * pmax;
          ex[2] += sg * qmin;
          ex[3] -= sg * qmax;
        }
    }
    for (int k = 0; k < 4; ++k) {
      if (ex[size_t(k)] > 0) num = num * pw(k, ex[size_t(k)]);
      if (ex[size_t(k)] < 0) den = den * pw(k, -ex[size_t(k)]);
    }
    check(num);
    check(den);
    reduceExact(s, num, den);
    out.s[size_t(i)] = s;
    out.n[size_t(i)] = num;
    out.e[size_t(i)] = den;
  }
  I = out;
}

inline ProjectiveMap toProjectiveImage(const ExactImage& I) {
  // [s1 n1 e2 : s2 n2 e1 : e1 e2] / gcd(e1, e2)
  Poly2 g = gcd(I.e[0], I.e[1]);
  Poly2 e1 = *I.e[0].divExact(g), e2 = *I.e[1].divExact(g);
  Integer L = boost::multiprecision::lcm(denom(I.s[0]), denom(I.s[1]));
  ProjectiveMap P;
  P.comps[0] = numer(I.s[0] * L) * (I.n[0] * e2);
  P.comps[1] = numer(I.s[1] * L) * (I.n[1] * e1);
  P.comps[2] = L * (e1 * I.e[1]);
  Integer c = 0;
  for (auto& q : P.comps) c = igcd(c, q.content());
  if (P.comps[2].lead().c < 0) c = -c;
  for (auto& q : P.comps) {
    std::vector<Term2> t = q.terms();
    for (auto& x : t) x.c /= c;
    q = Poly2::fromTerms(t);
  }
  P.degree = 0;
  for (auto& q : P.comps) P.degree = std::max(P.degree, q.totalDegree());
  return P;
}

}  // namespace detail

struct ProjectiveResult {
  ProjectiveMap map;
  unsigned achieved = 0;  // largest n for which map = f^n was completed
  bool complete = true;
};

// f^n with common factors removed. Stops with the last completed iterate if the a priori
// degree bound deg(f) * deg(f^(k-1)) or the term budget is exceeded.
inline ProjectiveResult toProjective(const ToricMapWord& w, unsigned n, long degreeBudget = 4000,
                                     long termBudget = 200000) {
  if (n < 1) throw DomainError("toProjective needs n >= 1");
  ProjectiveResult res;
  detail::ExactImage I;
  long d1 = 0;
  for (unsigned k = 1; k <= n; ++k) {
    if (k > 1 && d1 * res.map.degree > degreeBudget) {
      res.complete = false;
      return res;
    }
    detail::ExactImage next = I;
    try {
      for (auto& g : w.stages) detail::applyExact(g, next, termBudget);
    } catch (const BudgetError&) {
      res.complete = false;
      return res;
    }
    I = next;
    res.map = detail::toProjectiveImage(I);
    res.achieved = k;
    if (k == 1) d1 = res.map.degree;
  }
  return res;
}

}  // namespace toritrop
