#pragma once
// Bivariate integer polynomials (dehomogenized, Z = 1) with exact division and a
// heuristic gcd (evaluation at large integers + adic reconstruction, verified by division).

#include "numeric.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace toritrop {

struct Term2 {
  long i, j;  // x^i y^j
  Integer c;
};

class Poly2 {
 public:
  Poly2() = default;
  static Poly2 monomial(long i, long j, const Integer& c = 1) {
    Poly2 p;
    if (c != 0) p.t_.push_back({i, j, c});
    return p;
  }
  static Poly2 constant(const Integer& c) { return monomial(0, 0, c); }
  static Poly2 x() { return monomial(1, 0); }
  static Poly2 y() { return monomial(0, 1); }
  static Poly2 fromTerms(std::vector<Term2> t) {
    Poly2 p;
    p.t_ = std::move(t);
    p.normalize();
    return p;
  }

  const std::vector<Term2>& terms() const { return t_; }
  bool isZero() const { return t_.empty(); }
  size_t size() const { return t_.size(); }
  const Term2& lead() const { return t_.front(); }
  long totalDegree() const {
    long d = -1;
    for (auto& t : t_) d = std::max(d, t.i + t.j);
    return d;
  }
  long degX() const {
    long d = -1;
    for (auto& t : t_) d = std::max(d, t.i);
    return d;
  }
  long degY() const {
    long d = -1;
    for (auto& t : t_) d = std::max(d, t.j);
    return d;
  }
  Integer maxNorm() const {
    Integer m = 0;
    for (auto& t : t_) m = std::max(m, iabs(t.c));
    return m;
  }
  Integer content() const {
    Integer g = 0;
    for (auto& t : t_) {
      g = igcd(g, t.c);
      if (g == 1) break;
    }
    return g;
  }
  // content removed and leading coefficient positive
  Poly2 primitive() const {
    if (t_.empty()) return *this;
    Integer g = content();
    if (t_.front().c < 0) g = -g;
    Poly2 r = *this;
    for (auto& t : r.t_) t.c /= g;
    return r;
  }

  friend Poly2 operator+(const Poly2& a, const Poly2& b) { return merge(a, b, false); }
  friend Poly2 operator-(const Poly2& a, const Poly2& b) { return merge(a, b, true); }
  friend Poly2 operator-(const Poly2& a) {
    Poly2 r = a;
    for (auto& t : r.t_) t.c = -t.c;
    return r;
  }
  friend Poly2 operator*(const Poly2& a, const Poly2& b) {
    if (a.isZero() || b.isZero()) return {};
    long ax = a.degX(), bx = b.degX(), ay = a.degY(), by = b.degY();
    long W = ay + by + 1;
    std::vector<Integer> buf(size_t((ax + bx + 1) * W));
    std::vector<char> used(buf.size(), 0);
    for (auto& s : a.t_)
      for (auto& t : b.t_) {
        size_t k = size_t((s.i + t.i) * W + s.j + t.j);
        buf[k] += s.c * t.c;
        used[k] = 1;
      }
    Poly2 r;
    for (size_t k = buf.size(); k-- > 0;)
      if (used[k] && buf[k] != 0) r.t_.push_back({long(k) / W, long(k) % W, std::move(buf[k])});
    return r;
  }
  friend Poly2 operator*(const Integer& c, const Poly2& a) {
    if (c == 0) return {};
    Poly2 r = a;
    for (auto& t : r.t_) t.c *= c;
    return r;
  }
  friend bool operator==(const Poly2& a, const Poly2& b) {
    if (a.t_.size() != b.t_.size()) return false;
    for (size_t k = 0; k < a.t_.size(); ++k)
      if (a.t_[k].i != b.t_[k].i || a.t_[k].j != b.t_[k].j || a.t_[k].c != b.t_[k].c) return false;
    return true;
  }

  Poly2 pow(unsigned e) const {
    Poly2 r = constant(1), b = *this;
    while (e) {
      if (e & 1) r = r * b;
      e >>= 1;
      if (e) b = b * b;
    }
    return r;
  }

  Rational eval(const Rational& x, const Rational& y) const {
    Rational s = 0;
    for (auto& t : t_) s += Rational(t.c) * ipowQ(x, t.i) * ipowQ(y, t.j);
    return s;
  }
  // y -> xi, as a univariate polynomial in x (low degree first)
  std::vector<Integer> evalY(const Integer& xi) const {
    std::vector<Integer> u(size_t(std::max(0L, degX() + 1)));
    std::vector<Integer> pw(size_t(std::max(0L, degY() + 1)));
    if (!pw.empty()) pw[0] = 1;
    for (size_t k = 1; k < pw.size(); ++k) pw[k] = pw[k - 1] * xi;
    for (auto& t : t_) u[size_t(t.i)] += t.c * pw[size_t(t.j)];
    return u;
  }

  // Quotient if g divides *this exactly.
  std::optional<Poly2> divExact(const Poly2& g) const {
    if (g.isZero()) throw DomainError("division by the zero polynomial");
    Poly2 r = *this, q;
    const Term2& lg = g.lead();
    while (!r.isZero()) {
      const Term2& lr = r.lead();
      if (lr.i < lg.i || lr.j < lg.j) return std::nullopt;
      Integer qc, rem;
      divide_qr(lr.c, lg.c, qc, rem);
      if (rem != 0) return std::nullopt;
      Poly2 m = monomial(lr.i - lg.i, lr.j - lg.j, qc);
      q.t_.push_back(m.t_.front());
      r = r - m * g;
    }
    return q;
  }

  std::string str() const {
    if (t_.empty()) return "0";
    std::string s;
    for (size_t k = 0; k < t_.size(); ++k) {
      auto& t = t_[k];
      s += (k == 0 ? (t.c < 0 ? "-" : "") : (t.c < 0 ? " - " : " + "));
      Integer a = iabs(t.c);
      bool unit = a == 1 && (t.i || t.j);
      if (!unit) s += a.str();
      auto var = [&](const char* v, long e) {
        if (!e) return;
        if (!s.empty() && s.back() != ' ' && s.back() != '-') s += "*";
        s += v;
        if (e > 1) s += "^" + std::to_string(e);
      };
      var("x", t.i);
      var("y", t.j);
    }
    return s;
  }

 private:
  static Rational ipowQ(const Rational& x, long e) {
    Rational r = 1;
    for (long k = 0; k < e; ++k) r *= x;
    return r;
  }
  static bool before(const Term2& a, const Term2& b) { return a.i != b.i ? a.i > b.i : a.j > b.j; }
  void normalize() {
    std::sort(t_.begin(), t_.end(), before);
    std::vector<Term2> out;
    for (auto& t : t_) {
      if (!out.empty() && out.back().i == t.i && out.back().j == t.j) out.back().c += t.c;
      else out.push_back(t);
      if (out.back().c == 0) out.pop_back();
    }
    t_ = std::move(out);
  }
  static Poly2 merge(const Poly2& a, const Poly2& b, bool minus) {
    Poly2 r;
    size_t i = 0, j = 0;
    while (i < a.t_.size() || j < b.t_.size()) {
      if (j == b.t_.size() || (i < a.t_.size() && before(a.t_[i], b.t_[j]))) {
        r.t_.push_back(a.t_[i++]);
      } else if (i == a.t_.size() || before(b.t_[j], a.t_[i])) {
        r.t_.push_back(b.t_[j++]);
        if (minus) r.t_.back().c = -r.t_.back().c;
      } else {
        Integer c = minus ? Integer(a.t_[i].c - b.t_[j].c) : Integer(a.t_[i].c + b.t_[j].c);
        if (c != 0) r.t_.push_back({a.t_[i].i, a.t_[i].j, c});
        ++i;
        ++j;
      }
    }
    return r;
  }
  std::vector<Term2> t_;
};

namespace detail {

// Symmetric xi-adic digits of n: n = sum d_k xi^k with |d_k| <= xi/2.
inline std::vector<Integer> adicDigits(Integer n, const Integer& xi) {
  std::vector<Integer> d;
  Integer half = xi / 2;
  while (n != 0) {
    Integer r = n % xi;  // sign follows n
    if (r > half) r -= xi;
    if (r < -half) r += xi;
    d.push_back(r);
    n = (n - r) / xi;
  }
  return d;
}

inline Integer uniNorm(const std::vector<Integer>& a) {
  Integer m = 0;
  for (auto& c : a) m = std::max(m, iabs(c));
  return m;
}

inline Integer uniEval(const std::vector<Integer>& a, const Integer& x) {
  Integer s = 0;
  for (size_t k = a.size(); k-- > 0;) s = s * x + a[k];
  return s;
}

inline void uniTrim(std::vector<Integer>& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::vector<Integer> uniPrimitive(std::vector<Integer> a) {
  uniTrim(a);
  Integer g = 0;
  for (auto& c : a) g = igcd(g, c);
  if (g == 0) return a;
  if (a.back() < 0) g = -g;
  for (auto& c : a) c /= g;
  return a;
}

inline bool uniDivides(const std::vector<Integer>& g, std::vector<Integer> a) {
  uniTrim(a);
  if (g.empty()) return a.empty();
  long dg = long(g.size()) - 1;
  for (long i = long(a.size()) - 1; i >= dg; --i) {
    if (a[size_t(i)] == 0) continue;
    Integer q, r;
    divide_qr(a[size_t(i)], g.back(), q, r);
    if (r != 0) return false;
    for (long j = 0; j <= dg; ++j) a[size_t(i - dg + j)] -= q * g[size_t(j)];
  }
  for (auto& c : a)
    if (c != 0) return false;
  return true;
}

// gcd in Z[x] of two nonzero primitive polynomials.
inline std::vector<Integer> uniGcdHeu(const std::vector<Integer>& a, const std::vector<Integer>& b) {
  Integer xi = 2 * std::min(uniNorm(a), uniNorm(b)) + 29;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Integer g = igcd(uniEval(a, xi), uniEval(b, xi));
    auto G = uniPrimitive(adicDigits(g, xi));
    if (!G.empty() && uniDivides(G, a) && uniDivides(G, b)) return G;
    xi = xi * 73794 / 27011;  // grow by an irrational-looking factor
  }
  throw StructuralError("heuristic gcd did not converge");
}

}  // namespace detail

// gcd of nonzero polynomials in Z[x, y], primitive with positive leading coefficient.
inline Poly2 gcd(const Poly2& A0, const Poly2& B0) {
  if (A0.isZero()) return B0.primitive();
  if (B0.isZero()) return A0.primitive();
  Poly2 A = A0.primitive(), B = B0.primitive();
  if (A.size() == 1 || B.size() == 1) {
    // a monomial divisor: only the common power of x and y
    long i = LONG_MAX, j = LONG_MAX;
    for (auto* p : {&A, &B})
      for (auto& t : p->terms()) {
        i = std::min(i, t.i);
        j = std::min(j, t.j);
      }
    return Poly2::monomial(i, j);
  }
  Integer xi = 2 * std::min(A.maxNorm(), B.maxNorm()) + 29;
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto a = detail::uniPrimitive(A.evalY(xi)), b = detail::uniPrimitive(B.evalY(xi));
    // content of A(x, xi) is lost by the univariate primitive part; restore it through the y-content
    Integer ca = 0, cb = 0;
    for (auto& c : A.evalY(xi)) ca = igcd(ca, c);
    for (auto& c : B.evalY(xi)) cb = igcd(cb, c);
    auto gu = detail::uniGcdHeu(a, b);
    Integer gc = igcd(ca, cb);
    std::vector<Term2> terms;
    for (size_t i = 0; i < gu.size(); ++i) {
      auto digits = detail::adicDigits(gu[i] * gc, xi);
      for (size_t j = 0; j < digits.size(); ++j)
        if (digits[j] != 0) terms.push_back({long(i), long(j), digits[j]});
    }
    Poly2 G = Poly2::fromTerms(terms).primitive();
    if (!G.isZero() && A.divExact(G) && B.divExact(G)) return G;
    xi = xi * 73794 / 27011;
  }
  throw StructuralError("heuristic bivariate gcd did not converge");
}

}  // namespace toritrop
