#pragma once
// Laurent polynomials in two variables with rational coefficients.

#include "support.hpp"

#include <map>
#include <sstream>

namespace toritrop {

using Exp2 = std::pair<long, long>;

class Laurent {
 public:
  Laurent() = default;
  Laurent(const Rational& c) {
    if (c != 0) t_[{0, 0}] = c;
  }
  static Laurent monomial(long a, long b, const Rational& c = 1) {
    Laurent p;
    if (c != 0) p.t_[{a, b}] = c;
    return p;
  }
  static Laurent x1() { return monomial(1, 0); }
  static Laurent x2() { return monomial(0, 1); }

  const std::map<Exp2, Rational>& terms() const { return t_; }
  bool isZero() const { return t_.empty(); }
  bool isMonomial() const { return t_.size() == 1; }
  size_t size() const { return t_.size(); }

  std::vector<V2> support() const {
    std::vector<V2> s;
    for (auto& [e, c] : t_) s.emplace_back(e.first, e.second);
    return s;
  }
  // total degree span, used for budgets
  long degreeSpan() const {
    if (t_.empty()) return 0;
    long lo = LONG_MAX, hi = LONG_MIN;
    for (auto& [e, c] : t_) {
      lo = std::min({lo, e.first, e.second, e.first + e.second});
      hi = std::max({hi, e.first, e.second, e.first + e.second});
    }
    return hi - lo;
  }

  Laurent& operator+=(const Laurent& q) {
    for (auto& [e, c] : q.t_) add(e, c);
    return *this;
  }
  Laurent& operator-=(const Laurent& q) {
    for (auto& [e, c] : q.t_) add(e, -c);
    return *this;
  }
  friend Laurent operator+(Laurent p, const Laurent& q) { return p += q; }
  friend Laurent operator-(Laurent p, const Laurent& q) { return p -= q; }
  friend Laurent operator-(const Laurent& p) { return Laurent() - p; }
  friend Laurent operator*(const Laurent& p, const Laurent& q) {
    Laurent r;
    for (auto& [e, c] : p.t_)
      for (auto& [f, d] : q.t_) r.add({e.first + f.first, e.second + f.second}, c * d);
    return r;
  }
  friend bool operator==(const Laurent& p, const Laurent& q) { return p.t_ == q.t_; }

  Laurent pow(unsigned k) const {
    Laurent r(Rational(1)), b = *this;
    while (k) {
      if (k & 1) r = r * b;
      b = b * b;
      k >>= 1;
    }
    return r;
  }
  // x_j d/dx_j
  Laurent eulerDerivative(int j) const {
    Laurent r;
    for (auto& [e, c] : t_) {
      long k = j == 0 ? e.first : e.second;
      if (k != 0) r.add(e, c * k);
    }
    return r;
  }
  // multiply by x^(a,b)
  Laurent shifted(long a, long b) const {
    Laurent r;
    for (auto& [e, c] : t_) r.t_[{e.first + a, e.second + b}] = c;
    return r;
  }
  Exp2 minExponent() const {
    long a = LONG_MAX, b = LONG_MAX;
    for (auto& [e, c] : t_) {
      a = std::min(a, e.first);
      b = std::min(b, e.second);
    }
    return {a, b};
  }

  // Generic evaluation; conv maps a Rational coefficient into the ring of x1, x2.
  template <class R, class Conv>
  R eval(const R& x1, const R& x2, Conv conv) const {
    // no zero seed: some rings (series) cannot represent an exact zero
    if (t_.empty()) return conv(Rational(0));
    std::optional<R> s;
    for (auto& [e, c] : t_) {
      R term = conv(c) * ipow(x1, e.first) * ipow(x2, e.second);
      s = s ? *s + term : term;
    }
    return *s;
  }
  CplxL evalC(const CplxL& x1, const CplxL& x2) const {
    return eval(x1, x2, [](const Rational& q) { return CplxL(toLong(q), 0); });
  }
  Rational evalQ(const Rational& x1, const Rational& x2) const {
    return eval(x1, x2, [](const Rational& q) { return q; });
  }

  // Initial form along the weight w: terms minimizing <e, w>.
  Laurent initialForm(const V2& w) const {
    Laurent r;
    Integer best;
    bool first = true;
    for (auto& [e, c] : t_) {
      Integer v = Integer(e.first) * w.x + Integer(e.second) * w.y;
      if (first || v < best) {
        best = v;
        first = false;
      }
    }
    for (auto& [e, c] : t_)
      if (Integer(e.first) * w.x + Integer(e.second) * w.y == best) r.t_[e] = c;
    return r;
  }

  std::string str() const {
    if (t_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, c] : t_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << toString(c) << ")";
      if (e.first) os << "*x1^" << e.first;
      if (e.second) os << "*x2^" << e.second;
    }
    return os.str();
  }

  template <class R>
  static R ipow(const R& x, long k) {
    if (k == 0) return R(1);
    R b = k > 0 ? x : R(1) / x;
    unsigned long n = k > 0 ? (unsigned long)k : (unsigned long)(-k);
    R r(1);
    while (n) {
      if (n & 1) r = r * b;
      b = b * b;
      n >>= 1;
    }
    return r;
  }

 private:
  void add(const Exp2& e, const Rational& c) {
    auto it = t_.find(e);
    if (it == t_.end()) {
      if (c != 0) t_.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == 0) t_.erase(it);
    }
  }
  std::map<Exp2, Rational> t_;
};

}  // namespace toritrop
