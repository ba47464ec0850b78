#pragma once
// Prime-field arithmetic and dense univariate polynomials over it.

#include "numeric.hpp"

#include <algorithm>
#include <vector>

namespace toritrop {

template <uint64_t P>
struct Zp {
  uint64_t v = 0;
  static constexpr uint64_t modulus = P;
  static constexpr bool mersenne61 = (P == (uint64_t(1) << 61) - 1);
  static constexpr bool mersenne31 = (P == (uint64_t(1) << 31) - 1);
  static_assert(P < (uint64_t(1) << 32) || mersenne61, "unsupported modulus");

  Zp() = default;
  Zp(long long x) {
    long long r = x % (long long)P;
    v = uint64_t(r < 0 ? r + (long long)P : r);
  }
  static Zp raw(uint64_t x) {
    Zp z;
    z.v = x;
    return z;
  }
  static Zp fromInteger(const Integer& z) {
    Integer r = z % Integer(P);
    if (r < 0) r += P;
    return raw(r.convert_to<uint64_t>());
  }
  static Zp fromRational(const Rational& q) {
    Zp d = fromInteger(denom(q));
    if (d.v == 0) throw DomainError("denominator vanishes modulo p");
    return fromInteger(numer(q)) / d;
  }

  static uint64_t mul(uint64_t a, uint64_t b) {
    if constexpr (mersenne61) {
      unsigned __int128 t = (unsigned __int128)a * b;
      uint64_t lo = uint64_t(t & P), hi = uint64_t(t >> 61);
      uint64_t s = lo + hi;
      return s >= P ? s - P : s;
    } else if constexpr (mersenne31) {
      uint64_t t = a * b;
      t = (t & P) + (t >> 31);
      t = (t & P) + (t >> 31);
      return t >= P ? t - P : t;
    } else {
      return (a * b) % P;
    }
  }
  friend Zp operator+(Zp a, Zp b) {
    uint64_t s = a.v + b.v;
    return raw(s >= P ? s - P : s);
  }
  friend Zp operator-(Zp a, Zp b) { return raw(a.v >= b.v ? a.v - b.v : a.v + P - b.v); }
  friend Zp operator-(Zp a) { return raw(a.v ? P - a.v : 0); }
  friend Zp operator*(Zp a, Zp b) { return raw(mul(a.v, b.v)); }
  Zp& operator+=(Zp b) { return *this = *this + b; }
  Zp& operator-=(Zp b) { return *this = *this - b; }
  Zp& operator*=(Zp b) { return *this = *this * b; }
  Zp pow(uint64_t e) const {
    Zp r = raw(1), b = *this;
    while (e) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }
  Zp inv() const {
    if (v == 0) throw DomainError("division by zero modulo p");
    return pow(P - 2);
  }
  friend Zp operator/(Zp a, Zp b) { return a * b.inv(); }
  Zp& operator/=(Zp b) { return *this = *this / b; }
  friend bool operator==(Zp a, Zp b) { return a.v == b.v; }
  friend bool operator!=(Zp a, Zp b) { return a.v != b.v; }
  bool isZero() const { return v == 0; }
};

constexpr uint64_t kNttPrime = 998244353;
constexpr uint64_t kMersenne61 = (uint64_t(1) << 61) - 1;
using Fn = Zp<kNttPrime>;
using Fm = Zp<kMersenne61>;
using F31 = Zp<(uint64_t(1) << 31) - 1>;

// ---- dense univariate polynomials, low degree first ----------------------------

template <class F>
using PolyP = std::vector<F>;

template <class F>
void trim(PolyP<F>& a) {
  while (!a.empty() && a.back().isZero()) a.pop_back();
}
template <class F>
long deg(const PolyP<F>& a) {
  return long(a.size()) - 1;  // -1 for the zero polynomial (after trim)
}

inline void ntt(std::vector<Fn>& a, bool invert) {
  size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    Fn w = Fn(3).pow((kNttPrime - 1) / len);
    if (invert) w = w.inv();
    for (size_t i = 0; i < n; i += len) {
      Fn wn = Fn::raw(1);
      for (size_t j = 0; j < len / 2; ++j) {
        Fn u = a[i + j], v = a[i + j + len / 2] * wn;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        wn *= w;
      }
    }
  }
  if (invert) {
    Fn ni = Fn((long long)n).inv();
    for (auto& x : a) x *= ni;
  }
}

template <class F>
PolyP<F> mul(const PolyP<F>& a, const PolyP<F>& b) {
  if (a.empty() || b.empty()) return {};
  size_t need = a.size() + b.size() - 1;
  if constexpr (std::is_same_v<F, Fn>) {
    if (std::min(a.size(), b.size()) > 48) {
      size_t n = 1;
      while (n < need) n <<= 1;
      std::vector<Fn> fa(a.begin(), a.end()), fb(b.begin(), b.end());
      fa.resize(n);
      fb.resize(n);
      ntt(fa, false);
      ntt(fb, false);
      for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
      ntt(fa, true);
      fa.resize(need);
      trim(fa);
      return fa;
    }
  }
  PolyP<F> r(need);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].isZero()) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  trim(r);
  return r;
}

template <class F>
PolyP<F> add(const PolyP<F>& a, const PolyP<F>& b) {
  PolyP<F> r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  trim(r);
  return r;
}
template <class F>
PolyP<F> sub(const PolyP<F>& a, const PolyP<F>& b) {
  PolyP<F> r(std::max(a.size(), b.size()));
  for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  trim(r);
  return r;
}
template <class F>
PolyP<F> scale(PolyP<F> a, F c) {
  for (auto& x : a) x *= c;
  trim(a);
  return a;
}
template <class F>
PolyP<F> powP(PolyP<F> b, unsigned long e) {
  PolyP<F> r = {F(1)};
  while (e) {
    if (e & 1) r = mul(r, b);
    e >>= 1;
    if (e) b = mul(b, b);
  }
  return r;
}

// a = q b + r; in place on a copy, classical O(deg a * deg b)
template <class F>
void divmod(PolyP<F> a, const PolyP<F>& b, PolyP<F>& q, PolyP<F>& r) {
  if (b.empty()) throw DomainError("polynomial division by zero");
  trim(a);
  long db = deg(b);
  if (deg(a) < db) {
    q.clear();
    r = a;
    return;
  }
  F inv = b.back().inv();
  q.assign(size_t(deg(a) - db + 1), F(0));
  for (long i = deg(a); i >= db; --i) {
    F c = a[size_t(i)] * inv;
    q[size_t(i - db)] = c;
    if (c.isZero()) continue;
    for (long j = 0; j <= db; ++j) a[size_t(i - db + j)] -= c * b[size_t(j)];
  }
  a.resize(size_t(db));
  trim(a);
  r = a;
}

template <class F>
PolyP<F> monic(PolyP<F> a) {
  trim(a);
  if (a.empty()) return a;
  return scale(a, a.back().inv());
}

// Monic gcd by the Euclidean remainder sequence; remainders are made monic so the
// inner loop is a single multiply-subtract.
template <class F>
PolyP<F> gcd(PolyP<F> a, PolyP<F> b) {
  a = monic(a);
  b = monic(b);
  if (a.size() < b.size()) std::swap(a, b);
  while (!b.empty()) {
    long db = deg(b);
    for (long i = deg(a); i >= db; --i) {
      F c = a[size_t(i)];
      if (c.isZero()) continue;
      for (long j = 0; j < db; ++j) a[size_t(i - db + j)] -= c * b[size_t(j)];
      a[size_t(i)] = F(0);
    }
    a.resize(size_t(db));
    a = monic(a);
    std::swap(a, b);
  }
  return a;
}

template <class F>
PolyP<F> exactDiv(const PolyP<F>& a, const PolyP<F>& b) {
  PolyP<F> q, r;
  divmod(a, b, q, r);
  if (!r.empty()) throw DomainError("inexact polynomial division");
  return q;
}

template <class F>
F evalP(const PolyP<F>& a, F x) {
  F s(0);
  for (size_t i = a.size(); i-- > 0;) s = s * x + a[i];
  return s;
}

// Newton interpolation through (xs[i], ys[i]) in the monomial basis. Divided differences
// use one batched inversion per column.
template <class F>
PolyP<F> interpolate(const std::vector<F>& xs, std::vector<F> ys) {
  size_t n = xs.size();
  std::vector<F> d(n), pre(n);
  for (size_t j = 1; j < n; ++j) {
    // invert xs[i] - xs[i-j] for i = j..n-1 with one field inversion
    size_t m = n - j;
    F acc(1);
    for (size_t k = 0; k < m; ++k) {
      d[k] = xs[k + j] - xs[k];
      pre[k] = acc;
      acc *= d[k];
    }
    F inv = acc.inv();
    for (size_t k = m; k-- > 0;) {
      F ik = inv * pre[k];
      inv *= d[k];
      d[k] = ik;
    }
    for (size_t i = n - 1; i >= j; --i) {
      ys[i] = (ys[i] - ys[i - 1]) * d[i - j];
      if (i == j) break;
    }
  }
  PolyP<F> p(n + 1);
  size_t len = 1;
  p[0] = ys[n - 1];
  for (size_t k = n - 1; k-- > 0;) {
    // p = p * (t - xs[k]) + ys[k], in place from the top
    p[len] = F(0);
    for (size_t i = len; i > 0; --i) p[i] = p[i - 1] - p[i] * xs[k];
    p[0] = ys[k] - p[0] * xs[k];
    ++len;
  }
  p.resize(len);
  trim(p);
  return p;
}

// Interpolation at the equally spaced nodes a + k*delta: one inversion per column and
// no dependency chain in the inner loops.
template <class F>
PolyP<F> interpolateSpaced(F a, F delta, std::vector<F> ys) {
  size_t n = ys.size();
  for (size_t j = 1; j < n; ++j) {
    F c = (F((long long)j) * delta).inv();
    for (size_t i = n - 1; i >= j; --i) {
      ys[i] = (ys[i] - ys[i - 1]) * c;
      if (i == j) break;
    }
  }
  PolyP<F> p(n + 1);
  size_t len = 1;
  p[0] = ys[n - 1];
  for (size_t k = n - 1; k-- > 0;) {
    F xk = a + F((long long)k) * delta;
    p[len] = F(0);
    for (size_t i = len; i > 0; --i) p[i] = p[i - 1] - p[i] * xk;
    p[0] = ys[k] - p[0] * xk;
    ++len;
  }
  p.resize(len);
  trim(p);
  return p;
}

struct RationalRecon {
  bool ok = false;
  long degNum = -1, degDen = -1;
};

// Find a/b with deg a <= bound, deg b < n - bound and a = b * m mod M, M of degree n.
template <class F>
RationalRecon rationalReconstruct(const PolyP<F>& M, const PolyP<F>& m, long bound, PolyP<F>* num = nullptr,
                                  PolyP<F>* den = nullptr) {
  PolyP<F> r0 = M, r1 = m, t0, t1 = {F(1)};
  trim(r1);
  while (!r1.empty() && deg(r1) > bound) {
    PolyP<F> q, r;
    divmod(r0, r1, q, r);
    PolyP<F> t = sub(t0, mul(q, t1));
    r0.swap(r1);
    r1.swap(r);
    t0.swap(t1);
    t1.swap(t);
  }
  RationalRecon out;
  if (t1.empty()) return out;
  out.ok = deg(t1) < deg(M) - bound;
  out.degNum = deg(r1);
  out.degDen = deg(t1);
  if (num) *num = r1;
  if (den) *den = t1;
  return out;
}

}  // namespace toritrop
