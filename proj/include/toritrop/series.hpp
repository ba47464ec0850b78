#pragma once
// Truncated Laurent series in one variable s with relative-precision tracking,
// used to read off s-adic valuations of toric maps along monomial curves.

#include "modp.hpp"

#include <climits>

namespace toritrop {

struct PrecisionLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A factor vanished identically along the probe curve.
struct IdenticallyZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class K> inline bool fieldIsZero(const K& k) { return k == K(0); }
template <uint64_t P> inline bool fieldIsZero(const Zp<P>& k) { return k.isZero(); }

template <class K>
class Series {
 public:
  static constexpr long kExact = LONG_MAX;

  Series() = default;
  // c s^v, exact
  Series(const K& c, long v) : val_(v), abs_(kExact) {
    if (fieldIsZero(c)) throw IdenticallyZero("zero monomial in a series");
    c_ = {c};
  }
  explicit Series(long c) : Series(K(c), 0) {}

  long valuation() const { return val_; }
  const K& lead() const { return c_[0]; }
  bool exact() const { return abs_ == kExact; }
  long relPrec() const { return exact() ? kExact : abs_ - val_; }
  const std::vector<K>& coeffs() const { return c_; }

  // relative precision used when an exact non-monomial series has to be inverted
  static long& workingPrecision() {
    static thread_local long r = 1;
    return r;
  }

  friend Series operator+(const Series& a, const Series& b) { return combine(a, b, false); }
  friend Series operator-(const Series& a, const Series& b) { return combine(a, b, true); }
  friend Series operator-(const Series& a) {
    Series r = a;
    for (auto& x : r.c_) x = K(0) - x;
    return r;
  }
  friend Series operator*(const Series& a, const Series& b) {
    Series r;
    r.val_ = a.val_ + b.val_;
    long ra = a.relPrec(), rb = b.relPrec();
    long rel = std::min(ra, rb);
    size_t n = rel == kExact ? a.c_.size() + b.c_.size() - 1 : size_t(rel);
    r.c_.assign(n, K(0));
    for (size_t i = 0; i < a.c_.size() && i < n; ++i)
      for (size_t j = 0; j < b.c_.size() && i + j < n; ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    r.abs_ = rel == kExact ? kExact : r.val_ + rel;
    r.normalize();
    return r;
  }
  friend Series operator/(const Series& a, const Series& b) { return a * b.inverse(); }

  Series inverse() const {
    Series r;
    r.val_ = -val_;
    if (exact() && c_.size() == 1) {
      r.c_ = {K(1) / c_[0]};
      r.abs_ = kExact;
      return r;
    }
    long rel = exact() ? workingPrecision() : relPrec();
    r.c_.assign(size_t(rel), K(0));
    K inv0 = K(1) / c_[0];
    r.c_[0] = inv0;
    for (long k = 1; k < rel; ++k) {
      K s(0);
      for (long j = 1; j <= k && j < long(c_.size()); ++j) s += c_[size_t(j)] * r.c_[size_t(k - j)];
      r.c_[size_t(k)] = K(0) - s * inv0;
    }
    r.abs_ = r.val_ + rel;
    return r;
  }

 private:
  static Series combine(const Series& a, const Series& b, bool minus) {
    Series r;
    long v = std::min(a.val_, b.val_);
    long abs = std::min(a.abs_, b.abs_);
    long top = v;
    top = std::max(a.val_ + long(a.c_.size()), b.val_ + long(b.c_.size()));
    if (abs != kExact) top = std::min(top, abs);
    std::vector<K> c(size_t(std::max(0L, top - v)), K(0));
    for (size_t i = 0; i < a.c_.size(); ++i) {
      long e = a.val_ + long(i);
      if (e < top) c[size_t(e - v)] += a.c_[i];
    }
    for (size_t i = 0; i < b.c_.size(); ++i) {
      long e = b.val_ + long(i);
      if (e < top) c[size_t(e - v)] = minus ? c[size_t(e - v)] - b.c_[i] : c[size_t(e - v)] + b.c_[i];
    }
    r.val_ = v;
    r.c_ = std::move(c);
    r.abs_ = abs;
    r.normalize();
    return r;
  }
  void normalize() {
    size_t k = 0;
    while (k < c_.size() && fieldIsZero(c_[k])) ++k;
    if (k == c_.size()) {
      if (exact()) throw IdenticallyZero("series cancelled identically");
      throw PrecisionLoss("leading terms cancelled beyond the known precision");
    }
    val_ += long(k);
    c_.erase(c_.begin(), c_.begin() + long(k));
    if (exact())
      while (!c_.empty() && fieldIsZero(c_.back())) c_.pop_back();
  }
  long val_ = 0;
  long abs_ = kExact;  // absolute order O(s^abs_) of the first unknown term
  std::vector<K> c_;
};

}  // namespace toritrop
