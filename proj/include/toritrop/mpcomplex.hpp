#pragma once
// Minimal complex arithmetic over MPFR reals (no MPC in this environment).

#include "numeric.hpp"

namespace toritrop {

struct CR {
  Real re, im;
  CR() : re(0), im(0) {}
  CR(long x) : re(x), im(0) {}
  CR(Real a, Real b = Real(0)) : re(std::move(a)), im(std::move(b)) {}
  explicit CR(const CplxL& z) : re(z.real()), im(z.imag()) {}
  static CR fromRational(const Rational& q) { return CR(Real(numer(q)) / Real(denom(q))); }

  friend CR operator+(const CR& a, const CR& b) { return {a.re + b.re, a.im + b.im}; }
  friend CR operator-(const CR& a, const CR& b) { return {a.re - b.re, a.im - b.im}; }
  friend CR operator-(const CR& a) { return {-a.re, -a.im}; }
  friend CR operator*(const CR& a, const CR& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
  friend CR operator/(const CR& a, const CR& b) {
    Real n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  CR& operator+=(const CR& b) { return *this = *this + b; }
  CR& operator-=(const CR& b) { return *this = *this - b; }
  CR& operator*=(const CR& b) { return *this = *this * b; }
  CR& operator/=(const CR& b) { return *this = *this / b; }
  bool isZero() const { return re == 0 && im == 0; }
  CplxL toL() const { return {re.convert_to<long double>(), im.convert_to<long double>()}; }
};

inline Real norm(const CR& z) { return z.re * z.re + z.im * z.im; }
inline Real abs(const CR& z) { return boost::multiprecision::sqrt(norm(z)); }
inline CR conj(const CR& z) { return {z.re, -z.im}; }
inline CR polar(const Real& r, const Real& t) { return {r * boost::multiprecision::cos(t), r * boost::multiprecision::sin(t)}; }

// Working precision in decimal digits for a scope.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits) : saved_(Real::default_precision()) {
    Real::default_precision(digits);
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

}  // namespace toritrop

namespace toritrop {

inline CR expC(const CR& z) {
  Real r = boost::multiprecision::exp(z.re);
  return {r * boost::multiprecision::cos(z.im), r * boost::multiprecision::sin(z.im)};
}
// principal branch
inline CR logC(const CR& z) {
  return {boost::multiprecision::log(abs(z)), boost::multiprecision::atan2(z.im, z.re)};
}
inline Real piR() { return boost::multiprecision::acos(Real(-1)); }

}  // namespace toritrop
