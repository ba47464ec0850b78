#pragma once
// Exact and multiprecision scalar types shared by every module.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace toritrop {

// expression templates off: values behave like plain arithmetic types under auto/min/max
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;
using Cplx = std::complex<double>;
using CplxL = std::complex<long double>;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
// Input is well formed but violates a mathematical hypothesis (e.g. not toric).
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Rational makeQ(const Integer& n, const Integer& d = 1) { return Rational(n, d); }

inline Integer numer(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denom(const Rational& q) { return boost::multiprecision::denominator(q); }

inline Integer iabs(const Integer& a) { return a < 0 ? Integer(-a) : a; }

inline Integer igcd(const Integer& a, const Integer& b) {
  return boost::multiprecision::gcd(iabs(a), iabs(b));
}

// floor(a/b) for b != 0
inline Integer floorDiv(const Integer& a, const Integer& b) {
  Integer q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}
inline Integer ceilDiv(const Integer& a, const Integer& b) { return -floorDiv(-a, b); }

// Extended gcd: returns g and sets x, y with a*x + b*y = g >= 0.
inline Integer extGcd(const Integer& a, const Integer& b, Integer& x, Integer& y) {
  Integer r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    Integer q = floorDiv(r0, r1);
    Integer tmp = r0 - q * r1; r0 = r1; r1 = tmp;
    tmp = s0 - q * s1; s0 = s1; s1 = tmp;
    tmp = t0 - q * t1; t0 = t1; t1 = tmp;
  }
  if (r0 < 0) { r0 = -r0; s0 = -s0; t0 = -t0; }
  x = s0; y = t0;
  return r0;
}

inline std::string toString(const Rational& q) {
  if (denom(q) == 1) return numer(q).str();
  return numer(q).str() + "/" + denom(q).str();
}

inline Rational parseRational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      auto dot = s.find('.');
      if (dot == std::string::npos) return Rational(Integer(s));
      // decimal literal, read exactly
      std::string digits = s.substr(0, dot) + s.substr(dot + 1);
      Integer den = 1;
      for (size_t i = dot + 1; i < s.size(); ++i) den *= 10;
      return Rational(Integer(digits), den);
    }
    return Rational(Integer(s.substr(0, slash)), Integer(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw DomainError("cannot parse rational '" + s + "'");
  }
}

inline double toDouble(const Rational& q) { return q.convert_to<double>(); }
inline double toDouble(const Integer& z) { return z.convert_to<double>(); }
inline long double toLong(const Integer& z) { return z.convert_to<long double>(); }
inline long double toLong(const Rational& q) {
  return numer(q).convert_to<long double>() / denom(q).convert_to<long double>();
}

// Uniform random rational in [lo, hi] with denominator up to maxDen; used for generic probes.
inline Rational randomRational(std::mt19937_64& rng, long lo, long hi, long maxDen = 97) {
  std::uniform_int_distribution<long> dn(1, maxDen);
  long d = dn(rng);
  std::uniform_int_distribution<long> nn(lo * d, hi * d);
  return Rational(nn(rng), d);
}

}  // namespace toritrop
