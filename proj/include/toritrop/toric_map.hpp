#pragma once
// Toric rational maps given as words of generators: monomial maps and factored
// birational maps. Evaluation in any ring, toricity checks, tropicalization by
// valuation probing and degree growth.

#include "laurent.hpp"
#include "mpcomplex.hpp"
#include "plmap.hpp"
#include "series.hpp"

#include <memory>

namespace toritrop {

// A denominator or numerator vanished at some stage of a word.
struct ExceptionalHit : DomainError {
  size_t stage;
  ExceptionalHit(size_t s, const std::string& what)
      : DomainError("hit exceptional/indeterminate locus at stage " + std::to_string(s) + ": " + what), stage(s) {}
};

namespace detail {
struct FactorVanishes {
  std::string factor;
};
}  // namespace detail

// Per-coordinate factor lists; coordinate i of the map is prod(num[i]) / prod(den[i]).
struct Factored {
  std::array<std::vector<Laurent>, 2> num, den;
  Integer rho = 1, dtop = 1;
  bool involution = false;
  std::shared_ptr<const Factored> inverse;  // optional explicit inverse (birational case)
};

inline bool ringZero(const Rational& q) { return q == 0; }
template <uint64_t P> inline bool ringZero(const Zp<P>& z) { return z.isZero(); }
inline bool ringZero(const CplxL& z) { return z == CplxL(0); }
inline bool ringZero(const CR& z) { return z.isZero(); }
template <class K> inline bool ringZero(const Series<K>&) { return false; }  // series throw on exact zero

class ToricGenerator {
 public:
  static ToricGenerator monomial(const IntMat2& m, std::string name = "") {
    if (m.det() == 0) throw DomainError("monomial generator must have nonzero determinant");
    ToricGenerator g;
    g.mono_ = true;
    g.M_ = m;
    g.name = std::move(name);
    return g;
  }
  static ToricGenerator birational(Factored f, std::string name = "") {
    for (int i = 0; i < 2; ++i)
      if (f.num[i].empty() && f.den[i].empty()) throw DomainError("coordinate with no factors");
    for (int i = 0; i < 2; ++i)
      for (auto* l : {&f.num[i], &f.den[i]})
        for (auto& F : *l)
          if (F.isZero()) throw DomainError("zero factor");
    ToricGenerator g;
    g.mono_ = false;
    g.F_ = std::make_shared<const Factored>(std::move(f));
    g.name = std::move(name);
    return g;
  }

  bool isMonomial() const { return mono_; }
  const IntMat2& matrix() const { return M_; }
  const Factored& factored() const { return *F_; }
  Integer rho() const { return mono_ ? M_.det() : F_->rho; }
  Integer dtop() const { return mono_ ? iabs(M_.det()) : F_->dtop; }

  // Distinct non-monomial factors; their zero sets are the exceptional curves.
  std::vector<Laurent> exceptionalFactors() const {
    std::vector<Laurent> out;
    if (mono_) return out;
    for (int i = 0; i < 2; ++i)
      for (auto* l : {&F_->num[i], &F_->den[i]})
        for (auto& F : *l)
          if (!F.isMonomial() && std::find(out.begin(), out.end(), F) == out.end()) out.push_back(F);
    return out;
  }

  template <class R, class Conv>
  std::array<R, 2> apply(const std::array<R, 2>& x, Conv conv) const {
    if (mono_) {
      return {Laurent::ipow(x[0], M_.a.convert_to<long>()) * Laurent::ipow(x[1], M_.b.convert_to<long>()),
              Laurent::ipow(x[0], M_.c.convert_to<long>()) * Laurent::ipow(x[1], M_.d.convert_to<long>())};
    }
    std::array<R, 2> out{R(1), R(1)};
    for (int i = 0; i < 2; ++i) {
      R num(1), den(1);
      for (auto& F : F_->num[i]) num = num * checked(F, x, conv);
      for (auto& F : F_->den[i]) den = den * checked(F, x, conv);
      out[i] = num / den;
    }
    return out;
  }

  std::string name;

 private:
  template <class R, class Conv>
  static R checked(const Laurent& F, const std::array<R, 2>& x, Conv conv) {
    R v = F.eval(x[0], x[1], conv);
    if (ringZero(v)) throw detail::FactorVanishes{F.str()};
    return v;
  }
  bool mono_ = true;
  IntMat2 M_;
  std::shared_ptr<const Factored> F_;
};

// Stages in application order: f = stages[k-1] o ... o stages[0].
struct ToricMapWord {
  std::vector<ToricGenerator> stages;
  std::string name;

  Integer rho() const {
    Integer r = 1;
    for (auto& g : stages) r *= g.rho();
    return r;
  }
  Integer dtop() const {
    Integer r = 1;
    for (auto& g : stages) r *= g.dtop();
    return r;
  }
  bool allMonomial() const {
    return std::all_of(stages.begin(), stages.end(), [](auto& g) { return g.isMonomial(); });
  }
  // product matrix of an all-monomial word
  IntMat2 monomialMatrix() const {
    IntMat2 m;
    for (auto& g : stages) m = g.matrix() * m;
    return m;
  }
  ToricMapWord power(unsigned n) const {
    ToricMapWord w;
    w.name = name + "^" + std::to_string(n);
    for (unsigned k = 0; k < n; ++k) w.stages.insert(w.stages.end(), stages.begin(), stages.end());
    return w;
  }
};

inline ToricMapWord monomialWord(const IntMat2& m) { return {{ToricGenerator::monomial(m, "M")}, "monomial"}; }
inline ToricMapWord identityWord() { return monomialWord(IntMat2::identity()); }

// The birational involution g and the monomial map h of the standard example f = g o h.
inline ToricGenerator exampleG() {
  Laurent x = Laurent::x1(), y = Laurent::x2(), one(Rational(1));
  Factored f;
  f.num[0] = {Laurent::monomial(1, 0, -1), one - x + y};
  f.den[0] = {one - x - y};
  f.num[1] = {Laurent::monomial(0, 1, -1), one + x - y};
  f.den[1] = {one - x - y};
  f.rho = 1;
  f.dtop = 1;
  f.involution = true;
  return ToricGenerator::birational(std::move(f), "g");
}
inline ToricGenerator exampleH() { return ToricGenerator::monomial(IntMat2(1, 2, -2, 1), "h"); }
inline ToricMapWord exampleWord() { return {{exampleH(), exampleG()}, "bdj"}; }

template <class R, class Conv>
std::array<R, 2> evalWordIn(const ToricMapWord& w, std::array<R, 2> x, Conv conv) {
  for (size_t s = 0; s < w.stages.size(); ++s) {
    try {
      x = w.stages[s].apply(x, conv);
    } catch (const detail::FactorVanishes& e) {
      throw ExceptionalHit(s, "factor " + e.factor + " vanishes");
    }
  }
  return x;
}

using PointQ = std::array<Rational, 2>;
using PointC = std::array<CR, 2>;

inline PointQ evalWord(const ToricMapWord& w, const PointQ& p) {
  if (p[0] == 0 || p[1] == 0) throw DomainError("point is not in the torus");
  return evalWordIn(w, p, [](const Rational& q) { return q; });
}

inline std::array<CplxL, 2> evalWordL(const ToricMapWord& w, const std::array<CplxL, 2>& p) {
  return evalWordIn(w, p, [](const Rational& q) { return CplxL(toLong(q), 0); });
}

struct FloatEval {
  PointC value;
  unsigned digits = 0;    // precision that produced value
  double agreement = 0;   // log10 of the relative change against the coarser run
};

// Evaluate at `digits` and at twice that; escalate until the two agree to half the digits.
inline FloatEval evalWordFloat(const ToricMapWord& w, const PointC& p, unsigned digits = 64, unsigned maxDigits = 2048) {
  auto run = [&](unsigned d) {
    PrecisionScope scope(d);
    PointC x = {CR(Real(p[0].re), Real(p[0].im)), CR(Real(p[1].re), Real(p[1].im))};
    if (x[0].isZero() || x[1].isZero()) throw DomainError("point is not in the torus");
    return evalWordIn(w, x, [](const Rational& q) { return CR::fromRational(q); });
  };
  PointC lo = run(digits);
  for (;;) {
    unsigned d2 = std::min(2 * digits, maxDigits);
    PointC hi = run(d2);
    PrecisionScope scope(d2);
    double worst = -1e9;
    for (int i = 0; i < 2; ++i) {
      Real rel = abs(hi[i] - lo[i]) / abs(hi[i]);
      double l = rel == 0 ? -double(d2) : boost::multiprecision::log10(rel).convert_to<double>();
      worst = std::max(worst, l);
    }
    if (worst <= -double(digits) / 2 || d2 == maxDigits) return {hi, d2, worst};
    digits = d2;
    lo = hi;
  }
}

// ---- toricity -----------------------------------------------------------------

struct Dual {
  Rational a, b;  // a + b eps, eps^2 = 0
  Dual(long x = 0) : a(x), b(0) {}
  Dual(Rational x, Rational y) : a(std::move(x)), b(std::move(y)) {}
  friend Dual operator+(const Dual& p, const Dual& q) { return {p.a + q.a, p.b + q.b}; }
  friend Dual operator-(const Dual& p, const Dual& q) { return {p.a - q.a, p.b - q.b}; }
  friend Dual operator*(const Dual& p, const Dual& q) { return {p.a * q.a, p.a * q.b + p.b * q.a}; }
  friend Dual operator/(const Dual& p, const Dual& q) {
    if (q.a == 0) throw DomainError("dual division by zero");
    return {p.a / q.a, (p.b * q.a - p.a * q.b) / (q.a * q.a)};
  }
};
inline bool ringZero(const Dual& d) { return d.a == 0; }

// Matrix (x_j d f_i/dx_j) / f_i of the word at a rational torus point, by forward differentiation.
inline std::array<std::array<Rational, 2>, 2> logJacobian(const ToricMapWord& w, const PointQ& p) {
  std::array<std::array<Rational, 2>, 2> J;
  auto conv = [](const Rational& q) { return Dual(q, 0); };
  for (int j = 0; j < 2; ++j) {
    std::array<Dual, 2> x = {Dual(p[0], j == 0 ? p[0] : Rational(0)), Dual(p[1], j == 1 ? p[1] : Rational(0))};
    auto y = evalWordIn(w, x, conv);
    for (int i = 0; i < 2; ++i) J[i][j] = y[i].b / y[i].a;
  }
  return J;
}

// Symbolic check for one factored generator: det(x_j d_j log f_i) must be a constant.
inline Integer symbolicRho(const ToricGenerator& g) {
  if (g.isMonomial()) return g.matrix().det();
  const Factored& F = g.factored();
  auto U = g.exceptionalFactors();
  Laurent D(Rational(1));
  for (auto& u : U) D = D * u;
  std::array<std::array<Laurent, 2>, 2> L;  // L[i][j] * D
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Laurent acc;
      for (int sgn = 0; sgn < 2; ++sgn)
        for (auto& f : sgn == 0 ? F.num[i] : F.den[i]) {
          Laurent term;
          if (f.isMonomial()) {
            auto e = f.terms().begin()->first;
            term = D * Laurent(Rational(j == 0 ? e.first : e.second));
          } else {
            Laurent rest(Rational(1));
            bool skipped = false;
            for (auto& u : U) {
              if (!skipped && u == f) {
                skipped = true;
                continue;
              }
              rest = rest * u;
            }
            term = f.eulerDerivative(j) * rest;
          }
          acc = sgn == 0 ? acc + term : acc - term;
        }
      L[i][j] = acc;
    }
  Laurent det = L[0][0] * L[1][1] - L[0][1] * L[1][0];
  Laurent D2 = D * D;
  if (det.isZero()) throw StructuralError("not toric: log-Jacobian is degenerate");
  Rational c = det.terms().begin()->second / D2.terms().at(det.terms().begin()->first);
  if (!(det == D2 * Laurent(c)) || denom(c) != 1) throw StructuralError("not toric: pullback of the invariant form is not a constant multiple");
  return numer(c);
}

// Returns rho after checking every generator symbolically and the word at random rational points.
inline Integer verifyToric(const ToricMapWord& w, uint64_t seed = 7, int points = 3) {
  if (w.stages.empty()) throw DomainError("empty word");
  Integer r = 1;
  for (auto& g : w.stages) {
    Integer s = symbolicRho(g);
    if (s != g.rho()) throw StructuralError("generator " + g.name + " declares rho " + g.rho().str() + " but has " + s.str());
    r *= s;
  }
  std::mt19937_64 rng(seed);
  int done = 0;
  for (int attempt = 0; done < points && attempt < 50 * points; ++attempt) {
    PointQ p = {randomRational(rng, -5, 5), randomRational(rng, -5, 5)};
    if (p[0] == 0 || p[1] == 0) continue;
    try {
      auto J = logJacobian(w, p);
      if (J[0][0] * J[1][1] - J[0][1] * J[1][0] != Rational(r)) throw StructuralError("not toric: word Jacobian check failed");
      ++done;
    } catch (const ExceptionalHit&) {
    } catch (const DomainError&) {
    }
  }
  return r;
}

// ---- tropicalization ----------------------------------------------------------

// ord_s of F(c s^v) for generic c: the minimum of <e, v> over the support.
inline Integer tropicalValue(const Laurent& F, const V2& v) {
  bool first = true;
  Integer best;
  for (auto& [e, c] : F.terms()) {
    Integer t = Integer(e.first) * v.x + Integer(e.second) * v.y;
    if (first || t < best) best = t;
    first = false;
  }
  return best;
}

// Exact tropicalization of a single generator from its Newton polygons.
inline PLMap generatorTropical(const ToricGenerator& g) {
  if (g.isMonomial()) return PLMap(g.matrix());
  const Factored& F = g.factored();
  std::vector<RayQ> rays = Fan::quadric().rays();
  std::vector<const Laurent*> all;
  for (int i = 0; i < 2; ++i)
    for (auto* l : {&F.num[i], &F.den[i]})
      for (auto& f : *l) all.push_back(&f);
  for (auto* f : all) {
    auto s = f->support();
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = a + 1; b < s.size(); ++b) {
        V2 d = s[b] - s[a];
        V2 n(-d.y, d.x);
        rays.push_back(primitive(n));
        rays.push_back(primitive(-n));
      }
  }
  Fan fan(rays);
  std::vector<IntMat2> mats;
  for (size_t k = 0; k < fan.size(); ++k) {
    V2 mid = fan.ray(k).v + fan.ray(k + 1).v;
    std::array<V2, 2> row = {V2(0, 0), V2(0, 0)};
    for (int i = 0; i < 2; ++i)
      for (int sgn = 0; sgn < 2; ++sgn)
        for (auto& f : sgn == 0 ? F.num[i] : F.den[i]) {
          // the term attaining the minimum on the open sector is unique
          Integer best = tropicalValue(f, mid);
          for (auto& [e, c] : f.terms())
            if (Integer(e.first) * mid.x + Integer(e.second) * mid.y == best) {
              V2 ev(e.first, e.second);
              row[i] = sgn == 0 ? row[i] + ev : row[i] - ev;
              break;
            }
        }
    mats.emplace_back(row[0].x, row[0].y, row[1].x, row[1].y);
  }
  return PLMap(fan, mats).simplified();
}

// Composite of the generator tropicalizations, A_k o ... o A_1.
inline PLMap tropicalComposite(const ToricMapWord& w) {
  PLMap A;
  for (auto& g : w.stages) A = composePL(generatorTropical(g), A);
  return A;
}

template <class K>
K coefficientFrom(const Rational& q) {
  if constexpr (std::is_same_v<K, Rational>) return q;
  else return K::fromRational(q);
}

// Valuations of the word along x = (c1 s^v1, c2 s^v2); nullopt when the draw is not generic.
template <class K>
std::optional<V2> probeValuation(const ToricMapWord& w, const V2& v, const K& c1, const K& c2, long maxPrecision = 1024) {
  using S = Series<K>;
  long saved = S::workingPrecision();
  S::workingPrecision() = 1;
  std::optional<V2> out;
  for (;;) {
    try {
      std::array<S, 2> x = {S(c1, v.x.convert_to<long>()), S(c2, v.y.convert_to<long>())};
      auto y = evalWordIn(w, x, [](const Rational& q) { return S(coefficientFrom<K>(q), 0); });
      out = V2(y[0].valuation(), y[1].valuation());
      break;
    } catch (const PrecisionLoss&) {
      if (S::workingPrecision() >= maxPrecision) {
        S::workingPrecision() = saved;
        throw;
      }
      S::workingPrecision() *= 2;
    } catch (const IdenticallyZero&) {
      break;
    } catch (const ExceptionalHit&) {
      break;
    }
  }
  S::workingPrecision() = saved;
  return out;
}

// A(v) from two agreeing generic draws.
template <class K = Fn>
V2 probeRay(const ToricMapWord& w, const V2& v, std::mt19937_64& rng, int maxDraws = 8) {
  std::optional<V2> prev;
  for (int d = 0; d < maxDraws; ++d) {
    Rational a = 0, b = 0;
    while (a == 0) a = randomRational(rng, -40, 40, 997);
    while (b == 0) b = randomRational(rng, -40, 40, 997);
    auto cur = probeValuation<K>(w, v, coefficientFrom<K>(a), coefficientFrom<K>(b));
    if (!cur) continue;
    if (prev && *prev == *cur) return *cur;
    prev = cur;
  }
  throw StructuralError("valuation probe did not stabilise at ray (" + v.x.str() + "," + v.y.str() + ")");
}

// Assemble a PL map from its values on a counterclockwise list of rays with consecutive
// determinants 1. Exact when every break ray of the map is in the list.
inline PLMap assembleFromRays(const std::vector<V2>& rays, const std::vector<V2>& vals) {
  size_t n = rays.size();
  std::vector<IntMat2> M(n);
  for (size_t k = 0; k < n; ++k) {
    size_t k1 = (k + 1) % n;
    M[k] = IntMat2::fromColumns(vals[k], vals[k1]) * IntMat2::fromColumns(rays[k], rays[k1]).adj();
  }
  size_t start = n;
  for (size_t k = 0; k < n; ++k)
    if (!(M[k] == M[(k + n - 1) % n])) {
      start = k;
      break;
    }
  if (start == n) return PLMap(M[0]);
  std::vector<RayQ> breaks;
  std::vector<IntMat2> mats;
  size_t k = start;
  do {
    // run of equal matrices from ray k up to ray e
    size_t e = (k + 1) % n;
    while (e != start && M[e] == M[k]) e = (e + 1) % n;
    breaks.push_back(RayQ(rays[k]));
    mats.push_back(M[k]);
    size_t b = k;
    for (size_t j = (k + 1) % n; j != e; j = (j + 1) % n) {
      size_t j1 = (j + 1) % n;
      if (cross(rays[b], rays[j1]) <= 0) {
        breaks.push_back(RayQ(rays[j]));
        mats.push_back(M[k]);
        b = j;
      }
    }
    k = e;
  } while (k != start);
  // order sectors as the fan does
  std::vector<size_t> idx(breaks.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t c) { return angleLess(breaks[a].v, breaks[c].v); });
  std::vector<RayQ> r2;
  std::vector<IntMat2> m2;
  for (size_t i : idx) {
    r2.push_back(breaks[i]);
    m2.push_back(mats[i]);
  }
  return PLMap(Fan(r2), m2);
}

// Tropicalization by probing every primitive ray of height <= bound. Coefficients are
// random rationals reduced modulo a prime unless K = Rational.
template <class K = Fn>
PLMap tropicalize(const ToricMapWord& w, long heightBound = 24, uint64_t seed = 1) {
  if (w.stages.empty()) throw DomainError("empty word");
  std::mt19937_64 rng(seed);
  auto rays = raysOfHeight(std::max(1L, heightBound));
  std::vector<V2> vals;
  vals.reserve(rays.size());
  for (auto& r : rays) vals.push_back(probeRay<K>(w, r, rng));
  return assembleFromRays(rays, vals);
}

// ---- degrees -------------------------------------------------------------------

// Degree of the monomial map with matrix m, homogenized on P^2.
inline Integer monomialDegree(const IntMat2& m) {
  Integer hi = std::max({Integer(0), m.a + m.b, m.c + m.d});
  Integer lx = std::min({Integer(0), m.a, m.c}), ly = std::min({Integer(0), m.b, m.d});
  return hi - lx - ly;
}

// Upper bound on the degree of one generator.
inline Integer generatorDegreeBound(const ToricGenerator& g) {
  if (g.isMonomial()) return monomialDegree(g.matrix());
  const Factored& F = g.factored();
  std::array<long, 2> dn{}, dd{};
  for (int i = 0; i < 2; ++i) {
    Laurent N(Rational(1)), D(Rational(1));
    for (auto& f : F.num[i]) N = N * f;
    for (auto& f : F.den[i]) D = D * f;
    // clear negative exponents by a common monomial
    auto en = N.minExponent(), ed = D.minExponent();
    long sx = -std::min({0L, en.first, ed.first}), sy = -std::min({0L, en.second, ed.second});
    auto total = [&](const Laurent& L) {
      long t = 0;
      for (auto& [e, c] : L.terms()) t = std::max(t, e.first + sx + e.second + sy);
      return t;
    };
    dn[size_t(i)] = total(N);
    dd[size_t(i)] = total(D);
  }
  return std::max({dn[0] + dd[1], dn[1] + dd[0], dd[0] + dd[1]});
}

struct DegreeResult {
  std::vector<Integer> degrees;  // degrees[n-1] = deg f^n
  bool complete = true;          // false when a budget stopped the computation early
};

namespace detail {

template <class F>
void reduceFraction(PolyP<F>& n, PolyP<F>& e) {
  PolyP<F> g = gcd(n, e);
  if (deg(g) > 0) {
    n = exactDiv(n, g);
    e = exactDiv(e, g);
  }
}

// Coordinates restricted to a line: u_i = n[i] / e[i], reduced.
struct LineImage {
  std::array<PolyP<Fn>, 2> n, e;
};

inline PolyP<Fn> cachedPow(std::map<std::pair<int, long>, PolyP<Fn>>& cache, const std::array<PolyP<Fn>, 4>& base, int which,
                           long k) {
  auto key = std::make_pair(which, k);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache[key] = powP(base[size_t(which)], (unsigned long)k);
}

struct LineDegenerate {};

inline void applyOnLine(const ToricGenerator& g, LineImage& L) {
  std::array<PolyP<Fn>, 4> base = {L.n[0], L.e[0], L.n[1], L.e[1]};
  std::map<std::pair<int, long>, PolyP<Fn>> cache;
  // monomial factor n1^a e1^b n2^c e2^d with signed exponents, split into (num, den)
  auto monoPart = [&](std::array<long, 4> ex, PolyP<Fn>& num, PolyP<Fn>& den) {
    for (int k = 0; k < 4; ++k) {
      if (ex[size_t(k)] > 0) num = mul(num, cachedPow(cache, base, k, ex[size_t(k)]));
      if (ex[size_t(k)] < 0) den = mul(den, cachedPow(cache, base, k, -ex[size_t(k)]));
    }
  };
  LineImage out;
  if (g.isMonomial()) {
    const IntMat2& m = g.matrix();
    std::array<std::array<long, 2>, 2> rows = {{{m.a.convert_to<long>(), m.b.convert_to<long>()},
                                                {m.c.convert_to<long>(), m.d.convert_to<long>()}}};
    for (int i = 0; i < 2; ++i) {
      PolyP<Fn> num = {Fn(1)}, den = {Fn(1)};
      monoPart({rows[size_t(i)][0], -rows[size_t(i)][0], rows[size_t(i)][1], -rows[size_t(i)][1]}, num, den);
      reduceFraction(num, den);
      out.n[size_t(i)] = num;
      out.e[size_t(i)] = den;
    }
    L = out;
    return;
  }
  const Factored& F = g.factored();
  for (int i = 0; i < 2; ++i) {
    PolyP<Fn> num = {Fn(1)}, den = {Fn(1)};
    std::array<long, 4> ex{};
    for (int sgn = 0; sgn < 2; ++sgn)
      for (auto& f : sgn == 0 ? F.num[i] : F.den[i]) {
        // f(u) = P_f * n1^pmin e1^-pmax n2^qmin e2^-qmax
        long pmin = LONG_MAX, pmax = LONG_MIN, qmin = LONG_MAX, qmax = LONG_MIN;
        for (auto& [e, c] : f.terms()) {
          pmin = std::min(pmin, e.first);
          pmax = std::max(pmax, e.first);
          qmin = std::min(qmin, e.second);
          qmax = std::max(qmax, e.second);
        }
        PolyP<Fn> P;
        for (auto& [e, c] : f.terms()) {
          PolyP<Fn> t = {Fn::fromRational(c)};
          t = mul(t, cachedPow(cache, base, 0, e.first - pmin));
          t = mul(t, cachedPow(cache, base, 1, pmax - e.first));
          t = mul(t, cachedPow(cache, base, 2, e.second - qmin));
          t = mul(t, cachedPow(cache, base, 3, qmax - e.second));
          P = add(P, t);
        }
        if (P.empty()) throw LineDegenerate{};
        long s = sgn == 0 ? 1 : -1;
        if (sgn == 0) num = mul(num, P);
        else den = mul(den, P);
        ex[0] += s * pmin;
        ex[1] -= s * pmax;
        ex[2] += s * qmin;
        ex[3] -= s * qmax;
      }
    monoPart(ex, num, den);
    reduceFraction(num, den);
    out.n[size_t(i)] = num;
    out.e[size_t(i)] = den;
  }
  L = out;
}

inline long lineDegree(const LineImage& L) {
  long d = std::max({deg(L.n[0]) + deg(L.e[1]), deg(L.n[1]) + deg(L.e[0]), deg(L.e[0]) + deg(L.e[1])});
  return d - deg(gcd(L.e[0], L.e[1]));
}

}  // namespace detail

// deg f^n, n = 1..nMax, by composing the restriction of f to a random line, reducing
// every stage by polynomial gcds modulo a prime. Stops when the degree passes `budget`.
inline DegreeResult degreeSequenceLine(const ToricMapWord& w, unsigned nMax, uint64_t seed = 11, long budget = 1L << 40) {
  DegreeResult res;
  if (w.allMonomial()) {
    IntMat2 m = w.monomialMatrix(), p;
    for (unsigned n = 1; n <= nMax; ++n) {
      p = m * p;
      res.degrees.push_back(monomialDegree(p));
    }
    return res;
  }
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 5; ++attempt) {
    res.degrees.clear();
    res.complete = true;
    auto rnd = [&] { return Fn::raw(1 + rng() % (kNttPrime - 1)); };
    detail::LineImage L;
    L.n = {PolyP<Fn>{rnd(), rnd()}, PolyP<Fn>{rnd(), rnd()}};
    L.e = {PolyP<Fn>{Fn(1)}, PolyP<Fn>{Fn(1)}};
    try {
      for (unsigned n = 1; n <= nMax; ++n) {
        for (auto& g : w.stages) detail::applyOnLine(g, L);
        long d = detail::lineDegree(L);
        res.degrees.push_back(d);
        if (d > budget && n < nMax) {
          res.complete = false;
          break;
        }
      }
      return res;
    } catch (const detail::LineDegenerate&) {
    }
  }
  throw StructuralError("could not find a generic line");
}

// Independent oracle: sample the pullback of a random line at points of a random line,
// interpolate and read the degree off a rational reconstruction. Uses a different prime.
template <class F = Fm>
DegreeResult degreeSequenceInterp(const ToricMapWord& w, unsigned nMax, uint64_t seed = 13, long budget = 1L << 40) {
  DegreeResult res;
  std::mt19937_64 rng(seed);
  auto rnd = [&] { return F::raw(1 + rng() % (F::modulus - 1)); };
  Integer b1 = 1;
  for (auto& g : w.stages) b1 *= generatorDegreeBound(g);
  std::array<F, 4> line = {rnd(), rnd(), rnd(), rnd()};
  std::array<F, 3> lam = {rnd(), rnd(), rnd()};
  auto conv = [](const Rational& q) {
    if (denom(q) == 1 && boost::multiprecision::abs(numer(q)) < 1000000) return F(numer(q).convert_to<long long>());
    return F::fromRational(q);
  };
  auto sample = [&](F t, unsigned n, F& out) {
    std::array<F, 2> x = {line[0] + line[1] * t, line[2] + line[3] * t};
    if (x[0].isZero() || x[1].isZero()) return false;
    try {
      for (unsigned k = 0; k < n; ++k) x = evalWordIn(w, x, conv);
    } catch (const ExceptionalHit&) {
      return false;
    } catch (const DomainError&) {
      return false;
    }
    out = lam[0] * x[0] + lam[1] * x[1] + lam[2];
    return true;
  };
  for (unsigned n = 1; n <= nMax; ++n) {
    // a priori bound from submultiplicativity; the working bound starts from the observed growth
    long B = n == 1 ? b1.convert_to<long>() : res.degrees[0].convert_to<long>() * res.degrees.back().convert_to<long>();
    long k = B;
    if (n >= 3) {
      double d1 = toDouble(res.degrees[n - 2]), d2 = toDouble(res.degrees[n - 3]);
      k = std::min(B, long(1.15 * d1 * d1 / d2) + 8);
    }
    if (k > budget) {
      res.complete = false;
      break;
    }
    std::optional<long> found;
    int unclean = 0;
    while (!found) {
      size_t N = size_t(2 * k + 2);
      // equally spaced nodes; a node where the stagewise evaluation divides by zero forces a new pencil
      F a0 = rnd(), delta = rnd();
      std::vector<F> ys(N);
      bool clean = true;
      for (size_t i = 0; i < N && clean; ++i) clean = sample(a0 + F((long long)i) * delta, n, ys[i]);
      if (!clean) {
        if (++unclean > 20) throw StructuralError("degree oracle: no clean pencil found");
        continue;
      }
      PolyP<F> p = interpolateSpaced(a0, delta, ys);
      PolyP<F> M = {F(1)};
      for (size_t i = 0; i < N; ++i) {
        F x = a0 + F((long long)i) * delta;
        // M *= (t - x)
        M.push_back(F(0));
        for (size_t j = M.size() - 1; j > 0; --j) M[j] = M[j - 1] - M[j] * x;
        M[0] = F(0) - M[0] * x;
      }
      PolyP<F> a, b;
      auto rr = rationalReconstruct(M, p, k, &a, &b);
      bool ok = rr.ok;
      for (int j = 0; ok && j < 6; ++j) {
        F t = rnd(), y;
        if (!sample(t, n, y)) continue;
        ok = evalP(a, t) == y * evalP(b, t);
      }
      if (ok) {
        found = std::max(rr.degNum, rr.degDen);
      } else {
        if (k >= B) throw StructuralError("degree oracle: reconstruction failed at n = " + std::to_string(n));
        k = std::min(B, k + k / 2 + 1);
      }
    }
    res.degrees.push_back(*found);
  }
  return res;
}

struct DegreeCheck {
  DegreeResult line, interp;
  bool agree = false;
  bool submultiplicative = false;
};

inline DegreeCheck degreeSequence(const ToricMapWord& w, unsigned nMax, uint64_t seed = 11, long budget = 1L << 40) {
  DegreeCheck c;
  c.line = degreeSequenceLine(w, nMax, seed, budget);
  c.interp = degreeSequenceInterp(w, nMax, seed + 1, budget);
  size_t n = std::min(c.line.degrees.size(), c.interp.degrees.size());
  c.agree = n > 0;
  for (size_t i = 0; i < n; ++i) c.agree = c.agree && c.line.degrees[i] == c.interp.degrees[i];
  c.submultiplicative = true;
  auto& d = c.line.degrees;
  for (size_t i = 0; i < d.size(); ++i)
    for (size_t j = 0; i + j + 1 < d.size(); ++j)
      if (d[i + j + 1] > d[i] * d[j]) c.submultiplicative = false;
  return c;
}

struct DynDegree {
  double upper;     // inf_n deg(f^n)^(1/n); an upper bound by submultiplicativity
  double estimate;  // geometric mean growth over the second half of the sequence
};

inline DynDegree dynDegreeEstimate(const std::vector<Integer>& degs) {
  if (degs.size() < 3) throw DomainError("dynDegreeEstimate needs at least three terms");
  DynDegree r{1e300, 0};
  for (size_t n = 0; n < degs.size(); ++n) r.upper = std::min(r.upper, std::pow(toDouble(degs[n]), 1.0 / double(n + 1)));
  size_t N = degs.size(), m = (N + 1) / 2;
  r.estimate = std::pow(toDouble(degs[N - 1]) / toDouble(degs[m - 1]), 1.0 / double(N - m));
  return r;
}

inline Integer topologicalDegree(const ToricMapWord& w) { return w.dtop(); }

}  // namespace toritrop
