#pragma once
// Class-level pullback and pushforward on support functions, the invariant
// support functions and lambda_1 by power iteration, and Green functions.

#include "toric_dyn.hpp"

#include <functional>

namespace toritrop {

struct ContractionDatum {
  Laurent factor;  // P_C
  SupportQ Psi;    // Newton support of P_C
  V2 ray;          // primitive image ray w_C
  Rational c = 1;  // order
  double cError = 0;
  bool estimated = true;
};

// psi o A; exact on the fan of A refined by A-preimages of the rays of psi.
template <class T>
SupportFunction<T> pullSupport(const SupportFunction<T>& psi, const PLMap& A) {
  std::vector<RayQ> rays = A.fan().rays();
  for (size_t i = 0; i < A.pieces(); ++i) {
    Cone2 c = A.cone(i);
    for (auto& r : psi.fan().rays()) {
      V2 p = preimageDirection(A.matrix(i), r.v);
      if (c.containsInterior(p)) rays.push_back(primitive(p));
    }
  }
  return SupportFunction<T>::sample(Fan(rays), [&](const V2& v) { return psi(A(v)); });
}

// psi o A^{-1} for a PL homeomorphism A.
template <class T>
SupportFunction<T> pushSupport(const SupportFunction<T>& psi, const PLMap& A) {
  std::vector<std::pair<RayQ, T>> pts;
  auto add = [&](const V2& r) {
    V2 img = A(r);
    Integer k = content(img);
    pts.push_back({primitive(img), psi(r) / scalarFrom<T>(k)});
  };
  for (auto& r : A.fan().rays()) add(r.v);
  for (auto& r : psi.fan().rays()) add(r.v);
  std::vector<RayQ> rays;
  for (auto& p : pts) rays.push_back(p.first);
  Fan f(rays);
  std::vector<T> vals(f.size());
  for (auto& [r, v] : pts) vals[*f.indexOf(r)] = v;
  return SupportFunction<T>(f, vals);
}

// Supremum over the Euclidean unit circle (exact for PL functions: endpoints or the gradient direction).
inline double supUnit(const SupportD& psi) {
  const Fan& f = psi.fan();
  double best = -1e300;
  for (size_t i = 0; i < f.size(); ++i) {
    double ax = toDouble(f.ray(i).a()), ay = toDouble(f.ray(i).b());
    double bx = toDouble(f.ray(i + 1).a()), by = toDouble(f.ray(i + 1).b());
    double va = psi.value(i), vb = psi.value(i + 1);
    best = std::max(best, va / std::hypot(ax, ay));
    double d = ax * by - ay * bx;
    double gx = (va * by - vb * ay) / d, gy = (vb * ax - va * bx) / d;
    if (ax * gy - ay * gx > 0 && gx * by - gy * bx > 0) best = std::max(best, std::hypot(gx, gy));
  }
  return best;
}

// Drop rays whose corner mass is negligible against the largest one.
inline SupportD pruned(const SupportD& psi, double rel = 1e-13) {
  auto m = psi.cornerMasses();
  double mx = 0;
  for (double x : m) mx = std::max(mx, std::abs(x));
  std::vector<RayQ> keep;
  const Fan& f = psi.fan();
  for (size_t i = 0; i < f.size(); ++i)
    if (std::abs(m[i]) > rel * mx) keep.push_back(f.ray(i));
  // keep a valid fan
  for (size_t i = 0; keep.size() < f.size(); ++i) {
    try {
      Fan t(keep);
      break;
    } catch (const DomainError&) {
      if (std::find(keep.begin(), keep.end(), f.ray(i)) == keep.end()) keep.push_back(f.ray(i));
    }
  }
  return psi.on(Fan(keep));
}

template <class T>
SupportFunction<T> convertSupport(const SupportQ& s) {
  std::vector<T> v;
  for (auto& x : s.values()) v.push_back(scalarFrom<T>(numer(x)) / scalarFrom<T>(denom(x)));
  return SupportFunction<T>(s.fan(), v);
}

// One factor of a class operator: psi -> mult * (psi o A, or psi o A^{-1}) + sum c psi(w) Psi.
struct StageOperator {
  PLMap A;
  bool inverse = false;
  Integer mult = 1;
  std::vector<ContractionDatum> data;

  template <class T>
  SupportFunction<T> operator()(const SupportFunction<T>& psi) const {
    SupportFunction<T> r = inverse ? pushSupport(psi, A) : pullSupport(psi, A);
    if (mult != 1) r *= scalarFrom<T>(mult);
    for (auto& d : data) {
      T coef = scalarFrom<T>(numer(d.c)) / scalarFrom<T>(denom(d.c)) * psi(d.ray);
      if (coef != T(0)) r = r + coef * convertSupport<T>(d.Psi);
    }
    return r;
  }
};

struct ClassOperator {
  std::vector<StageOperator> ops;  // applied in order
  template <class T>
  SupportFunction<T> operator()(SupportFunction<T> psi) const {
    for (auto& op : ops) psi = op(psi);
    return psi;
  }
};

template <class T>
SupportFunction<T> pullbackClassOperator(const SupportFunction<T>& psi, const PLMap& A,
                                         const std::vector<ContractionDatum>& contractions) {
  return StageOperator{A, false, 1, contractions}(psi);
}

namespace detail {

inline ContractionDatum datumFor(const ToricMapWord& w, const ExcCurve& e, uint64_t seed) {
  ContractionDatum d;
  d.factor = e.pulled ? *e.pulled : e.factor;
  d.Psi = newtonSupport(d.factor.support());
  d.ray = primitive(e.wordImage).v;
  auto co = estimateContractionOrder(w, e, seed);
  d.c = co.stable ? co.rounded : exactRational((long double)co.value);
  d.cError = co.stable ? std::abs(co.value - toDouble(co.rounded)) + co.error : co.error;
  d.estimated = true;
  return d;
}

inline std::vector<ContractionDatum> stageData(const ToricGenerator& g, uint64_t seed) {
  std::vector<ContractionDatum> out;
  if (g.isMonomial()) return out;
  ToricMapWord one{{g}, g.name};
  for (auto& e : excIndData(one, 40, seed).exc) out.push_back(datumFor(one, e, seed));
  return out;
}

inline ToricGenerator inverseGenerator(const ToricGenerator& g) {
  const Factored& F = g.factored();
  if (F.involution) return g;
  if (F.inverse) return ToricGenerator::birational(*F.inverse, g.name + "^-1");
  throw DomainError("pushforward needs an explicit inverse for birational generator " + g.name);
}

}  // namespace detail

// Contraction data of the word in its input coordinates (needs every exceptional curve pulled back).
inline std::vector<ContractionDatum> contractionData(const ToricMapWord& w, uint64_t seed = 3) {
  std::vector<ContractionDatum> out;
  for (auto& e : excIndData(w, 40, seed).exc) {
    if (!e.pulled) throw DomainError("exceptional curve of stage " + std::to_string(e.stage) + " is not pulled back");
    out.push_back(detail::datumFor(w, e, seed));
  }
  return out;
}

// f^*: one word-level step when the data pull back, otherwise the product of stage pullbacks.
inline ClassOperator forwardOperator(const ToricMapWord& w, uint64_t seed = 3) {
  ClassOperator op;
  try {
    op.ops.push_back({tropicalComposite(w), false, 1, contractionData(w, seed)});
    return op;
  } catch (const DomainError&) {
  }
  for (size_t s = w.stages.size(); s-- > 0;)
    op.ops.push_back({generatorTropical(w.stages[s]), false, 1, detail::stageData(w.stages[s], seed)});
  return op;
}

inline ClassOperator forwardOperatorByStages(const ToricMapWord& w, uint64_t seed = 3) {
  ClassOperator op;
  for (size_t s = w.stages.size(); s-- > 0;)
    op.ops.push_back({generatorTropical(w.stages[s]), false, 1, detail::stageData(w.stages[s], seed)});
  return op;
}

// f_* = (last stage)_* ... (first stage)_*; monomial M_* psi = |det M| psi o M^{-1}, birational g_* = (g^{-1})^*.
inline ClassOperator backwardOperator(const ToricMapWord& w, uint64_t seed = 3) {
  ClassOperator op;
  for (auto& g : w.stages) {
    if (g.isMonomial()) {
      op.ops.push_back({PLMap(g.matrix()), true, iabs(g.matrix().det()), {}});
    } else {
      ToricGenerator inv = detail::inverseGenerator(g);
      op.ops.push_back({generatorTropical(inv), false, 1, detail::stageData(inv, seed)});
    }
  }
  return op;
}

// ---- invariant support functions ------------------------------------------------

enum class Direction { Forward, Backward };

struct EigenSupport {
  SupportD psi;
  double lambda = 0, lambdaError = 0;
  double residual = 0;
  unsigned iterations = 0;
  bool converged = false;
  bool convex = true;
  std::vector<double> history;  // lambda_k
};

// Sup of |a - b| over unit directions: fan rays of both plus 256 uniform directions.
inline double supDiff(const SupportD& a, const SupportD& b) {
  double r = 0;
  auto at = [&](double x, double y) {
    double n = std::hypot(x, y);
    r = std::max(r, std::abs(a(x / n, y / n) - b(x / n, y / n)));
  };
  for (auto* s : {&a, &b})
    for (auto& ray : s->fan().rays()) at(toDouble(ray.a()), toDouble(ray.b()));
  for (int k = 0; k < 256; ++k) at(std::cos(2 * M_PI * k / 256), std::sin(2 * M_PI * k / 256));
  return r;
}

inline SupportD standardSeed() { return SupportD(Fan::P2(), {1.0, 1.0, 0.0}); }

inline EigenSupport eigenSupport(const ClassOperator& F, unsigned iters = 200, double tol = 1e-10,
                                 double cError = 0) {
  EigenSupport e;
  SupportD psi = standardSeed();
  psi *= 1.0 / supUnit(psi);
  double prev = 0;
  for (unsigned k = 1; k <= iters; ++k) {
    SupportD next = pruned(F(psi));
    double n = supUnit(next);
    if (!(n > 0)) throw StructuralError("class operator killed the seed");
    next *= 1.0 / n;
    e.history.push_back(n);
    double shape = supDiff(next, psi);
    psi = std::move(next);
    e.iterations = k;
    if (k > 2 && std::abs(n - prev) < tol * n && shape < tol) {
      e.converged = true;
      break;
    }
    prev = n;
  }
  e.psi = psi;
  e.lambda = e.history.back();
  SupportD img = F(psi);
  SupportD lp = psi;
  lp *= e.lambda;
  e.residual = supDiff(img, lp);
  e.lambdaError = (e.history.size() > 1 ? std::abs(e.history.back() - e.history[e.history.size() - 2]) : 0) +
                  e.residual + cError * e.lambda;
  for (auto m : psi.cornerMasses())
    if (m < -1e-9) e.convex = false;
  return e;
}

inline double contractionErrorSum(const ClassOperator& F) {
  double s = 0;
  for (auto& op : F.ops)
    for (auto& d : op.data) s += d.cError;
  return s;
}

inline EigenSupport eigenSupport(const ToricMapWord& w, Direction dir, unsigned iters = 200, double tol = 1e-10,
                                 uint64_t seed = 3) {
  ClassOperator F = dir == Direction::Forward ? forwardOperator(w, seed) : backwardOperator(w, seed);
  return eigenSupport(F, iters, tol, contractionErrorSum(F));
}

// ---- Green functions ------------------------------------------------------------

inline std::array<double, 2> logOf(const PointC& p) {
  return {-boost::multiprecision::log(abs(p[0])).convert_to<double>(),
          -boost::multiprecision::log(abs(p[1])).convert_to<double>()};
}

// Invariant homogeneous function used as the potential at infinity.
using HomogeneousFn = std::function<double(double, double)>;

inline bool isConformal(const IntMat2& M) {
  return (M.a == M.d && M.b == -M.c) || (M.a == -M.d && M.b == M.c);
}

struct GreenEvaluator {
  ToricMapWord word;
  Direction dir = Direction::Forward;
  EigenSupport eig;
  HomogeneousFn psi;
  double lambda = 0;
  double guard = 1e-6;
  unsigned maxDepth = 8;
  unsigned digits = 64, maxDigits = 1024;
  bool verifyPrecision = true;  // rerun orbits at doubled precision
  std::vector<std::vector<IndPoint>> stageInd;  // per stage, in that stage's input coordinates
  // forward series: word-level exceptional data and an upper bound for its correction term
  std::vector<ContractionDatum> data;
  bool seriesAvailable = false;
  double K = 0;
  double phiMin = 0, phiMax = 0;
  // backward series: per stage, coef * log|P / x^m0| on the curves contracted by that stage's inverse,
  // in the stage's output coordinates
  struct Correction {
    Laurent factor;
    double coef = 0;
  };
  std::vector<std::vector<Correction>> backCorr;
};

struct GreenOptions {
  double guard = 1e-6;
  unsigned maxDepth = 8;
  unsigned digits = 64, maxDigits = 1024;
  std::optional<double> lambda;  // overrides the eigen estimate
  uint64_t seed = 3;
  unsigned kSamples = 3000;
};

namespace detail {

// m with <m, tau> = 1, tau primitive.
inline V2 dualUnit(const V2& tau) {
  long a = tau.x.convert_to<long>(), b = tau.y.convert_to<long>();
  long x0 = 1, y0 = 0, x1 = 0, y1 = 1, r0 = a, r1 = b;
  while (r1 != 0) {
    long q = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
    std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
  }
  if (r0 < 0) x0 = -x0, y0 = -y0;
  return V2(x0, y0);
}

// Distance from x to an indeterminacy point, in a chart adapted to the point (sup norm).
inline double indDistance(const IndPoint& ip, const PointC& x) {
  if (!ip.onPole) {
    CR d0 = x[0] - CR(Real(double(ip.point[0].real())), Real(double(ip.point[0].imag())));
    CR d1 = x[1] - CR(Real(double(ip.point[1].real())), Real(double(ip.point[1].imag())));
    return std::max(abs(d0), abs(d1)).convert_to<double>();
  }
  auto L = logOf(x);
  V2 m1 = dualUnit(ip.ray), m2 = perpOf(ip.ray);
  double logY1 = -(toDouble(m1.x) * L[0] + toDouble(m1.y) * L[1]);
  if (logY1 > 0) return 1;
  CR y2 = Laurent::ipow(x[0], m2.x.convert_to<long>()) * Laurent::ipow(x[1], m2.y.convert_to<long>());
  CR z(Real(double(ip.fiber.real())), Real(double(ip.fiber.imag())));
  return std::max(std::exp(logY1), abs(y2 - z).convert_to<double>());
}

}  // namespace detail

// One application of the word with guard checks at every stage; nullopt when guarded.
inline std::optional<PointC> guardedStep(const GreenEvaluator& ge, PointC x) {
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  for (size_t s = 0; s < ge.word.stages.size(); ++s) {
    for (auto& ip : ge.stageInd[s])
      if (ip.multiplicity > 0 && detail::indDistance(ip, x) < ge.guard) return std::nullopt;
    try {
      x = ge.word.stages[s].apply(x, conv);
    } catch (const detail::FactorVanishes&) {
      return std::nullopt;
    }
  }
  return x;
}

// log|P(x) / x^m0| with m0 the first exponent of P; pluriharmonic off {P = 0}, tropically max(0, ...).
inline double logRatio(const Laurent& P, const PointC& x) {
  auto conv = [](const Rational& r) { return CR::fromRational(r); };
  auto l = logOf(x);
  auto m0 = P.terms().begin()->first;
  return boost::multiprecision::log(abs(P.eval(x[0], x[1], conv))).convert_to<double>() + double(m0.first) * l[0] +
         double(m0.second) * l[1];
}

// Correction term of the series at q, given f(q):
// lambda^-1 (psi(Log f q) + sum c psi(w_C) log|P_C(q) / q^m0|) - psi(Log q).
inline double seriesTerm(const GreenEvaluator& ge, const PointC& q, const PointC& fq) {
  auto lq = logOf(q), lf = logOf(fq);
  double u = ge.psi(lf[0], lf[1]);
  for (auto& d : ge.data) u += toDouble(d.c) * ge.psi(toDouble(d.ray.x), toDouble(d.ray.y)) * logRatio(d.factor, q);
  return u / ge.lambda - ge.psi(lq[0], lq[1]);
}

inline PointC randomTorusPoint(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> U(0, 1);
  double t = 2 * M_PI * U(rng), r = radius * std::sqrt(U(rng));
  double a1 = 2 * M_PI * U(rng), a2 = 2 * M_PI * U(rng);
  return {polar(Real(std::exp(-r * std::cos(t))), Real(a1)), polar(Real(std::exp(-r * std::sin(t))), Real(a2))};
}

inline GreenEvaluator makeGreenEvaluator(const ToricMapWord& w, Direction dir, const GreenOptions& o = {}) {
  GreenEvaluator ge;
  ge.word = w;
  ge.dir = dir;
  ge.guard = o.guard;
  ge.maxDepth = o.maxDepth;
  ge.digits = o.digits;
  ge.maxDigits = o.maxDigits;
  ge.eig = eigenSupport(w, dir, 200, 1e-12, o.seed);
  ge.lambda = o.lambda ? *o.lambda : ge.eig.lambda;
  SupportD s = ge.eig.psi;
  ge.psi = [s](double a, double b) { return s(a, b); };
  // a conformal monomial map has the Euclidean norm as its invariant function, which is not piecewise linear
  if (w.allMonomial() && isConformal(w.monomialMatrix())) {
    ge.psi = [](double a, double b) { return std::hypot(a, b); };
    if (!o.lambda) ge.lambda = std::sqrt(std::abs(toDouble(w.monomialMatrix().det())));
  }
  {
    PrecisionScope scope(40);
    for (size_t s2 = 0; s2 < w.stages.size(); ++s2) {
      std::vector<IndPoint> v;
      detail::stageInd(w.stages[s2], s2, v);
      ge.stageInd.push_back(v);
    }
  }
  if (dir == Direction::Forward) {
    try {
      ge.data = contractionData(w, o.seed);
      ge.seriesAvailable = true;
    } catch (const DomainError&) {
      ge.seriesAvailable = false;
    }
  }
  if (dir == Direction::Backward && !(w.allMonomial() && isConformal(w.monomialMatrix()))) {
    // stage by stage: the coefficient is the support function pushed through the earlier stages
    ClassOperator B = backwardOperator(w, o.seed);
    SupportD cur = ge.eig.psi;
    for (size_t j = 0; j < w.stages.size(); ++j) {
      std::vector<GreenEvaluator::Correction> v;
      for (auto& d : B.ops[j].data)
        v.push_back({d.factor, toDouble(d.c) * cur(toDouble(d.ray.x), toDouble(d.ray.y))});
      ge.backCorr.push_back(v);
      cur = B.ops[j](cur);
    }
  }
  if (ge.seriesAvailable) {
    // sup of the correction term by seeded sampling over several scales
    PrecisionScope scope(ge.digits);
    std::mt19937_64 rng(o.seed);
    double mx = -1e300, mn = 1e300;
    const double radii[] = {0.5, 2, 5, 10, 20, 40};
    for (unsigned k = 0; k < o.kSamples; ++k) {
      PointC q = randomTorusPoint(rng, radii[k % 6]);
      auto fq = guardedStep(ge, q);
      if (!fq) continue;
      double v = seriesTerm(ge, q, *fq);
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    ge.phiMax = mx;
    ge.phiMin = mn;
    // without exceptional curves phi vanishes up to rounding and needs no margin
    ge.K = ge.data.empty() ? std::max(mx, 0.0) : mx + 0.05 + 0.1 * std::abs(mx);
  }
  return ge;
}

// Multiply the invariant function (and everything linear in it) by k > 0.
inline void rescale(GreenEvaluator& ge, double k) {
  HomogeneousFn f = ge.psi;
  ge.psi = [f, k](double a, double b) { return k * f(a, b); };
  ge.K *= k;
  ge.phiMin *= k;
  ge.phiMax *= k;
  for (auto& st : ge.backCorr)
    for (auto& c : st) c.coef *= k;
}

struct GreenValue {
  double value = 0, error = 0;
  unsigned depth = 0;
  std::string guard = "clear";  // clear | guarded | precision
  unsigned digits = 0;
  // escape form: lambda^-n psi(Log f^n p) - psi(Log p), n = 0..depth
  std::vector<double> escape;
  // series form: partial sums of the normalized correction series, n = 0..depth
  std::vector<double> series;
  double seriesRatio = 0;  // geometric decay rate of the series terms
  double maxTerm = 0;      // largest correction term before normalization; must stay below K
  std::vector<PointC> orbit;
};

namespace detail {

inline std::vector<PointC> forwardOrbit(const GreenEvaluator& ge, const PointC& p, unsigned depth, unsigned digits) {
  PrecisionScope scope(digits);
  std::vector<PointC> orbit = {{CR(Real(p[0].re), Real(p[0].im)), CR(Real(p[1].re), Real(p[1].im))}};
  for (unsigned n = 0; n < depth; ++n) {
    auto next = guardedStep(ge, orbit.back());
    if (!next) break;
    orbit.push_back(*next);
  }
  return orbit;
}

}  // namespace detail

// psi(Log p) + sum_{n<N} lambda^-n (phi - K)(f^n p). Without series data (exceptional curves that do not
// pull back to the word), the value is the escape form lambda^-N psi(Log f^N p).
inline GreenValue greenForward(const GreenEvaluator& ge, const PointC& p, std::optional<unsigned> depth = {}) {
  unsigned N = depth ? *depth : ge.maxDepth;
  GreenValue g;
  unsigned d = ge.digits;
  std::vector<PointC> orbit = detail::forwardOrbit(ge, p, N, d);
  // precision check: the same orbit at twice the precision
  while (ge.verifyPrecision) {
    unsigned d2 = std::min(2 * d, ge.maxDigits);
    auto fine = detail::forwardOrbit(ge, p, N, d2);
    size_t n = std::min(orbit.size(), fine.size());
    bool agree = orbit.size() == fine.size();
    for (size_t k = 0; k < n && agree; ++k) {
      auto a = logOf(orbit[k]), b = logOf(fine[k]);
      for (int i = 0; i < 2; ++i)
        if (std::abs(a[i] - b[i]) > 1e-12 * (1 + std::abs(b[i]))) agree = false;
    }
    orbit = std::move(fine);
    d = d2;
    if (agree) break;
    if (d2 == ge.maxDigits) {
      g.guard = "precision";
      break;
    }
  }
  g.digits = d;
  if (orbit.size() < N + 1 && g.guard == "clear") g.guard = "guarded";
  g.depth = unsigned(orbit.size()) - 1;
  PrecisionScope scope(d);
  auto l0 = logOf(orbit[0]);
  double base = ge.psi(l0[0], l0[1]);
  double scale = 1;
  for (size_t n = 0; n < orbit.size(); ++n) {
    auto l = logOf(orbit[n]);
    g.escape.push_back(ge.psi(l[0], l[1]) / scale - base);
    scale *= ge.lambda;
  }
  g.value = base + g.escape.back();
  if (g.escape.size() >= 2)
    g.error = std::abs(g.escape.back() - g.escape[g.escape.size() - 2]) / (ge.lambda - 1);
  if (ge.seriesAvailable) {
    // the potential of T*: psi o Log plus the partial sum of the K-shifted correction series
    double S = 0, w = 1;
    g.series.push_back(0);
    std::vector<double> terms;
    g.maxTerm = -1e300;
    for (size_t n = 0; n + 1 < orbit.size(); ++n) {
      double t = seriesTerm(ge, orbit[n], orbit[n + 1]);
      g.maxTerm = std::max(g.maxTerm, t);
      terms.push_back(std::abs(w * (t - ge.K)));
      S += w * (t - ge.K);
      g.series.push_back(S);
      w /= ge.lambda;
    }
    if (terms.size() >= 3 && terms.front() > 0)
      g.seriesRatio = std::pow(terms.back() / terms.front(), 1.0 / double(terms.size() - 1));
    g.value = base + S;
    // remaining terms are bounded by (K - phiMin) lambda^-n
    g.error = (ge.K - std::min(ge.phiMin, g.maxTerm)) * w * ge.lambda / (ge.lambda - 1);
  }
  g.orbit = std::move(orbit);
  return g;
}

// Non-increasing within slack.
inline bool monotoneNonIncreasing(const std::vector<double>& s, double slack = 1e-9) {
  for (size_t k = 1; k < s.size(); ++k)
    if (s[k] > s[k - 1] + slack) return false;
  return true;
}

struct BackwardValue {
  double value = 0, error = 0;
  double difference = 0;  // |G_N - G_{N-1}|
  unsigned depth = 0;
  size_t leaves = 0;
  double maxResidual = 0;
  std::vector<double> levels;  // G_0 .. G_N
};

// lambda^-N sum over the depth-N preimage tree of psi(Log q), plus the corrections on the curves the
// inverse stages contract, collected at every node of the tree. The error extrapolates the last
// difference geometrically with ratio dtop / lambda.
inline BackwardValue greenBackward(const GreenEvaluator& ge, const PointC& p, unsigned N, size_t budget = 400000) {
  BackwardValue b;
  double dt = toDouble(ge.word.dtop());
  if (std::pow(dt, double(N)) > double(budget)) throw DomainError("preimage tree exceeds the leaf budget");
  PrecisionScope scope(ge.digits);
  std::vector<ToricMapWord> single;
  for (auto& g : ge.word.stages) single.push_back(ToricMapWord{{g}, g.name});
  std::vector<PointC> cur = {{CR(Real(p[0].re), Real(p[0].im)), CR(Real(p[1].re), Real(p[1].im))}};
  auto l0 = logOf(cur[0]);
  b.levels.push_back(ge.psi(l0[0], l0[1]));
  double scale = 1, corr = 0;
  for (unsigned n = 1; n <= N; ++n) {
    scale *= ge.lambda;
    for (size_t s = single.size(); s-- > 0;) {
      if (s < ge.backCorr.size())
        for (auto& c : ge.backCorr[s])
          for (auto& y : cur) corr += c.coef * logRatio(c.factor, y) / scale;
      std::vector<PointC> next;
      for (auto& y : cur) {
        auto r = preimages(single[s], y, ge.digits);
        b.maxResidual = std::max(b.maxResidual, r.maxResidual);
        for (auto& x : r.points) next.push_back(x);
      }
      cur = std::move(next);
    }
    double sum = 0;
    for (auto& q : cur) {
      auto l = logOf(q);
      sum += ge.psi(l[0], l[1]);
    }
    b.levels.push_back(sum / scale + corr);
  }
  b.depth = N;
  b.leaves = cur.size();
  b.value = b.levels.back();
  if (N >= 1) {
    b.difference = std::abs(b.levels[N] - b.levels[N - 1]);
    double r = dt / ge.lambda;
    b.error = r < 1 ? b.difference * r / (1 - r) : std::numeric_limits<double>::infinity();
  }
  return b;
}

namespace detail {

using CplxD = std::complex<double>;

// A stage inverse compiled to flat double coefficient tables.
struct CompiledStage {
  bool monomial = false;
  IntMat2 M;
  std::vector<V2> reps;
  struct Term {
    long a, b;
    double c;
  };
  using Poly = std::vector<Term>;
  std::array<std::vector<Poly>, 2> num, den;

  static Poly compile(const Laurent& F) {
    Poly p;
    for (auto& [e, c] : F.terms()) p.push_back({e.first, e.second, toDouble(c)});
    return p;
  }
  static CplxD eval(const Poly& p, const std::array<CplxD, 2>& x) {
    CplxD s = 0;
    for (auto& t : p) s += t.c * ipowL(x[0], t.a) * ipowL(x[1], t.b);
    return s;
  }
  static CplxD ipowL(const CplxD& z, long k) {
    switch (k) {
      case 0: return 1;
      case 1: return z;
      case -1: return CplxD(1) / z;
      default: return Laurent::ipow(z, k);
    }
  }

  explicit CompiledStage(const ToricGenerator& g) {
    if (g.isMonomial()) {
      monomial = true;
      M = g.matrix();
      reps = cokernelReps(M);
      return;
    }
    const Factored& F = g.factored();
    const Factored* inv = nullptr;
    if (F.involution) inv = &F;
    else if (F.inverse) inv = &*F.inverse;
    else throw DomainError("no explicit inverse for a double preimage tree");
    for (int i = 0; i < 2; ++i) {
      for (auto& f : inv->num[i]) num[i].push_back(compile(f));
      for (auto& f : inv->den[i]) den[i].push_back(compile(f));
    }
  }

  template <class Out>
  void preimages(const std::array<CplxD, 2>& y, Out& out) const {
    if (monomial) {
      IntMat2 A = M.adj();
      double det = toDouble(M.det());
      CplxD l1 = std::log(y[0]), l2 = std::log(y[1]);
      const double twoPi = 2 * M_PI;
      double a = toDouble(A.a), b = toDouble(A.b), c = toDouble(A.c), d = toDouble(A.d);
      for (auto& k : reps) {
        CplxD b1 = l1 + CplxD(0, twoPi * toDouble(k.x)), b2 = l2 + CplxD(0, twoPi * toDouble(k.y));
        out.push_back({std::exp((a * b1 + b * b2) / det), std::exp((c * b1 + d * b2) / det)});
      }
      return;
    }
    std::array<CplxD, 2> x;
    for (int i = 0; i < 2; ++i) {
      CplxD n = 1, dd = 1;
      for (auto& p : num[i]) n *= eval(p, y);
      for (auto& p : den[i]) dd *= eval(p, y);
      x[i] = n / dd;
    }
    out.push_back(x);
  }
};

}  // namespace detail

// greenBackward in double precision; preimages contract in Log, so the range suffices.
// Construction throws DomainError when a stage has no explicit inverse.
class FastBackward {
 public:
  using CplxD = std::complex<double>;
  explicit FastBackward(const GreenEvaluator& ge) : ge_(ge) {
    for (auto& g : ge.word.stages) stages_.emplace_back(g);
    for (auto& st : ge.backCorr) {
      std::vector<Corr> v;
      for (auto& c : st) {
        auto m0 = c.factor.terms().begin()->first;
        v.push_back({detail::CompiledStage::compile(c.factor), double(m0.first), double(m0.second), c.coef});
      }
      corr_.push_back(v);
    }
  }
  double operator()(const std::array<CplxD, 2>& p, unsigned N) const {
    std::vector<std::array<CplxD, 2>> cur = {p}, next;
    double corr = 0, scale = 1;
    for (unsigned n = 0; n < N; ++n) {
      scale *= ge_.lambda;
      for (size_t s = stages_.size(); s-- > 0;) {
        if (s < corr_.size())
          for (auto& c : corr_[s])
            for (auto& y : cur)
              corr += c.coef *
                      (std::log(std::abs(detail::CompiledStage::eval(c.P, y))) -
                       c.m1 * std::log(std::abs(y[0])) - c.m2 * std::log(std::abs(y[1]))) /
                      scale;
        next.clear();
        for (auto& y : cur) stages_[s].preimages(y, next);
        std::swap(cur, next);
      }
    }
    double sum = 0;
    for (auto& q : cur) sum += ge_.psi(-double(std::log(std::abs(q[0]))), -double(std::log(std::abs(q[1]))));
    return sum / scale + corr;
  }

 private:
  struct Corr {
    detail::CompiledStage::Poly P;
    double m1, m2, coef;
  };
  const GreenEvaluator& ge_;
  std::vector<detail::CompiledStage> stages_;
  std::vector<std::vector<Corr>> corr_;
};

// ---- tropical approximation --------------------------------------------------------

struct TropApproxSample {
  uint64_t seed;
  double shell, logp1, logp2, error;
};

struct ShellStats {
  double shell = 0, margin = 0;
  size_t accepted = 0, rejected = 0;
  double max = 0, q50 = 0, q90 = 0, q99 = 0;
};

struct TropApproxResult {
  std::vector<ShellStats> shells;
  std::vector<TropApproxSample> samples;
};

// Distance proxy to an exceptional curve: |P(p)| relative to its largest monomial.
inline double normalizedValue(const Laurent& P, const PointC& x) {
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  Real mx = 0;
  for (auto& [e, c] : P.terms()) {
    Real t = abs(conv(c) * Laurent::ipow(x[0], e.first) * Laurent::ipow(x[1], e.second));
    mx = std::max(mx, t);
  }
  return (abs(P.eval(x[0], x[1], conv)) / mx).convert_to<double>();
}

// Points with |Log p| = shell (uniform direction and arguments), kept when every exceptional factor
// of every stage is at normalized distance > margin at the point where that stage is applied.
inline TropApproxResult tropicalApproxExperiment(const ToricMapWord& w, const std::vector<double>& shells,
                                                 unsigned samplesPerShell, double margin, uint64_t seed = 1,
                                                 unsigned digits = 64) {
  TropApproxResult res;
  PLMap A = tropicalComposite(w);
  PrecisionScope scope(digits);
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  for (double R : shells) {
    ShellStats st;
    st.shell = R;
    st.margin = margin;
    std::vector<double> errs;
    std::mt19937_64 rng(seed + uint64_t(R * 1000));
    std::uniform_real_distribution<double> U(0, 1);
    for (unsigned k = 0; k < samplesPerShell; ++k) {
      double t = 2 * M_PI * U(rng);
      double l1 = R * std::cos(t), l2 = R * std::sin(t);
      PointC x = {polar(Real(std::exp(-l1)), Real(2 * M_PI * U(rng))), polar(Real(std::exp(-l2)), Real(2 * M_PI * U(rng)))};
      bool keep = true;
      PointC y = x;
      try {
        for (auto& g : w.stages) {
          for (auto& P : g.exceptionalFactors())
            if (normalizedValue(P, y) <= margin) keep = false;
          y = g.apply(y, conv);
        }
      } catch (const detail::FactorVanishes&) {
        keep = false;
      }
      if (!keep) {
        ++st.rejected;
        continue;
      }
      auto ly = logOf(y);
      auto img = A(l1, l2);
      double e = std::hypot(ly[0] - img[0], ly[1] - img[1]);
      errs.push_back(e);
      res.samples.push_back({seed, R, l1, l2, e});
    }
    st.accepted = errs.size();
    std::sort(errs.begin(), errs.end());
    auto q = [&](double f) { return errs.empty() ? 0.0 : errs[std::min(errs.size() - 1, size_t(f * errs.size()))]; };
    st.max = errs.empty() ? 0 : errs.back();
    st.q50 = q(0.5);
    st.q90 = q(0.9);
    st.q99 = q(0.99);
    res.shells.push_back(st);
  }
  return res;
}

}  // namespace toritrop

