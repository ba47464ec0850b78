#pragma once
// Discrete mixed Monge-Ampere measures on (log-radius, angle)^2 grids, the Haar test,
// the equilibrium measure and its invariance and correlation diagnostics.

#include "currents.hpp"

#include <atomic>
#include <complex>
#include <mutex>
#include <thread>

namespace toritrop {

// z_j = exp(r_j + i t_j); Log z = (-r1, -r2).
struct GridSpec {
  std::array<double, 2> lo{-4, -4}, hi{4, 4};
  unsigned nr = 20, nt = 20;
  size_t maxNodes = size_t(1) << 26;

  void validate() const {
    if (nr < 8 || nt < 8) throw DomainError("grid resolutions must be at least 8");
    for (int k = 0; k < 2; ++k)
      if (!(std::isfinite(lo[k]) && std::isfinite(hi[k]) && lo[k] < hi[k])) throw DomainError("bad grid range");
    if (nodes() > maxNodes) throw DomainError("grid exceeds the node budget");
  }
  size_t nodes() const { return size_t(nr) * nr * nt * nt; }
  double hr(int k) const { return (hi[k] - lo[k]) / (nr - 1); }
  double ht() const { return 2 * M_PI / nt; }
  double r(int k, unsigned i) const { return lo[k] + hr(k) * i; }
  double theta(unsigned j) const { return ht() * j; }
  double cellVolume() const { return hr(0) * hr(1) * ht() * ht(); }
  size_t index(unsigned i1, unsigned j1, unsigned i2, unsigned j2) const {
    return ((size_t(i1) * nt + j1) * nr + i2) * nt + j2;
  }
  // nodes carrying a cell: the Hessian stencil reaches two nodes out
  bool interior(unsigned i1, unsigned i2) const { return i1 > 1 && i2 > 1 && i1 + 2 < nr && i2 + 2 < nr; }
  bool operator==(const GridSpec& o) const { return lo == o.lo && hi == o.hi && nr == o.nr && nt == o.nt; }
};

struct NodePoint {
  double r1, t1, r2, t2;
  std::array<std::complex<double>, 2> z() const { return {std::polar(std::exp(r1), t1), std::polar(std::exp(r2), t2)}; }
};

template <class F>
void forEachNode(const GridSpec& g, F f) {
  for (unsigned i1 = 0; i1 < g.nr; ++i1)
    for (unsigned j1 = 0; j1 < g.nt; ++j1)
      for (unsigned i2 = 0; i2 < g.nr; ++i2)
        for (unsigned j2 = 0; j2 < g.nt; ++j2)
          f(g.index(i1, j1, i2, j2), i1, j1, i2, j2, NodePoint{g.r(0, i1), g.theta(j1), g.r(1, i2), g.theta(j2)});
}

struct GridPotential {
  GridSpec grid;
  std::vector<double> values;
  std::vector<uint8_t> masked;
  size_t maskedCount = 0;
  std::string provenance;
  std::string warning;
};

using PotentialFn = std::function<std::optional<double>(const NodePoint&)>;

namespace detail {

// Neighbour offsets along the four axes; angles wrap, radii clamp (returns false off the grid).
inline bool step(const GridSpec& g, std::array<unsigned, 4>& c, int axis, int d) {
  bool radial = axis == 0 || axis == 2;
  if (radial) {
    long v = long(c[axis]) + d;
    if (v < 0 || v >= long(g.nr)) return false;
    c[axis] = unsigned(v);
  } else {
    c[axis] = unsigned((long(c[axis]) + d + long(g.nt)) % long(g.nt));
  }
  return true;
}

inline size_t idx(const GridSpec& g, const std::array<unsigned, 4>& c) { return g.index(c[0], c[1], c[2], c[3]); }

}  // namespace detail

// Masked nodes (nullopt) are filled by repeated neighbour averaging and flagged. With workers > 1 the
// first radial index is split across threads, so f must be safe to call concurrently.
inline GridPotential samplePotential(const PotentialFn& f, const GridSpec& g, std::string provenance,
                                     unsigned workers = 1) {
  g.validate();
  GridPotential u;
  u.grid = g;
  u.provenance = std::move(provenance);
  u.values.assign(g.nodes(), 0.0);
  u.masked.assign(g.nodes(), 0);
  auto slab = [&](unsigned i1) {
    for (unsigned j1 = 0; j1 < g.nt; ++j1)
      for (unsigned i2 = 0; i2 < g.nr; ++i2)
        for (unsigned j2 = 0; j2 < g.nt; ++j2) {
          size_t k = g.index(i1, j1, i2, j2);
          auto v = f(NodePoint{g.r(0, i1), g.theta(j1), g.r(1, i2), g.theta(j2)});
          if (v && std::isfinite(*v)) u.values[k] = *v;
          else u.masked[k] = 1;
        }
  };
  workers = std::max(1u, std::min(workers, g.nr));
  if (workers == 1) {
    for (unsigned i1 = 0; i1 < g.nr; ++i1) slab(i1);
  } else {
    std::atomic<unsigned> next{0};
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        try {
          for (unsigned i; (i = next++) < g.nr;) slab(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }
  for (uint8_t x : u.masked) u.maskedCount += x;
  double frac = double(u.maskedCount) / double(g.nodes());
  if (frac > 0.10) throw StructuralError("more than 10% of the grid is masked");
  if (frac > 0.01) u.warning = "more than 1% of the grid is masked";
  std::vector<uint8_t> known(g.nodes());
  for (size_t k = 0; k < known.size(); ++k) known[k] = !u.masked[k];
  for (size_t left = u.maskedCount; left > 0;) {
    size_t filled = 0;
    forEachNode(g, [&](size_t k, unsigned i1, unsigned j1, unsigned i2, unsigned j2, const NodePoint&) {
      if (known[k]) return;
      double s = 0;
      int n = 0;
      for (int axis = 0; axis < 4; ++axis)
        for (int d : {-1, 1}) {
          std::array<unsigned, 4> c = {i1, j1, i2, j2};
          if (!detail::step(g, c, axis, d)) continue;
          size_t q = detail::idx(g, c);
          if (known[q] == 1) s += u.values[q], ++n;
        }
      if (n > 0) u.values[k] = s / n, known[k] = 2, ++filled;
    });
    for (auto& x : known)
      if (x == 2) x = 1;
    if (filled == 0) throw StructuralError("masked region has no unmasked neighbours");
    left -= filled;
  }
  return u;
}

// One [1, 2, 1] / 4 pass along every axis; affine functions of the log-radii are preserved.
inline GridPotential mollify(const GridPotential& u) {
  const GridSpec& g = u.grid;
  GridPotential out = u;
  std::vector<double> cur = u.values, next(cur.size());
  for (int axis = 0; axis < 4; ++axis) {
    forEachNode(g, [&](size_t k, unsigned i1, unsigned j1, unsigned i2, unsigned j2, const NodePoint&) {
      std::array<unsigned, 4> a = {i1, j1, i2, j2}, b = a;
      if (!detail::step(g, a, axis, -1) || !detail::step(g, b, axis, 1)) {
        next[k] = cur[k];
        return;
      }
      next[k] = 0.25 * cur[detail::idx(g, a)] + 0.5 * cur[k] + 0.25 * cur[detail::idx(g, b)];
    });
    std::swap(cur, next);
  }
  out.values = std::move(cur);
  return out;
}

struct DiscreteMeasure {
  GridSpec grid;
  std::vector<double> weights;  // per node; zero on the radial boundary
  double mass = 0, positive = 0, negative = 0;
  double ddcConstant = 4 / (M_PI * M_PI);  // density factor in (r, t) coordinates for dd^c log|z| = Dirac
  bool signedFlag = false;
  size_t zeroedCells = 0;  // cells whose stencil touches a masked node
};

namespace detail {

struct Hessian {
  double a11, a22;
  std::complex<double> a12;
};

inline Hessian complexHessian(const GridSpec& g, const std::vector<double>& u, const std::array<unsigned, 4>& c) {
  const double h[4] = {g.hr(0), g.ht(), g.hr(1), g.ht()};
  auto at = [&](std::initializer_list<std::pair<int, int>> moves) {
    std::array<unsigned, 4> p = c;
    for (auto [axis, d] : moves) step(g, p, axis, d);
    return u[idx(g, p)];
  };
  double u0 = u[idx(g, c)];
  // composed centered differences: the discrete determinant then sums to boundary terms
  auto second = [&](int a) { return (at({{a, 2}}) - 2 * u0 + at({{a, -2}})) / (4 * h[a] * h[a]); };
  auto cross = [&](int a, int b) {
    return (at({{a, 1}, {b, 1}}) - at({{a, 1}, {b, -1}}) - at({{a, -1}, {b, 1}}) + at({{a, -1}, {b, -1}})) /
           (4 * h[a] * h[b]);
  };
  Hessian H;
  H.a11 = 0.25 * (second(0) + second(1));
  H.a22 = 0.25 * (second(2) + second(3));
  H.a12 = 0.25 * std::complex<double>(cross(0, 2) + cross(1, 3), cross(0, 3) - cross(1, 2));
  return H;
}

inline bool stencilMasked(const GridSpec& g, const std::vector<uint8_t>& m, const std::array<unsigned, 4>& c) {
  if (m[idx(g, c)]) return true;
  for (int a = 0; a < 4; ++a)
    for (int da : {-2, 2}) {
      std::array<unsigned, 4> p = c;
      step(g, p, a, da);
      if (m[idx(g, p)]) return true;
    }
  for (int a = 0; a < 4; ++a)
    for (int da : {-1, 1}) {
      std::array<unsigned, 4> p = c;
      step(g, p, a, da);
      for (int b = a + 1; b < 4; ++b)
        for (int db : {-1, 1}) {
          std::array<unsigned, 4> q = p;
          step(g, q, b, db);
          if (m[idx(g, q)]) return true;
        }
    }
  return false;
}

}  // namespace detail

// Cell weights (4/pi^2)(u11 v22 + u22 v11 - 2 Re(u12 conj v12)) * cell volume; every second derivative
// is a product of two centered first differences.
inline DiscreteMeasure mixedMongeAmpere(const GridPotential& U, const GridPotential& V) {
  if (!(U.grid == V.grid)) throw DomainError("mixedMongeAmpere needs a common grid");
  const GridSpec& g = U.grid;
  DiscreteMeasure mu;
  mu.grid = g;
  mu.weights.assign(g.nodes(), 0.0);
  double vol = g.cellVolume();
  forEachNode(g, [&](size_t k, unsigned i1, unsigned j1, unsigned i2, unsigned j2, const NodePoint&) {
    if (!g.interior(i1, i2)) return;
    std::array<unsigned, 4> c = {i1, j1, i2, j2};
    if ((U.maskedCount && detail::stencilMasked(g, U.masked, c)) ||
        (V.maskedCount && detail::stencilMasked(g, V.masked, c))) {
      ++mu.zeroedCells;
      return;
    }
    auto a = detail::complexHessian(g, U.values, c), b = detail::complexHessian(g, V.values, c);
    double dens = a.a11 * b.a22 + a.a22 * b.a11 - 2 * std::real(a.a12 * std::conj(b.a12));
    mu.weights[k] = mu.ddcConstant * dens * vol;
  });
  for (double w : mu.weights) {
    mu.mass += w;
    if (w > 0) mu.positive += w;
    else mu.negative -= w;
  }
  mu.signedFlag = mu.negative > 1e-6 * std::abs(mu.mass);
  return mu;
}

template <class Pred>
double massWhere(const DiscreteMeasure& mu, Pred pred) {
  double s = 0;
  forEachNode(mu.grid, [&](size_t k, unsigned, unsigned, unsigned, unsigned, const NodePoint& p) {
    if (mu.weights[k] != 0 && pred(p)) s += mu.weights[k];
  });
  return s;
}

// ---- homogeneous potentials and the Haar test -----------------------------------------

inline PotentialFn homogeneousPotential(HomogeneousFn psi) {
  return [psi](const NodePoint& p) -> std::optional<double> { return psi(-p.r1, -p.r2); };
}

inline GridPotential smoothed(GridPotential u, unsigned passes) {
  for (unsigned k = 0; k < passes; ++k) u = mollify(u);
  return u;
}

inline DiscreteMeasure homogeneousMeasure(const HomogeneousFn& a, const HomogeneousFn& b, const GridSpec& g,
                                          unsigned smoothing = 0) {
  auto U = smoothed(samplePotential(homogeneousPotential(a), g, "homogeneous"), smoothing);
  auto V = smoothed(samplePotential(homogeneousPotential(b), g, "homogeneous"), smoothing);
  return mixedMongeAmpere(U, V);
}

struct HaarResult {
  DiscreteMeasure mu;
  double mass = 0, intersection = 0, concentration = 0;
};

inline HomogeneousFn asFn(const SupportD& s) {
  return [s](double x, double y) { return s(x, y); };
}

// Mass fraction within one radial cell of the real torus.
inline double realTorusConcentration(const DiscreteMeasure& mu) {
  double h1 = mu.grid.hr(0), h2 = mu.grid.hr(1);
  double near = massWhere(mu, [&](const NodePoint& p) {
    return std::abs(p.r1) <= h1 * (1 + 1e-9) && std::abs(p.r2) <= h2 * (1 + 1e-9);
  });
  return mu.mass != 0 ? near / mu.mass : 0;
}

inline HaarResult haarTest(const SupportD& psi1, const SupportD& psi2, const GridSpec& g, unsigned smoothing = 0) {
  HaarResult r;
  r.mu = homogeneousMeasure(asFn(psi1), asFn(psi2), g, smoothing);
  r.mass = r.mu.mass;
  r.intersection = pairing(psi1, psi2);
  r.concentration = realTorusConcentration(r.mu);
  return r;
}

struct HaarSequence {
  std::vector<unsigned> resolutions;
  std::vector<double> masses, concentrations;
  std::vector<double> ratios;  // |m_{k+1} - m_k| / |m_k - m_{k-1}|
  double intersection = 0;
  bool underResolved = false;  // last doubling moved the mass by more than 5%
};

// Radial resolutions 2^k + 1 over a fixed box, so that the node set nests under doubling.
inline HaarSequence haarSequence(const SupportD& psi1, const SupportD& psi2, double halfWidth,
                                 const std::vector<unsigned>& resolutions, unsigned nt = 8) {
  HaarSequence s;
  s.resolutions = resolutions;
  for (unsigned n : resolutions) {
    GridSpec g;
    g.lo = {-halfWidth, -halfWidth};
    g.hi = {halfWidth, halfWidth};
    g.nr = n;
    g.nt = nt;
    auto r = haarTest(psi1, psi2, g);
    s.masses.push_back(r.mass);
    s.concentrations.push_back(r.concentration);
    s.intersection = r.intersection;
  }
  for (size_t k = 2; k < s.masses.size(); ++k) {
    double a = std::abs(s.masses[k - 1] - s.masses[k - 2]), b = std::abs(s.masses[k] - s.masses[k - 1]);
    s.ratios.push_back(a > 0 ? b / a : 0);
  }
  size_t n = s.masses.size();
  if (n >= 2) s.underResolved = std::abs(s.masses[n - 1] - s.masses[n - 2]) > 0.05 * std::abs(s.masses[n - 1]);
  return s;
}

// ---- the equilibrium measure ------------------------------------------------------------

struct EquilibriumOptions {
  unsigned depthForward = 4, depthBackward = 4;
  double guard = 1e-6;
  unsigned digits = 20;
  uint64_t seed = 3;
  std::vector<double> tubeWidths = {0.2, 0.1, 0.05};
  std::vector<double> boxFractions = {0.25, 0.5, 0.75, 1.0};
  unsigned smoothing = 2;  // mollification passes applied to both potentials
  // threads for the backward potential; the forward one stays serial because the MPFR default
  // precision is process-global
  unsigned workers = 1;
};

struct TubeMass {
  std::string curve;
  std::vector<double> widths, masses;
  bool decreasing = true;
};

struct EquilibriumReport {
  DiscreteMeasure mu;
  double lambda = 0, normalization = 0;  // pairing of the unnormalized invariant functions
  double mass = 0, negativity = 0;
  std::vector<std::pair<double, double>> boxTrend;  // (half-width fraction, mass)
  bool boxMonotone = true;
  std::vector<TubeMass> tubes;
  size_t maskedForward = 0, maskedBackward = 0;
  std::string warning;
  std::vector<Laurent> curves;
  SupportD psiForward, psiBackward;  // normalized
};

// |P(z)| against its largest monomial.
inline double normalizedValueD(const Laurent& P, const std::array<std::complex<double>, 2>& z) {
  std::complex<double> s = 0;
  double mx = 0;
  for (auto& [e, c] : P.terms()) {
    std::complex<double> t = toDouble(c) * std::pow(z[0], double(e.first)) * std::pow(z[1], double(e.second));
    s += t;
    mx = std::max(mx, std::abs(t));
  }
  return std::abs(s) / mx;
}

inline void checkSmallTopologicalDegree(const ToricMapWord& w, double lambda, double err) {
  if (w.allMonomial() || !(lambda - err > toDouble(w.dtop())))
    throw DomainError("small topological degree required (lambda_1 > dtop)");
}

inline EquilibriumReport equilibriumMeasure(const ToricMapWord& w, const GridSpec& g, const EquilibriumOptions& o = {}) {
  if (w.allMonomial()) throw DomainError("small topological degree required (lambda_1 > dtop)");
  g.validate();
  GreenOptions go;
  go.guard = o.guard;
  go.digits = o.digits;
  go.seed = o.seed;
  GreenEvaluator F = makeGreenEvaluator(w, Direction::Forward, go);
  GreenEvaluator B = makeGreenEvaluator(w, Direction::Backward, go);
  checkSmallTopologicalDegree(w, F.lambda, F.eig.lambdaError);
  EquilibriumReport rep;
  rep.lambda = F.lambda;
  rep.normalization = pairing(F.eig.psi, B.eig.psi);
  if (!(rep.normalization > 0)) throw StructuralError("invariant classes have non-positive intersection");
  double k = 1 / std::sqrt(rep.normalization);
  rep.psiForward = F.eig.psi;
  rep.psiForward *= k;
  rep.psiBackward = B.eig.psi;
  rep.psiBackward *= k;
  rescale(F, k);
  rescale(B, k);

  if (o.depthForward == 0 && o.depthBackward == 0) {
    rep.mu = haarTest(rep.psiForward, rep.psiBackward, g, o.smoothing).mu;
  } else {
    F.digits = o.digits;
    F.verifyPrecision = false;
    PotentialFn gf = [&](const NodePoint& p) -> std::optional<double> {
      PrecisionScope scope(F.digits);
      PointC x = {polar(Real(std::exp(p.r1)), Real(p.t1)), polar(Real(std::exp(p.r2)), Real(p.t2))};
      auto v = greenForward(F, x, o.depthForward);
      if (v.guard != "clear") return std::nullopt;
      return v.value;
    };
    std::optional<FastBackward> fast;
    try {
      fast.emplace(B);
    } catch (const DomainError&) {
    }
    PotentialFn gb = [&](const NodePoint& p) -> std::optional<double> {
      auto z = p.z();
      try {
        if (fast) return (*fast)(z, o.depthBackward);
        PointC x = {CR(Real(z[0].real()), Real(z[0].imag())), CR(Real(z[1].real()), Real(z[1].imag()))};
        return greenBackward(B, x, o.depthBackward).value;
      } catch (const DomainError&) {
        return std::nullopt;
      }
    };
    auto U = smoothed(samplePotential(gf, g, "greenForward"), o.smoothing);
    auto V = smoothed(samplePotential(gb, g, "greenBackward", fast ? o.workers : 1), o.smoothing);
    rep.maskedForward = U.maskedCount;
    rep.maskedBackward = V.maskedCount;
    rep.warning = U.warning.empty() ? V.warning : U.warning;
    rep.mu = mixedMongeAmpere(U, V);
  }
  rep.mass = rep.mu.mass;
  rep.negativity = rep.mu.mass != 0 ? rep.mu.negative / std::abs(rep.mu.mass) : 0;

  double c1 = 0.5 * (g.lo[0] + g.hi[0]), c2 = 0.5 * (g.lo[1] + g.hi[1]);
  double w1 = 0.5 * (g.hi[0] - g.lo[0]), w2 = 0.5 * (g.hi[1] - g.lo[1]);
  for (double f : o.boxFractions) {
    double m = massWhere(rep.mu, [&](const NodePoint& p) {
      return std::abs(p.r1 - c1) <= f * w1 + 1e-12 && std::abs(p.r2 - c2) <= f * w2 + 1e-12;
    });
    if (!rep.boxTrend.empty() && m < rep.boxTrend.back().second) rep.boxMonotone = false;
    rep.boxTrend.push_back({f, m});
  }

  for (auto& e : excIndData(w).exc)
    if (e.contracted) rep.curves.push_back(e.pulled ? *e.pulled : e.factor);
  for (auto& P : rep.curves) {
    TubeMass t;
    t.curve = P.str();
    for (double width : o.tubeWidths) {
      double m = massWhere(rep.mu, [&](const NodePoint& p) { return normalizedValueD(P, p.z()) < width; });
      if (!t.masses.empty() && m > t.masses.back()) t.decreasing = false;
      t.widths.push_back(width);
      t.masses.push_back(m);
    }
    rep.tubes.push_back(t);
  }
  return rep;
}

// ---- sampling from a discrete measure -----------------------------------------------------

using TestFn = std::function<double(const std::array<double, 2>& logp)>;

// Smooth bump in Log coordinates.
inline TestFn bump(std::array<double, 2> center, double radius) {
  return [=](const std::array<double, 2>& l) {
    double d2 = ((l[0] - center[0]) * (l[0] - center[0]) + (l[1] - center[1]) * (l[1] - center[1])) / (radius * radius);
    return d2 < 1 ? std::exp(1 - 1 / (1 - d2)) : 0.0;
  };
}

class MeasureSampler {
 public:
  MeasureSampler(const DiscreteMeasure& mu, uint64_t seed) : mu_(mu), rng_(seed) {
    std::vector<double> w(mu.weights.size());
    for (size_t k = 0; k < w.size(); ++k) w[k] = std::max(0.0, mu.weights[k]);
    dist_ = std::discrete_distribution<size_t>(w.begin(), w.end());
    nodes_.resize(w.size());
    forEachNode(mu.grid, [&](size_t k, unsigned, unsigned, unsigned, unsigned, const NodePoint& p) { nodes_[k] = p; });
  }
  // A uniform point in a cell drawn by positive weight.
  NodePoint operator()() {
    const GridSpec& g = mu_.grid;
    NodePoint p = nodes_[dist_(rng_)];
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    p.r1 += U(rng_) * g.hr(0);
    p.t1 += U(rng_) * g.ht();
    p.r2 += U(rng_) * g.hr(1);
    p.t2 += U(rng_) * g.ht();
    return p;
  }

 private:
  const DiscreteMeasure& mu_;
  std::mt19937_64 rng_;
  std::discrete_distribution<size_t> dist_;
  std::vector<NodePoint> nodes_;
};

namespace detail {

// Log of f^n(p), or nullopt when an exceptional factor vanishes.
inline std::optional<std::array<double, 2>> logIterate(const ToricMapWord& w, const NodePoint& p, unsigned n,
                                                       unsigned digits = 20) {
  PrecisionScope scope(digits);
  PointC x = {polar(Real(std::exp(p.r1)), Real(p.t1)), polar(Real(std::exp(p.r2)), Real(p.t2))};
  auto conv = [](const Rational& q) { return CR::fromRational(q); };
  try {
    for (unsigned k = 0; k < n; ++k) x = evalWordIn(w, x, conv);
  } catch (const ExceptionalHit&) {
    return std::nullopt;
  }
  return logOf(x);
}

}  // namespace detail

struct InvarianceRow {
  double integral = 0, pushed = 0, difference = 0, relative = 0, stderr_ = 0;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;
  size_t samples = 0, dropped = 0;
};

// Importance sampling from the positive part of mu; both integrals share the sample points.
inline InvarianceReport invarianceTest(const DiscreteMeasure& mu, const ToricMapWord& w, const std::vector<TestFn>& fns,
                                       size_t samples, uint64_t seed) {
  if (!(mu.positive > 0)) throw StructuralError("sampler starvation: measure has no positive mass");
  MeasureSampler S(mu, seed);
  InvarianceReport rep;
  rep.rows.resize(fns.size());
  std::vector<double> s0(fns.size()), s1(fns.size()), sd(fns.size()), sd2(fns.size());
  for (size_t k = 0; k < samples; ++k) {
    NodePoint p = S();
    auto fp = detail::logIterate(w, p, 1);
    if (!fp) {
      ++rep.dropped;
      continue;
    }
    std::array<double, 2> lp = {-p.r1, -p.r2};
    for (size_t i = 0; i < fns.size(); ++i) {
      double a = fns[i](lp), b = fns[i](*fp);
      s0[i] += a;
      s1[i] += b;
      sd[i] += b - a;
      sd2[i] += (b - a) * (b - a);
    }
    ++rep.samples;
  }
  double n = double(rep.samples);
  for (size_t i = 0; i < fns.size(); ++i) {
    auto& r = rep.rows[i];
    r.integral = mu.positive * s0[i] / n;
    r.pushed = mu.positive * s1[i] / n;
    r.difference = r.pushed - r.integral;
    double mean = sd[i] / n, var = std::max(0.0, sd2[i] / n - mean * mean);
    r.stderr_ = mu.positive * std::sqrt(var / n);
    r.relative = r.integral != 0 ? std::abs(r.difference) / std::abs(r.integral) : 0;
  }
  return rep;
}

struct CorrelationReport {
  std::vector<double> C, error;
  bool inconclusive = false;
  size_t samples = 0;
};

// C_n = E[alpha(f^n p) beta(p)] - E[alpha] E[beta] under the normalized positive part of mu.
inline CorrelationReport correlationExperiment(const DiscreteMeasure& mu, const ToricMapWord& w, const TestFn& alpha,
                                               const TestFn& beta, unsigned nMax, size_t samples, uint64_t seed) {
  if (!(mu.positive > 0)) throw StructuralError("sampler starvation: measure has no positive mass");
  MeasureSampler S(mu, seed);
  std::vector<NodePoint> pts(samples);
  for (auto& p : pts) p = S();
  double ea = 0, eb = 0;
  for (auto& p : pts) {
    std::array<double, 2> lp = {-p.r1, -p.r2};
    ea += alpha(lp);
    eb += beta(lp);
  }
  ea /= double(samples);
  eb /= double(samples);
  CorrelationReport rep;
  rep.samples = samples;
  for (unsigned n = 0; n <= nMax; ++n) {
    double s = 0, s2 = 0;
    for (auto& p : pts) {
      auto l = detail::logIterate(w, p, n);
      double x = l ? alpha(*l) * beta({-p.r1, -p.r2}) : 0.0;
      s += x;
      s2 += x * x;
    }
    double m = s / double(samples), var = std::max(0.0, s2 / double(samples) - m * m);
    rep.C.push_back(m - ea * eb);
    rep.error.push_back(std::sqrt(var / double(samples)));
  }
  rep.inconclusive = true;
  for (unsigned n = 1; n <= nMax; ++n)
    if (std::abs(rep.C[n]) > rep.error[n]) rep.inconclusive = false;
  return rep;
}

}  // namespace toritrop
