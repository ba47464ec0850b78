// toritrop: command-line front end. Each subcommand writes its artifacts and a manifest.json into
// --out. Exit codes: 0 ok, 1 input error, 2 a mathematical hypothesis failed, 3 budget or precision
// exhausted.

#include "toritrop/io.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <thread>

using namespace toritrop;
namespace fs = std::filesystem;

namespace {

using toritrop::toJson;

std::string sha256(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream s;
  for (unsigned i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

// Shared flags. Unset numeric flags take per-command defaults.
struct Options {
  std::string preset = "bdj", word, out = "out";
  uint64_t seed = 1;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  unsigned depth = 0, grid = 0;
  long budget = 0;
  double tol = 0;
  CLI::Option *depthOpt = nullptr, *gridOpt = nullptr, *budgetOpt = nullptr, *tolOpt = nullptr, *wordOpt = nullptr;

  unsigned depthOr(unsigned d) const { return depthOpt->count() ? depth : d; }
  unsigned gridOr(unsigned d) const { return gridOpt->count() ? grid : d; }
  long budgetOr(long d) const { return budgetOpt->count() ? budget : d; }
  double tolOr(double d) const { return tolOpt->count() ? tol : d; }
};

// Collects the manifest while a command runs.
class Run {
 public:
  Run(std::string command, const Options& o) : command_(std::move(command)), dir_(o.out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string());
    config_ = {{"seed", o.seed}, {"workers", o.workers}};
    if (o.wordOpt->count()) config_["word"] = o.word;
    else config_["preset"] = o.preset;
  }
  Json& config() { return config_; }
  void tolerance(double t) { tolerance_ = t; }

  template <class F>
  auto stage(const std::string& name, F f) {
    current_ = name;
    auto t0 = std::chrono::steady_clock::now();
    auto done = [&] {
      double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      stages_.push_back({{"name", name}, {"seconds", s}});
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      done();
    } else {
      auto r = f();
      done();
      return r;
    }
  }

  fs::path path(const std::string& file) {
    outputs_.push_back(file);
    return dir_ / file;
  }
  void json(const std::string& file, const Json& j) {
    std::ofstream(path(file)) << j.dump(2) << "\n";
  }
  void csv(const std::string& file, const CsvTable& t) { writeCsv(path(file).string(), t); }

  void finish(int code, const std::string& error = "") {
    Json outs = Json::array();
    for (auto& f : outputs_)
      if (fs::exists(dir_ / f)) outs.push_back({{"file", f}, {"sha256", sha256(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
    Json m = document("manifest", {{"toolkit", kToolkitVersion},
                                   {"command", command_},
                                   {"config", config_},
                                   {"tolerance", tolerance_},
                                   {"stages", stages_},
                                   {"outputs", outs},
                                   {"exitCode", code},
                                   {"status", code == 0 ? "ok" : "failed"}});
    if (code != 0) m["failedStage"] = current_, m["error"] = error;
    std::ofstream(dir_ / "manifest.json") << m.dump(2) << "\n";
  }

 private:
  std::string command_;
  fs::path dir_;
  Json config_, stages_ = Json::array();
  std::vector<std::string> outputs_;
  std::string current_ = "setup";
  double tolerance_ = 0;
};

ToricMapWord loadInput(const Options& o) { return o.wordOpt->count() ? loadWord(o.word) : presetWord(o.preset); }

Json toJson(const RotationEstimate& r) {
  return {{"midpoint", toJson(r.midpoint)}, {"midpointDecimal", toDouble(r.midpoint)}, {"radius", r.radius},
          {"exact", r.exact}, {"iterations", r.iterations}};
}

Json toJson(const EigenSupport& e) {
  return {{"lambda", e.lambda}, {"lambdaError", e.lambdaError}, {"residual", e.residual}, {"iterations", e.iterations},
          {"converged", e.converged}, {"convex", e.convex}, {"psi", toritrop::toJson(e.psi)}};
}

// ---- commands -----------------------------------------------------------------------

void cmdTropicalize(const Options& o, Run& run) {
  long height = o.budgetOr(24);
  run.config()["budget"] = height;
  auto w = run.stage("load", [&] { return loadInput(o); });
  Integer rho = run.stage("verifyToric", [&] { return verifyToric(w, o.seed); });
  PLMap A = run.stage("tropicalize", [&] { return tropicalize(w, height, o.seed); });
  bool composeOk = run.stage("composeCheck", [&] {
    PLMap C = tropicalize(ToricMapWord{{w.stages[0]}, ""}, height, o.seed);
    for (size_t s = 1; s < w.stages.size(); ++s) C = composePL(tropicalize(ToricMapWord{{w.stages[s]}, ""}, height, o.seed), C);
    return C == A;
  });
  Json sectors = Json::array();
  for (size_t i = 0; i < A.pieces(); ++i) {
    Cone2 c = A.cone(i);
    sectors.push_back({{"cone", Json::array({toJson(c.r1), toJson(c.r2)})}, {"det", toJson(A.matrix(i).det())}});
  }
  Json j = document("plmap", toJson(A));
  run.json("plmap.json", j);
  run.json("tropicalize.json", document("tropicalize", {{"word", w.name},
                                                        {"rho", toJson(rho)},
                                                        {"sectors", sectors},
                                                        {"homeomorphism", isHomeo(A)},
                                                        {"composeCheck", composeOk ? "PASS" : "FAIL"}}));
  std::cout << "rho " << rho << ", " << A.pieces() << " pieces, compose check " << (composeOk ? "PASS" : "FAIL") << "\n";
}

void cmdWord(const Options& o, Run& run) {
  auto w = run.stage("load", [&] { return loadInput(o); });
  run.json("word.json", toJson(w));
  std::cout << w.name << ": " << w.stages.size() << " stages, rho " << w.rho() << ", dtop " << w.dtop() << "\n";
}

void cmdRotnum(const Options& o, Run& run) {
  long height = o.budgetOr(1000);
  unsigned period = o.depthOr(12);
  double tol = o.tolOr(1e-7);
  run.config().update({{"budget", height}, {"depth", period}, {"tol", tol}});
  run.tolerance(tol);
  auto w = run.stage("load", [&] { return loadInput(o); });
  PLMap A = run.stage("tropicalize", [&] { return tropicalize(w, 24, o.seed); });
  if (!isHomeo(A)) throw DomainError("the tropicalization is not a homeomorphism of the plane");
  auto r = run.stage("rotationNumber", [&] { return rotationNumber(A, 0, tol, period, height); });
  auto per = run.stage("periodicRay", [&] { return findPeriodicRay(A, Integer(height), period); });
  Json j = toJson(r);
  j["periodicRay"] = per ? Json{{"ray", toJson(per->ray)}, {"period", per->period}} : Json(nullptr);
  run.json("rotnum.json", document("rotnum", j));
  std::cout << "rotation number " << toDouble(r.midpoint) << " +- " << r.radius << (r.exact ? " (exact)" : "") << "\n";
}

int cmdDegrees(const Options& o, Run& run) {
  unsigned n = o.depthOr(5);
  long budget = o.budgetOr(1L << 40);
  run.config().update({{"depth", n}, {"budget", budget}});
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto d = run.stage("degreeSequence", [&] { return degreeSequence(w, n, o.seed, budget); });
  auto& deg = d.line.degrees;
  CsvTable t{"degrees", {"n", "deg", "ratio", "root_estimate", "complete"}, {}};
  for (size_t i = 0; i < deg.size(); ++i) {
    double ratio = i ? toDouble(deg[i]) / toDouble(deg[i - 1]) : toDouble(deg[i]);
    t.rows.push_back({csvCell(i + 1), csvCell(deg[i]), csvCell(ratio), csvCell(std::pow(toDouble(deg[i]), 1.0 / double(i + 1))),
                      d.line.complete ? "1" : "0"});
  }
  run.csv("degrees.csv", t);
  Json s = {{"word", w.name}, {"agree", d.agree}, {"submultiplicative", d.submultiplicative}, {"complete", d.line.complete}};
  Json interp = Json::array();
  for (auto& x : d.interp.degrees) interp.push_back(toJson(x));
  s["interpolated"] = interp;
  if (deg.size() >= 3) {
    auto e = dynDegreeEstimate(deg);
    s["lambdaUpper"] = e.upper;
    s["lambdaEstimate"] = e.estimate;
  }
  if (!d.line.complete) s["budgetExhaustedAt"] = deg.size() + 1;
  run.json("degrees.json", document("degrees", s));
  for (auto& r : t.rows) std::cout << r[0] << " " << r[1] << "\n";
  if (!d.line.complete) {
    std::cerr << "toritrop: degree budget exhausted at n = " << deg.size() + 1 << "\n";
    return 3;
  }
  return 0;
}

void cmdStability(const Options& o, Run& run) {
  unsigned N = o.depthOr(50);
  double tol = o.tolOr(1e-8);
  run.config().update({{"depth", N}, {"tol", tol}});
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto r = run.stage("checkInternalStability", [&] { return checkInternalStability(w, N, tol, 64, 1024, o.seed); });
  Json orbits = Json::array();
  for (auto& ob : r.orbits) {
    Json rays = Json::array();
    for (auto& v : ob.rays) rays.push_back(toJson(v));
    orbits.push_back({{"curve", ob.exc}, {"status", ob.status}, {"iterate", ob.iterate}, {"stage", ob.stage},
                      {"closest", ob.closest}, {"digits", ob.digits}, {"poleRays", rays}});
  }
  run.json("stability.json", document("stability", {{"stable", r.stable}, {"conclusive", r.conclusive},
                                                    {"indeterminacyPoints", r.indCount}, {"orbits", orbits}}));
  std::cout << (r.stable ? "stable" : "collision suspected") << (r.conclusive ? "" : " (inconclusive)") << "\n";
}

void cmdIntersect(const Options& o, Run& run, const std::string& a, const std::string& b) {
  auto read = [](const std::string& p) {
    if (p.empty()) return newtonSupport({V2(0, 0), V2(1, 0), V2(0, 1)});
    Json j = readJsonFile(p);
    checkDocument(j, "support");
    return supportFrom(j);
  };
  run.config().update({{"a", a.empty() ? "line" : a}, {"b", b.empty() ? "line" : b}});
  auto [A, B] = run.stage("load", [&] { return std::pair{read(a), read(b)}; });
  Rational v = run.stage("intersectionNumber", [&] { return intersectionNumber(A, B); });
  run.json("intersect.json", document("intersect", {{"value", toJson(v)}, {"a", toJson(A)}, {"b", toJson(B)}}));
  std::cout << toString(v) << "\n";
}

void cmdEigen(const Options& o, Run& run) {
  unsigned iters = unsigned(o.budgetOr(200));
  double tol = o.tolOr(1e-12);
  unsigned n = o.depthOr(4);
  run.config().update({{"budget", iters}, {"tol", tol}, {"depth", n}});
  run.tolerance(1e-9);
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto f = run.stage("forward", [&] { return eigenSupport(w, Direction::Forward, iters, tol, o.seed); });
  auto b = run.stage("backward", [&] { return eigenSupport(w, Direction::Backward, iters, tol, o.seed); });
  Json j = {{"word", w.name}, {"forward", toJson(f)}, {"backward", toJson(b)}, {"dtop", toJson(w.dtop())}};
  auto deg = run.stage("degrees", [&] { return degreeSequenceLine(w, n, o.seed).degrees; });
  if (deg.size() >= 3) {
    auto e = dynDegreeEstimate(deg);
    j["degreeEstimate"] = {{"upper", e.upper}, {"estimate", e.estimate}};
  }
  run.json("eigen.json", document("eigen", j));
  std::cout << "lambda " << f.lambda << " +- " << f.lambdaError << (f.converged ? "" : " (not converged)") << "\n";
}

void cmdGreen(const Options& o, Run& run, unsigned samples) {
  unsigned N = o.depthOr(6), NB = std::min(N, 4u);
  run.config().update({{"depth", N}, {"samples", samples}});
  run.tolerance(1e-9);
  auto w = run.stage("load", [&] { return loadInput(o); });
  GreenOptions go;
  go.seed = o.seed;
  auto F = run.stage("forwardEvaluator", [&] { return makeGreenEvaluator(w, Direction::Forward, go); });
  auto B = run.stage("backwardEvaluator", [&] { return makeGreenEvaluator(w, Direction::Backward, go); });
  std::mt19937_64 rng(o.seed);
  CsvTable t{"green", {"index", "logp1", "logp2", "forward", "forward_error", "guard", "monotone", "series_ratio", "backward", "backward_error"}, {}};
  size_t monotone = 0;
  run.stage("evaluate", [&] {
    std::optional<FastBackward> fast;
    try {
      fast.emplace(B);
    } catch (const DomainError&) {
    }
    for (unsigned k = 0; k < samples; ++k) {
      PointC p;
      {
        PrecisionScope s(64);
        p = randomTorusPoint(rng, 3);
      }
      auto l = logOf(p);
      auto g = greenForward(F, p, N);
      bool mono = monotoneNonIncreasing(g.series.empty() ? g.escape : g.series);
      monotone += mono;
      double bv, be;
      if (fast) {
        PrecisionScope s(64);
        std::array<std::complex<double>, 2> z = {std::complex<double>(p[0].re.convert_to<double>(), p[0].im.convert_to<double>()),
                                                 std::complex<double>(p[1].re.convert_to<double>(), p[1].im.convert_to<double>())};
        bv = (*fast)(z, NB);
        // geometric tail of the last difference, ratio dtop / lambda
        double q = toDouble(w.dtop()) / B.lambda;
        be = q < 1 ? std::abs(bv - (*fast)(z, NB - 1)) * q / (1 - q) : INFINITY;
      } else {
        auto bb = greenBackward(B, p, NB);
        bv = bb.value, be = bb.error;
      }
      t.rows.push_back({csvCell(k), csvCell(l[0]), csvCell(l[1]), csvCell(g.value), csvCell(g.error), g.guard,
                        mono ? "1" : "0", csvCell(g.seriesRatio), csvCell(bv), csvCell(be)});
    }
  });
  run.csv("green.csv", t);
  run.json("green.json", document("green", {{"lambda", F.lambda}, {"K", F.K}, {"seriesAvailable", F.seriesAvailable},
                                            {"samples", samples}, {"monotone", monotone}}));
  std::cout << monotone << "/" << samples << " monotone partial sums\n";
}

void cmdTropapprox(const Options& o, Run& run, std::vector<double> shells, unsigned samples) {
  double margin = o.tolOr(1e-3);
  run.config().update({{"shells", shells}, {"samples", samples}, {"tol", margin}});
  run.tolerance(1e-9);
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto r = run.stage("experiment", [&] { return tropicalApproxExperiment(w, shells, samples, margin, o.seed); });
  CsvTable t{"tropapprox", {"seed", "shell", "logp1", "logp2", "error"}, {}};
  for (auto& s : r.samples) t.rows.push_back({csvCell(s.seed), csvCell(s.shell), csvCell(s.logp1), csvCell(s.logp2), csvCell(s.error)});
  run.csv("tropapprox.csv", t);
  Json sh = Json::array();
  for (auto& s : r.shells)
    sh.push_back({{"shell", s.shell}, {"accepted", s.accepted}, {"rejected", s.rejected}, {"max", s.max},
                  {"q50", s.q50}, {"q90", s.q90}, {"q99", s.q99}});
  run.json("tropapprox.json", document("tropapprox", {{"margin", margin}, {"shells", sh}}));
  for (auto& s : r.shells) std::cout << "shell " << s.shell << " max " << s.max << "\n";
}

struct MeasureArgs {
  double box = 5;
  unsigned smoothing = 2;
  unsigned samples = 20000;
  unsigned lags = 6;
};

std::vector<std::pair<std::array<double, 2>, double>> defaultBumps() { return {{{0, 0}, 2}, {{0, 0}, 4}, {{1, 1}, 2}}; }

EquilibriumReport runMeasure(const Options& o, Run& run, const MeasureArgs& m, const ToricMapWord& w) {
  unsigned n = o.gridOr(20), depth = o.depthOr(4);
  unsigned iters = unsigned(o.budgetOr(200));
  run.config().update({{"grid", n}, {"depth", depth}, {"box", m.box}, {"smoothing", m.smoothing}, {"budget", iters}});
  GridSpec g;
  g.lo = {-m.box, -m.box};
  g.hi = {m.box, m.box};
  g.nr = g.nt = n;
  if (n < 8 || !(m.box > 0)) throw InputError("grid must be at least 8 and the box positive");
  auto e = run.stage("eigen", [&] { return eigenSupport(w, Direction::Forward, iters, 1e-12, o.seed); });
  if (!e.converged) throw BudgetError("eigen iteration did not converge in " + std::to_string(iters) + " steps");
  EquilibriumOptions eo;
  eo.depthForward = eo.depthBackward = depth;
  eo.smoothing = m.smoothing;
  eo.seed = o.seed;
  eo.workers = o.workers;
  return run.stage("equilibriumMeasure", [&] { return equilibriumMeasure(w, g, eo); });
}

void writeMeasure(Run& run, const EquilibriumReport& rep) {
  const GridSpec& g = rep.mu.grid;
  CsvTable t{"measure", {"r1", "t1", "r2", "t2", "weight"}, {}};
  std::vector<double> marg(size_t(g.nr) * g.nr, 0.0);
  forEachNode(g, [&](size_t k, unsigned i1, unsigned, unsigned i2, unsigned, const NodePoint& p) {
    double wgt = rep.mu.weights[k];
    if (wgt == 0) return;
    t.rows.push_back({csvCell(p.r1), csvCell(p.t1), csvCell(p.r2), csvCell(p.t2), csvCell(wgt)});
    marg[size_t(i1) * g.nr + i2] += wgt;
  });
  run.csv("measure.csv", t);
  // gnuplot splot table of the Log marginal: Log p = (-r1, -r2)
  std::ofstream out(run.path("marginal.dat"));
  out << "# Log1 Log2 mass\n";
  for (unsigned i1 = 0; i1 < g.nr; ++i1) {
    for (unsigned i2 = 0; i2 < g.nr; ++i2) out << -g.r(0, i1) << " " << -g.r(1, i2) << " " << marg[size_t(i1) * g.nr + i2] << "\n";
    out << "\n";
  }
}

Json summary(const EquilibriumReport& rep) {
  Json tubes = Json::array();
  for (auto& t : rep.tubes) tubes.push_back({{"curve", t.curve}, {"widths", t.widths}, {"masses", t.masses}, {"decreasing", t.decreasing}});
  Json trend = Json::array();
  for (auto& [f, m] : rep.boxTrend) trend.push_back({f, m});
  return {{"lambda", rep.lambda}, {"normalization", rep.normalization}, {"mass", rep.mass}, {"negativity", rep.negativity},
          {"boxTrend", trend}, {"boxMonotone", rep.boxMonotone}, {"tubes", tubes}, {"maskedForward", rep.maskedForward},
          {"maskedBackward", rep.maskedBackward}, {"warning", rep.warning}};
}

void cmdMeasure(const Options& o, Run& run, const MeasureArgs& m) {
  run.tolerance(1e-9);
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto rep = runMeasure(o, run, m, w);
  writeMeasure(run, rep);
  Json s = summary(rep);
  run.json("summary.json", document("measure", s));  // kept if invariance fails
  std::vector<TestFn> fns;
  Json bumps = Json::array();
  for (auto& [c, r] : defaultBumps()) fns.push_back(bump(c, r)), bumps.push_back({{"center", c}, {"radius", r}});
  run.config()["samples"] = m.samples;
  auto inv = run.stage("invarianceTest", [&] { return invarianceTest(rep.mu, w, fns, m.samples, o.seed); });
  Json rows = Json::array();
  for (size_t i = 0; i < fns.size(); ++i) {
    auto& r = inv.rows[i];
    rows.push_back({{"bump", bumps[i]}, {"integral", r.integral}, {"pushed", r.pushed}, {"relative", r.relative}, {"stderr", r.stderr_}});
  }
  s["invariance"] = {{"samples", inv.samples}, {"dropped", inv.dropped}, {"rows", rows}};
  run.json("summary.json", document("measure", s));
  std::cout << "mass " << rep.mass << ", negativity " << rep.negativity << "\n";
}

void cmdMixing(const Options& o, Run& run, const MeasureArgs& m) {
  run.tolerance(1e-9);
  auto w = run.stage("load", [&] { return loadInput(o); });
  auto rep = runMeasure(o, run, m, w);
  run.config().update({{"samples", m.samples}, {"lags", m.lags}});
  auto c = run.stage("correlation", [&] {
    return correlationExperiment(rep.mu, w, bump({0.5, 0.5}, 1.5), bump({-0.5, 0.5}, 1.5), m.lags, m.samples, o.seed);
  });
  CsvTable t{"correlation", {"n", "C", "error"}, {}};
  for (size_t n = 0; n < c.C.size(); ++n) t.rows.push_back({csvCell(n), csvCell(c.C[n]), csvCell(c.error[n])});
  run.csv("correlation.csv", t);
  run.json("mixing.json", document("mixing", {{"samples", c.samples}, {"inconclusive", c.inconclusive}, {"mass", rep.mass}}));
  for (auto& r : t.rows) std::cout << r[0] << " " << r[1] << " +- " << r[2] << "\n";
}

void cmdValidate(const std::string& file) {
  if (file.size() > 4 && file.substr(file.size() - 4) == ".csv") {
    auto t = readCsv(file);
    std::cout << t.kind << ": " << t.rows.size() << " rows, schema ok\n";
    return;
  }
  Json j = readJsonFile(file);
  try {
    if (!roundTrips(j)) throw InputError(file + ": decoding and encoding again changes the document");
  } catch (const Json::exception& e) {
    throw InputError(file + ": " + e.what());
  }
  std::cout << j.value("kind", "") << ": round trip ok\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tropical and pluripotential computations for toric plane rational maps"};
  app.set_config("--config", "", "key = value configuration file; command-line flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--preset", o.preset, "built-in word: bdj, bdj-h, bdj-g, identity, conformal, cat")->capture_default_str();
  o.wordOpt = app.add_option("--word", o.word, "word file (JSON)");
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--workers", o.workers, "threads for parallel stages")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  o.depthOpt = app.add_option("--depth", o.depth, "iteration depth");
  o.gridOpt = app.add_option("--grid", o.grid, "grid resolution per axis");
  o.budgetOpt = app.add_option("--budget", o.budget, "height, iteration or term budget");
  o.tolOpt = app.add_option("--tol", o.tol, "tolerance or margin");

  auto* wordCmd = app.add_subcommand("word", "write the selected word as JSON");
  auto* trop = app.add_subcommand("tropicalize", "tropicalization, rho and the composition check");
  auto* rot = app.add_subcommand("rotnum", "rotation number of the tropicalization");
  auto* deg = app.add_subcommand("degrees", "degree sequence and dynamical degree estimate");
  auto* stab = app.add_subcommand("stability", "internal stability of the contracted curves");
  auto* inter = app.add_subcommand("intersect", "intersection number of two support functions");
  std::string fa, fb;
  inter->add_option("--a", fa, "support function JSON (default: the line class)");
  inter->add_option("--b", fb, "support function JSON (default: the line class)");
  auto* eig = app.add_subcommand("eigen", "invariant support functions and lambda_1");
  auto* green = app.add_subcommand("green", "Green potentials at random points");
  unsigned greenSamples = 100;
  green->add_option("--samples", greenSamples)->capture_default_str();
  auto* ta = app.add_subcommand("tropapprox", "tropical approximation experiment");
  std::vector<double> shells = {10, 20, 40};
  unsigned taSamples = 1000;
  ta->add_option("--shells", shells)->capture_default_str();
  ta->add_option("--samples", taSamples, "samples per shell")->capture_default_str();
  MeasureArgs ma;
  auto* meas = app.add_subcommand("measure", "discrete equilibrium measure and invariance");
  auto* mix = app.add_subcommand("mixing", "correlation decay under the equilibrium measure");
  for (auto* s : {meas, mix}) {
    s->add_option("--box", ma.box, "half-width of the log-radius box")->capture_default_str();
    s->add_option("--smoothing", ma.smoothing, "mollification passes")->capture_default_str();
    s->add_option("--samples", ma.samples, "Monte Carlo samples")->capture_default_str();
  }
  mix->add_option("--lags", ma.lags)->capture_default_str();
  auto* val = app.add_subcommand("validate", "check a JSON or CSV artifact against its schema");
  std::string vfile;
  val->add_option("file", vfile)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* cmd = app.get_subcommands().front();
  if (cmd == val) {
    try {
      cmdValidate(vfile);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "toritrop: " << e.what() << "\n";
      return 1;
    }
  }

  std::optional<Run> run;
  auto fail = [&](int code, const std::string& what) {
    std::cerr << "toritrop: " << what << "\n";
    if (run) run->finish(code, what);
    return code;
  };
  try {
    run.emplace(cmd->get_name(), o);
    int code = 0;
    if (cmd == wordCmd) cmdWord(o, *run);
    else if (cmd == trop) cmdTropicalize(o, *run);
    else if (cmd == rot) cmdRotnum(o, *run);
    else if (cmd == deg) code = cmdDegrees(o, *run);
    else if (cmd == stab) cmdStability(o, *run);
    else if (cmd == inter) cmdIntersect(o, *run, fa, fb);
    else if (cmd == eig) cmdEigen(o, *run);
    else if (cmd == green) cmdGreen(o, *run, greenSamples);
    else if (cmd == ta) cmdTropapprox(o, *run, shells, taSamples);
    else if (cmd == meas) cmdMeasure(o, *run, ma);
    else if (cmd == mix) cmdMixing(o, *run, ma);
    run->finish(code, code ? "budget exhausted" : "");
    return code;
  } catch (const InputError& e) {
    return fail(1, std::string("input error: ") + e.what());
  } catch (const Json::exception& e) {
    return fail(1, std::string("input error: ") + e.what());
  } catch (const BudgetError& e) {
    return fail(3, std::string("budget exhausted: ") + e.what());
  } catch (const DomainError& e) {
    return fail(2, std::string("hypothesis failed: ") + e.what());
  } catch (const StructuralError& e) {
    return fail(2, std::string("hypothesis failed: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("error: ") + e.what());
  }
}
