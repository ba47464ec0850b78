#pragma once
// JSON and CSV encodings. Every JSON document carries "schema" and "kind"; every CSV file starts
// with a "# schema=<n> kind=<k>" line. Decoding failures raise InputError.

#include "wedge.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>

namespace toritrop {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.3.0";

// Malformed or unreadable input.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- scalars ----------------------------------------------------------------------

inline Json toJson(const Integer& n) {
  if (n >= Integer(std::numeric_limits<long long>::min()) && n <= Integer(std::numeric_limits<long long>::max()))
    return n.convert_to<long long>();
  return n.str();
}

inline Integer integerFrom(const Json& j) {
  if (j.is_number_integer()) return Integer(j.get<long long>());
  if (j.is_string()) {
    try {
      return Integer(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw InputError("expected an integer, got " + j.dump());
}

inline Json toJson(const Rational& q) { return toString(q); }

inline Rational rationalFrom(const Json& j) {
  if (j.is_number_integer()) return Rational(Integer(j.get<long long>()));
  if (!j.is_string()) throw InputError("expected a rational string, got " + j.dump());
  try {
    return parseRational(j.get<std::string>());
  } catch (const std::exception&) {
    throw InputError("bad rational " + j.dump());
  }
}

// ---- lattice objects --------------------------------------------------------------

inline Json toJson(const V2& v) { return Json::array({toJson(v.x), toJson(v.y)}); }

inline V2 vectorFrom(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("expected an integer pair, got " + j.dump());
  return V2(integerFrom(j[0]), integerFrom(j[1]));
}

inline Json toJson(const RayQ& r) { return toJson(r.v); }

inline RayQ rayFrom(const Json& j) {
  V2 v = vectorFrom(j);
  if (v.isZero() || content(v) != 1) throw InputError("ray " + j.dump() + " is not primitive");
  return RayQ(v);
}

inline Json toJson(const IntMat2& m) {
  return Json::array({Json::array({toJson(m.a), toJson(m.b)}), Json::array({toJson(m.c), toJson(m.d)})});
}

inline IntMat2 matrixFrom(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("expected a 2x2 matrix, got " + j.dump());
  V2 r0 = vectorFrom(j[0]), r1 = vectorFrom(j[1]);
  return IntMat2(r0.x, r0.y, r1.x, r1.y);
}

inline Json toJson(const Fan& f) {
  Json a = Json::array();
  for (auto& r : f.rays()) a.push_back(toJson(r));
  return a;
}

inline Fan fanFrom(const Json& j) {
  if (!j.is_array()) throw InputError("a fan is an array of rays");
  std::vector<RayQ> rays;
  for (auto& r : j) rays.push_back(rayFrom(r));
  try {
    return Fan(std::move(rays));
  } catch (const DomainError& e) {
    throw InputError(std::string("bad fan: ") + e.what());
  }
}

inline Json toJson(const SupportQ& s) {
  Json v = Json::array();
  for (auto& x : s.values()) v.push_back(toJson(x));
  return {{"fan", toJson(s.fan())}, {"values", v}};
}

inline Json toJson(const SupportD& s) { return {{"fan", toJson(s.fan())}, {"values", s.values()}}; }

inline SupportQ supportFrom(const Json& j) {
  if (!j.contains("fan") || !j.contains("values")) throw InputError("support function needs fan and values");
  Fan f = fanFrom(j["fan"]);
  std::vector<Rational> v;
  for (auto& x : j["values"]) v.push_back(rationalFrom(x));
  if (v.size() != f.size()) throw InputError("support function: one value per ray expected");
  return SupportQ(f, v);
}

inline SupportD supportDFrom(const Json& j) {
  if (!j.contains("fan") || !j.contains("values")) throw InputError("support function needs fan and values");
  Fan f = fanFrom(j["fan"]);
  auto v = j["values"].get<std::vector<double>>();
  if (v.size() != f.size()) throw InputError("support function: one value per ray expected");
  return SupportD(f, v);
}

inline Json toJson(const PLMap& A) {
  Json pieces = Json::array();
  for (size_t i = 0; i < A.pieces(); ++i) {
    Cone2 c = A.cone(i);
    pieces.push_back({{"cone", Json::array({toJson(c.r1), toJson(c.r2)})}, {"matrix", toJson(A.matrix(i))}});
  }
  return {{"pieces", pieces}};
}

inline PLMap plmapFrom(const Json& j) {
  if (!j.contains("pieces") || !j["pieces"].is_array()) throw InputError("PL map needs pieces");
  std::vector<RayQ> rays;
  std::vector<IntMat2> mats;
  for (auto& p : j["pieces"]) {
    if (!p.contains("cone") || !p.contains("matrix") || p["cone"].size() != 2) throw InputError("bad PL piece " + p.dump());
    rays.push_back(rayFrom(p["cone"][0]));
    mats.push_back(matrixFrom(p["matrix"]));
  }
  try {
    // the fan constructor sorts rays counterclockwise; keep each matrix with its cone
    Fan f(rays);
    std::vector<IntMat2> sorted(mats.size());
    for (size_t i = 0; i < rays.size(); ++i) {
      auto it = std::find(f.rays().begin(), f.rays().end(), rays[i]);
      sorted[size_t(it - f.rays().begin())] = mats[i];
    }
    return PLMap(f, sorted);
  } catch (const DomainError& e) {
    throw InputError(std::string("bad PL map: ") + e.what());
  }
}

// ---- words ------------------------------------------------------------------------

inline Json toJson(const Laurent& L) {
  Json o = Json::object();
  for (auto& [e, c] : L.terms()) o[std::to_string(e.first) + "," + std::to_string(e.second)] = toJson(c);
  return o;
}

inline Laurent laurentFrom(const Json& j) {
  if (!j.is_object()) throw InputError("a Laurent polynomial is an object {\"a,b\": coefficient}");
  Laurent L;
  for (auto& [k, v] : j.items()) {
    auto comma = k.find(',');
    long a, b;
    try {
      if (comma == std::string::npos) throw std::invalid_argument(k);
      size_t pa, pb;
      a = std::stol(k.substr(0, comma), &pa);
      b = std::stol(k.substr(comma + 1), &pb);
      if (pa != comma || pb != k.size() - comma - 1) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      throw InputError("bad exponent key \"" + k + "\"");
    }
    L = L + Laurent::monomial(a, b, rationalFrom(v));
  }
  if (L.isZero()) throw InputError("zero Laurent polynomial");
  return L;
}

inline Json toJson(const Factored& F) {
  auto list = [](const std::vector<Laurent>& v) {
    Json a = Json::array();
    for (auto& L : v) a.push_back(toJson(L));
    return a;
  };
  Json j = {{"num", Json::array({list(F.num[0]), list(F.num[1])})},
            {"den", Json::array({list(F.den[0]), list(F.den[1])})},
            {"rho", toJson(F.rho)},
            {"dtop", toJson(F.dtop)},
            {"involution", F.involution}};
  if (F.inverse) j["inverse"] = toJson(*F.inverse);
  return j;
}

inline Factored factoredFrom(const Json& j) {
  Factored F;
  for (const char* key : {"num", "den"}) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
      throw InputError(std::string("birational generator needs ") + key + " as two factor lists");
    for (int i = 0; i < 2; ++i) {
      auto& dst = std::string(key) == "num" ? F.num[size_t(i)] : F.den[size_t(i)];
      for (auto& L : j[key][size_t(i)]) dst.push_back(laurentFrom(L));
    }
  }
  F.rho = j.contains("rho") ? integerFrom(j["rho"]) : Integer(1);
  F.dtop = j.contains("dtop") ? integerFrom(j["dtop"]) : Integer(1);
  F.involution = j.value("involution", false);
  if (j.contains("inverse")) F.inverse = std::make_shared<const Factored>(factoredFrom(j["inverse"]));
  return F;
}

inline Json toJson(const ToricGenerator& g) {
  Json j = g.isMonomial() ? Json{{"monomial", toJson(g.matrix())}} : Json{{"birational", toJson(g.factored())}};
  if (!g.name.empty()) j["name"] = g.name;
  return j;
}

inline ToricGenerator generatorFrom(const Json& j) {
  std::string name = j.value("name", "");
  try {
    if (j.contains("monomial")) return ToricGenerator::monomial(matrixFrom(j["monomial"]), name);
    if (j.contains("birational")) return ToricGenerator::birational(factoredFrom(j["birational"]), name);
  } catch (const DomainError& e) {
    throw InputError(std::string("bad generator: ") + e.what());
  }
  throw InputError("a generator is {\"monomial\": ...} or {\"birational\": ...}");
}

// ---- documents --------------------------------------------------------------------

inline Json document(const std::string& kind, Json body) {
  body["schema"] = kSchemaVersion;
  body["kind"] = kind;
  return body;
}

inline void checkDocument(const Json& j, const std::string& kind) {
  if (!j.is_object()) throw InputError(kind + ": expected a JSON object");
  if (j.value("schema", -1) != kSchemaVersion)
    throw InputError(kind + ": unsupported schema version " + (j.contains("schema") ? j["schema"].dump() : "(missing)"));
  if (j.value("kind", "") != kind) throw InputError("expected kind \"" + kind + "\", got " + j.value("kind", "(missing)"));
}

inline Json toJson(const ToricMapWord& w) {
  Json st = Json::array();
  for (auto& g : w.stages) st.push_back(toJson(g));
  return document("word", {{"name", w.name}, {"stages", st}});
}

inline ToricMapWord wordFrom(const Json& j) {
  checkDocument(j, "word");
  if (!j.contains("stages") || !j["stages"].is_array() || j["stages"].empty())
    throw InputError("word: stages must be a non-empty list");
  ToricMapWord w;
  w.name = j.value("name", "word");
  for (auto& g : j["stages"]) w.stages.push_back(generatorFrom(g));
  return w;
}

inline Json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline ToricMapWord loadWord(const std::string& path) {
  try {
    return wordFrom(readJsonFile(path));
  } catch (const Json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline std::vector<std::string> presetNames() { return {"bdj", "bdj-h", "bdj-g", "identity", "conformal", "cat"}; }

inline ToricMapWord presetWord(const std::string& name) {
  if (name == "bdj") return exampleWord();
  if (name == "bdj-h") return {{exampleH()}, "bdj-h"};
  if (name == "bdj-g") return {{exampleG()}, "bdj-g"};
  if (name == "identity") return identityWord();
  if (name == "conformal") return monomialWord(IntMat2(1, 2, -2, 1));
  if (name == "cat") return monomialWord(IntMat2(2, 1, 1, 1));
  throw InputError("unknown preset " + name);
}

// Decodes a document and encodes it again; the result must reproduce the input.
inline bool roundTrips(const Json& j) {
  std::string kind = j.value("kind", "");
  Json back;
  if (kind == "word") back = toJson(wordFrom(j));
  else if (kind == "support") back = document("support", toJson(supportFrom(j)));
  else if (kind == "plmap") back = document("plmap", toJson(plmapFrom(j)));
  else if (kind == "fan") back = document("fan", {{"rays", toJson(fanFrom(j.at("rays")))}});
  else throw InputError("no schema for kind " + kind);
  return back == j;
}

// ---- CSV --------------------------------------------------------------------------

struct CsvTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csvCell(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}
inline std::string csvCell(const Integer& x) { return x.str(); }
inline std::string csvCell(const std::string& x) { return x; }
template <class T>
  requires std::is_integral_v<T>
inline std::string csvCell(T x) {
  return std::to_string(x);
}

inline void writeCsv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "# schema=" << kSchemaVersion << " kind=" << t.kind << "\n";
  for (size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw std::logic_error("csv row width mismatch in " + t.kind);
    for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
}

inline CsvTable readCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  CsvTable t;
  auto split = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string c; std::getline(ss, c, ',');) v.push_back(c);
    if (!s.empty() && s.back() == ',') v.push_back("");
    return v;
  };
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  std::string want = "# schema=" + std::to_string(kSchemaVersion) + " kind=";
  if (line.rfind(want, 0) != 0) throw InputError(path + ": missing or unsupported schema line");
  t.kind = line.substr(want.size());
  if (!std::getline(in, line)) throw InputError(path + ": missing header");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.columns.size()) throw InputError(path + ": ragged row");
  }
  return t;
}

}  // namespace toritrop
