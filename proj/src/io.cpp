#include "multishift/io.hpp"

#include <cmath>
#include <map>

namespace multishift::io {

namespace {

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(path, key), "missing required field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
  return v;
}

long long as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long long>();
}

std::size_t as_positive(const Json& j, const std::string& path) {
  const long long v = as_int(j, path);
  if (v < 1) throw SchemaError(path, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

int as_degree(const Json& j, const std::string& path) {
  const long long v = as_int(j, path);
  if (v < 0 || v > 100000) throw SchemaError(path, "expected a degree in [0, 100000]");
  return static_cast<int>(v);
}

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

std::vector<int> index_from_json(const Json& j, const std::string& path, std::size_t d) {
  as_array(j, path);
  if (j.size() != d) throw SchemaError(path, "expected an index of length " + std::to_string(d));
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long long v = as_int(j[i], item(path, i));
    if (v < 0) throw SchemaError(item(path, i), "index components must be non-negative");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Json entry_to_json(const ScaledEntry& e, bool indexed, bool directed) {
  Json j = Json::object();
  if (indexed) j["index"] = e.index;
  if (directed) j["j"] = e.direction + 1;
  j["logscale"] = e.logscale;
  j["matrix"] = matrix_to_json(e.matrix);
  return j;
}

ScaledEntry entry_from_json(const Json& j, const std::string& path, std::size_t n, std::optional<std::size_t> d,
                            bool directed) {
  ScaledEntry e;
  if (d) e.index = index_from_json(require(j, path, "index"), child(path, "index"), *d);
  if (directed) {
    const long long dir = as_int(require(j, path, "j"), child(path, "j"));
    if (dir < 1 || dir > static_cast<long long>(*d)) throw SchemaError(child(path, "j"), "direction out of range");
    e.direction = static_cast<std::size_t>(dir - 1);
  }
  if (const Json* ls = optional_field(j, "logscale")) e.logscale = as_double(*ls, child(path, "logscale"));
  e.matrix = matrix_from_json(require(j, path, "matrix"), child(path, "matrix"));
  if (e.matrix.rows() != n || e.matrix.cols() != n)
    throw SchemaError(child(path, "matrix"), "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  return e;
}

std::vector<ScaledEntry> entries_from_json(const Json& j, const std::string& path, std::size_t n,
                                           std::optional<std::size_t> d, bool directed) {
  as_array(j, path);
  std::vector<ScaledEntry> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(entry_from_json(j[i], item(path, i), n, d, directed));
  return out;
}

Json entries_to_json(const std::vector<ScaledEntry>& es, bool indexed, bool directed) {
  Json a = Json::array();
  for (const auto& e : es) a.push_back(entry_to_json(e, indexed, directed));
  return a;
}

HermPD to_pd(const ScaledEntry& e) { return HermPD::from_matrix(e.matrix, e.logscale); }

Json pochhammer_fields(const PochhammerBody& p) { return {{"lambda", p.lambda}, {"mu", p.mu}}; }

PochhammerBody pochhammer_from_json(const Json& j, const std::string& path) {
  PochhammerBody p;
  p.lambda = as_double(require(j, path, "lambda"), child(path, "lambda"));
  p.mu = as_double(require(j, path, "mu"), child(path, "mu"));
  if (!(p.lambda > 0.0)) throw SchemaError(child(path, "lambda"), "must be positive");
  if (!(p.mu > 0.0)) throw SchemaError(child(path, "mu"), "must be positive");
  return p;
}

KernelSpec homogeneous_from_body(const HomogeneousBody& h, std::size_t d, int max_degree) {
  if (max_degree + 1 > static_cast<int>(h.a.size()))
    throw Error(ErrorCode::IndexOutOfRange, "homogeneous system has no A_m for degree " + std::to_string(max_degree));
  std::vector<HermPD> a;
  for (int m = 0; m <= max_degree; ++m) a.push_back(to_pd(h.a[static_cast<std::size_t>(m)]));
  return homogeneous_kernel(a, d);
}

}  // namespace

// ---------------------------------------------------------------- matrices

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(Json::array({m(i, k).real(), m(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  as_array(j, path);
  if (j.empty()) throw SchemaError(path, "empty matrix");
  const std::size_t rows = j.size();
  const std::size_t cols = as_array(j[0], item(path, 0)).size();
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = item(path, i);
    const Json& row = as_array(j[i], rp);
    if (row.size() != cols) throw SchemaError(rp, "ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      const std::string ep = item(rp, k);
      const Json& z = as_array(row[k], ep);
      if (z.size() != 2) throw SchemaError(ep, "expected [re, im]");
      m(i, k) = Complex(as_double(z[0], item(ep, 0)), as_double(z[1], item(ep, 1)));
    }
  }
  return m;
}

// ---------------------------------------------------------------- systems

const char* SystemSpec::type_name() const {
  switch (body.index()) {
    case 0: return "moments";
    case 1: return "weights";
    case 2: return "pochhammer";
    case 3: return "homogeneous";
    default: return "perturbed";
  }
}

std::optional<int> SystemSpec::degree_limit() const {
  if (std::holds_alternative<HomogeneousBody>(body))
    return static_cast<int>(std::get<HomogeneousBody>(body).a.size()) - 1;
  if (const auto* p = std::get_if<PerturbedBody>(&body))
    if (const auto* h = std::get_if<HomogeneousBody>(&p->base)) return static_cast<int>(h->a.size()) - 1;
  if (std::holds_alternative<MomentsBody>(body) || std::holds_alternative<WeightsBody>(body)) return max_degree;
  return std::nullopt;
}

Json to_json(const SystemSpec& s) {
  Json j = Json::object();
  j["type"] = s.type_name();
  j["d"] = s.d;
  if (s.max_degree) j["N"] = *s.max_degree;
  j["fiber_dim"] = s.fiber_dim;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, MomentsBody>) {
          j["grams"] = entries_to_json(b.grams, true, false);
        } else if constexpr (std::is_same_v<T, WeightsBody>) {
          j["g0"] = entry_to_json(b.g0, false, false);
          j["weights"] = entries_to_json(b.weights, true, true);
        } else if constexpr (std::is_same_v<T, PochhammerBody>) {
          j.update(pochhammer_fields(b));
        } else if constexpr (std::is_same_v<T, HomogeneousBody>) {
          j["A"] = entries_to_json(b.a, false, false);
        } else {
          Json base = Json::object();
          if (const auto* p = std::get_if<PochhammerBody>(&b.base)) {
            base["type"] = "pochhammer";
            base.update(pochhammer_fields(*p));
          } else {
            base["type"] = "homogeneous";
            base["A"] = entries_to_json(std::get<HomogeneousBody>(b.base).a, false, false);
          }
          j["base"] = std::move(base);
          j["replacements"] = entries_to_json(b.replacements, true, false);
        }
      },
      s.body);
  return j;
}

SystemSpec system_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  SystemSpec s;
  const Json& type = require(j, path, "type");
  if (!type.is_string()) throw SchemaError(child(path, "type"), "expected a string");
  const std::string t = type.get<std::string>();
  s.fiber_dim = as_positive(require(j, path, "fiber_dim"), child(path, "fiber_dim"));
  s.d = as_positive(require(j, path, "d"), child(path, "d"));
  if (const Json* n = optional_field(j, "N")) s.max_degree = as_degree(*n, child(path, "N"));
  const std::size_t n = s.fiber_dim;

  if (t == "moments") {
    if (!s.max_degree) throw SchemaError(child(path, "N"), "missing required field");
    s.body = MomentsBody{entries_from_json(require(j, path, "grams"), child(path, "grams"), n, s.d, false)};
  } else if (t == "weights") {
    if (!s.max_degree) throw SchemaError(child(path, "N"), "missing required field");
    if (*s.max_degree < 1) throw SchemaError(child(path, "N"), "weight systems need N >= 1");
    WeightsBody w;
    w.g0 = entry_from_json(require(j, path, "g0"), child(path, "g0"), n, std::nullopt, false);
    w.weights = entries_from_json(require(j, path, "weights"), child(path, "weights"), n, s.d, true);
    s.body = std::move(w);
  } else if (t == "pochhammer") {
    if (n != 2) throw SchemaError(child(path, "fiber_dim"), "pochhammer systems have fiber_dim 2");
    s.body = pochhammer_from_json(j, path);
  } else if (t == "homogeneous") {
    HomogeneousBody h{entries_from_json(require(j, path, "A"), child(path, "A"), n, std::nullopt, false)};
    if (h.a.empty()) throw SchemaError(child(path, "A"), "expected at least one matrix");
    s.body = std::move(h);
  } else if (t == "perturbed") {
    const std::string bp = child(path, "base");
    const Json& base = require(j, path, "base");
    const Json& btype = require(base, bp, "type");
    PerturbedBody p;
    if (btype == "pochhammer") {
      if (n != 2) throw SchemaError(child(path, "fiber_dim"), "pochhammer systems have fiber_dim 2");
      p.base = pochhammer_from_json(base, bp);
    } else if (btype == "homogeneous") {
      p.base = HomogeneousBody{entries_from_json(require(base, bp, "A"), child(bp, "A"), n, std::nullopt, false)};
    } else {
      throw SchemaError(child(bp, "type"), "expected pochhammer or homogeneous");
    }
    p.replacements = entries_from_json(require(j, path, "replacements"), child(path, "replacements"), n, s.d, false);
    s.body = std::move(p);
  } else {
    throw SchemaError(child(path, "type"), "unknown system type '" + t + "'");
  }
  return s;
}

KernelSpec resolve_kernel(const SystemSpec& s, int max_degree) {
  if (const auto* p = std::get_if<PochhammerBody>(&s.body)) return pochhammer_kernel({p->lambda, p->mu}, s.d, max_degree);
  if (const auto* h = std::get_if<HomogeneousBody>(&s.body)) return homogeneous_from_body(*h, s.d, max_degree);
  if (const auto* p = std::get_if<PerturbedBody>(&s.body)) {
    const KernelSpec base = std::holds_alternative<PochhammerBody>(p->base)
                                ? pochhammer_kernel({std::get<PochhammerBody>(p->base).lambda,
                                                     std::get<PochhammerBody>(p->base).mu},
                                                    s.d, max_degree)
                                : homogeneous_from_body(std::get<HomogeneousBody>(p->base), s.d, max_degree);
    std::map<MultiIndex, HermPD> repl;
    for (const auto& e : p->replacements) {
      const MultiIndex a(e.index);
      if (a.degree() <= max_degree) repl.emplace(a, to_pd(e));
    }
    return perturb_kernel(base, repl).kernel;
  }
  throw Error(ErrorCode::DimMismatch, std::string("resolve_kernel: ") + s.type_name() + " is not a kernel spec");
}

std::optional<WeightSystem> weight_system(const SystemSpec& s) {
  const auto* w = std::get_if<WeightsBody>(&s.body);
  if (!w) return std::nullopt;
  auto t = std::make_shared<const Truncation>(s.d, *s.max_degree);
  const std::size_t stored = t->count_up_to(*s.max_degree - 1);
  std::vector<std::optional<CMatrix>> slots(stored * s.d);
  for (const auto& e : w->weights) {
    const auto pos = t->find(MultiIndex(e.index));
    if (!pos || *pos >= stored)
      throw Error(ErrorCode::IndexOutOfRange, "weight index " + to_string(MultiIndex(e.index)) +
                                                  " must have degree <= N-1");
    auto& slot = slots[*pos * s.d + e.direction];
    if (slot) throw Error(ErrorCode::DimMismatch, "duplicate weight for " + to_string(MultiIndex(e.index)));
    slot = e.matrix * Complex(std::exp(e.logscale));
  }
  std::vector<CMatrix> weights;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (!slots[k])
      throw Error(ErrorCode::DimMismatch, "missing weight for " + to_string((*t)[k / s.d]) + " direction " +
                                              std::to_string(k % s.d + 1));
    weights.push_back(std::move(*slots[k]));
  }
  return WeightSystem(std::move(t), s.fiber_dim, std::move(weights));
}

MomentSystem resolve(const SystemSpec& s, int max_degree, Exec exec) {
  if (max_degree < 0) throw Error(ErrorCode::IndexOutOfRange, "resolve: negative degree");
  if (const auto* m = std::get_if<MomentsBody>(&s.body)) {
    if (max_degree > *s.max_degree)
      throw Error(ErrorCode::IndexOutOfRange, "explicit system only defined up to degree " +
                                                  std::to_string(*s.max_degree));
    auto t = std::make_shared<const Truncation>(s.d, *s.max_degree);
    std::vector<std::optional<HermPD>> slots(t->size());
    for (const auto& e : m->grams) {
      const auto pos = t->find(MultiIndex(e.index));
      if (!pos) throw Error(ErrorCode::IndexOutOfRange, "gram index " + to_string(MultiIndex(e.index)) +
                                                            " outside the truncation");
      if (slots[*pos]) throw Error(ErrorCode::DimMismatch, "duplicate gram for " + to_string(MultiIndex(e.index)));
      slots[*pos] = to_pd(e);
    }
    std::vector<HermPD> grams;
    for (std::size_t p = 0; p < slots.size(); ++p) {
      if (!slots[p]) throw Error(ErrorCode::DimMismatch, "missing gram for " + to_string((*t)[p]));
      grams.push_back(std::move(*slots[p]));
    }
    return MomentSystem(std::move(t), s.fiber_dim, std::move(grams)).restricted(max_degree);
  }
  if (const auto* w = std::get_if<WeightsBody>(&s.body)) {
    if (max_degree > *s.max_degree)
      throw Error(ErrorCode::IndexOutOfRange, "explicit system only defined up to degree " +
                                                  std::to_string(*s.max_degree));
    return moments_from_weights(*weight_system(s), to_pd(w->g0), exec).restricted(max_degree);
  }
  return resolve_kernel(s, max_degree).moments(exec);
}

SystemSpec moments_spec(const MomentSystem& m) {
  SystemSpec s;
  s.d = m.dim();
  s.max_degree = m.max_degree();
  s.fiber_dim = m.fiber_dim();
  MomentsBody body;
  for (std::size_t p = 0; p < m.size(); ++p)
    body.grams.push_back({m.truncation()[p].components(), 0, m.gram(p).logscale(), m.gram(p).matrix()});
  s.body = std::move(body);
  return s;
}

SystemSpec pochhammer_spec(const PochhammerPair& p, std::size_t d, std::optional<int> max_degree) {
  SystemSpec s;
  s.d = d;
  s.max_degree = max_degree;
  s.fiber_dim = 2;
  s.body = PochhammerBody{p.lambda, p.mu};
  return s;
}

// ---------------------------------------------------------------- problems

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Similarity: return "similarity";
    case ProblemKind::Unitary: return "unitary";
    case ProblemKind::Oracle: return "oracle";
    case ProblemKind::Diagnostic: return "diagnostic";
    case ProblemKind::Validate: return "validate";
  }
  return "similarity";
}

Json to_json(const SimilarityCertificate& c) {
  return {{"c", matrix_to_json(c.c)}, {"log_m1", c.log_m1}, {"log_m2", c.log_m2}, {"m1", c.m1()}, {"m2", c.m2()}};
}

SimilarityCertificate certificate_from_json(const Json& j, const std::string& path) {
  SimilarityCertificate c;
  c.c = matrix_from_json(require(j, path, "c"), child(path, "c"));
  if (!c.c.square()) throw SchemaError(child(path, "c"), "expected a square matrix");
  c.log_m1 = as_double(require(j, path, "log_m1"), child(path, "log_m1"));
  c.log_m2 = as_double(require(j, path, "log_m2"), child(path, "log_m2"));
  return c;
}

Json to_json(const ProblemFile& p) {
  Json j = Json::object();
  j["version"] = p.version;
  j["kind"] = to_string(p.kind);
  Json systems = Json::array();
  for (const auto& s : p.systems) systems.push_back(to_json(s));
  j["systems"] = std::move(systems);
  Json opts = Json::object();
  if (p.options.max_degree) opts["N"] = *p.options.max_degree;
  if (!p.options.degrees.empty()) opts["degrees"] = p.options.degrees;
  opts["tol"] = p.options.tol;
  opts["seed"] = p.options.seed;
  j["options"] = std::move(opts);
  if (p.ground_truth) j["ground_truth"] = *p.ground_truth;
  if (p.certificate) j["certificate"] = to_json(*p.certificate);
  return j;
}

ProblemFile problem_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  ProblemFile p;
  const Json& version = require(j, "", "version");
  if (as_int(version, "version") != 1) throw SchemaError("version", "unsupported version (expected 1)");

  const Json& kind = require(j, "", "kind");
  static const std::map<std::string, ProblemKind> kinds = {{"similarity", ProblemKind::Similarity},
                                                           {"unitary", ProblemKind::Unitary},
                                                           {"oracle", ProblemKind::Oracle},
                                                           {"diagnostic", ProblemKind::Diagnostic},
                                                           {"validate", ProblemKind::Validate}};
  if (!kind.is_string() || !kinds.count(kind.get<std::string>()))
    throw SchemaError("kind", "expected one of similarity, unitary, oracle, diagnostic, validate");
  p.kind = kinds.at(kind.get<std::string>());

  const Json& systems = as_array(require(j, "", "systems"), "systems");
  for (std::size_t i = 0; i < systems.size(); ++i) p.systems.push_back(system_from_json(systems[i], item("systems", i)));
  if (p.kind == ProblemKind::Validate) {
    if (p.systems.empty() || p.systems.size() > 2) throw SchemaError("systems", "expected one or two systems");
  } else if (p.systems.size() != 2) {
    throw SchemaError("systems", "expected exactly two systems");
  }
  if (p.systems.size() == 2) {
    if (p.systems[0].d != p.systems[1].d) throw SchemaError("systems[1].d", "dimension differs from systems[0]");
    if (p.systems[0].fiber_dim != p.systems[1].fiber_dim)
      throw SchemaError("systems[1].fiber_dim", "fiber dimension differs from systems[0]");
  }

  if (const Json* opts = optional_field(j, "options")) {
    if (!opts->is_object()) throw SchemaError("options", "expected an object");
    if (const Json* n = optional_field(*opts, "N")) p.options.max_degree = as_degree(*n, "options.N");
    if (const Json* d = optional_field(*opts, "degrees")) {
      as_array(*d, "options.degrees");
      for (std::size_t i = 0; i < d->size(); ++i) {
        const int v = as_degree((*d)[i], item("options.degrees", i));
        if (v < 1) throw SchemaError(item("options.degrees", i), "degrees must be >= 1");
        if (!p.options.degrees.empty() && v <= p.options.degrees.back())
          throw SchemaError(item("options.degrees", i), "degrees must be strictly ascending");
        p.options.degrees.push_back(v);
      }
    }
    if (const Json* t = optional_field(*opts, "tol")) {
      p.options.tol = as_double(*t, "options.tol");
      if (!(p.options.tol > 0.0)) throw SchemaError("options.tol", "must be positive");
    }
    if (const Json* s = optional_field(*opts, "seed")) {
      if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
        throw SchemaError("options.seed", "expected a non-negative integer");
      p.options.seed = s->get<std::uint64_t>();
    }
  }
  if (const Json* g = optional_field(j, "ground_truth")) p.ground_truth = *g;
  if (const Json* c = optional_field(j, "certificate")) {
    p.certificate = certificate_from_json(*c, "certificate");
    if (p.certificate->c.rows() != p.systems.front().fiber_dim)
      throw SchemaError("certificate.c", "size differs from the fiber dimension");
  }
  return p;
}

ProblemFile parse_problem(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return problem_from_json(j);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace multishift::io
