#include "multishift/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "multishift/intertwiner.hpp"
#include "multishift/sampling.hpp"

namespace multishift::app {

using io::Json;

namespace {

constexpr double kOracleTol = 1e-9;
constexpr double kAdjointTol = 1e-9;

struct Resolved {
  int max_degree = 0;
  std::vector<int> degrees;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

int resolve_degree(const io::ProblemFile& p, const std::vector<int>& degrees) {
  if (p.options.max_degree) return *p.options.max_degree;
  if (!degrees.empty()) return degrees.back();
  std::optional<int> limit;
  for (const auto& s : p.systems)
    if (const auto l = s.degree_limit()) limit = limit ? std::min(*limit, *l) : *l;
  if (!limit) throw io::SchemaError("options.N", "missing; required when no system fixes N");
  return *limit;
}

Resolved resolve_options(const io::ProblemFile& p, const RunFlags& flags) {
  Resolved r;
  r.degrees = !flags.degrees.empty() ? flags.degrees : p.options.degrees;
  for (std::size_t i = 0; i < r.degrees.size(); ++i)
    if (r.degrees[i] < 1 || (i > 0 && r.degrees[i] <= r.degrees[i - 1]))
      throw io::SchemaError("options.degrees", "degrees must be >= 1 and strictly ascending");
  r.max_degree = resolve_degree(p, r.degrees);
  if (!r.degrees.empty() && r.degrees.back() > r.max_degree) r.max_degree = r.degrees.back();
  r.tol = flags.tol.value_or(p.options.tol);
  if (!(r.tol > 0.0)) throw io::SchemaError("options.tol", "must be positive");
  r.seed = flags.seed.value_or(p.options.seed);
  return r;
}

Json options_json(const Resolved& r) {
  Json j = {{"N", r.max_degree}, {"tol", r.tol}, {"seed", r.seed}};
  if (!r.degrees.empty()) j["degrees"] = r.degrees;
  return j;
}

Json index_json(const Truncation& t, std::size_t pos) { return t[pos].components(); }

Json verification_json(const VerificationReport& v, const Truncation& t) {
  Json margins = Json::array();
  for (std::size_t p = 0; p < v.lower_margins.size(); ++p)
    margins.push_back({{"index", index_json(t, p)}, {"lower", v.lower_margins[p]}, {"upper", v.upper_margins[p]}});
  return {{"passed", v.passed},
          {"tolerance", v.tolerance},
          {"worst_lower", v.worst_lower},
          {"worst_lower_index", index_json(t, v.worst_lower_pos)},
          {"worst_upper", v.worst_upper},
          {"worst_upper_index", index_json(t, v.worst_upper_pos)},
          {"margins", std::move(margins)}};
}

Json fit_json(const LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::pair<MomentSystem, MomentSystem> resolve_pair(const io::ProblemFile& p, int max_degree) {
  return {io::resolve(p.systems[0], max_degree), io::resolve(p.systems[1], max_degree)};
}

// Growth table over the degrees; the fitted verdict needs four of them.
void growth_section(const MomentSystem& a, const MomentSystem& b, const Resolved& r, RunResult& out,
                    std::optional<SimilarityCertificate>& top_certificate) {
  std::vector<int> degrees = r.degrees.empty() ? default_degrees(r.max_degree) : r.degrees;
  OptimizeOptions opt;
  opt.seed = r.seed;
  const PairGenerator gen = [&](int k) { return std::make_pair(a.restricted(k), b.restricted(k)); };

  GrowthDiagnostic g;
  if (degrees.size() >= 4) {
    g = growth_diagnostic(gen, degrees, opt);
  } else {
    for (int k : degrees) {
      const auto [m, mt] = gen(k);
      GrowthRow row{k, 0.0, optimize_C(m, mt, opt)};
      row.log_ratio = row.certificate.log_ratio();
      g.max_log_ratio = std::max(g.max_log_ratio, row.log_ratio);
      g.rows.push_back(std::move(row));
    }
    g.verdict = GrowthVerdict::Inconclusive;
  }

  Json rows = Json::array();
  for (const auto& row : g.rows)
    rows.push_back({{"degree", row.degree},
                    {"log_ratio", row.log_ratio},
                    {"log_m1", row.certificate.log_m1},
                    {"log_m2", row.certificate.log_m2}});
  Json growth = {{"rows", std::move(rows)}, {"max_log_ratio", g.max_log_ratio}};
  if (degrees.size() >= 4) growth["fit"] = fit_json(g.fit);
  out.report["growth"] = std::move(growth);
  out.report["verdict"] = to_string(g.verdict);

  std::ostringstream s;
  s << "verdict: " << to_string(g.verdict) << "\n";
  for (const auto& row : g.rows) s << "  N=" << row.degree << "  log(m2/m1)=" << fmt(row.log_ratio) << "\n";
  if (degrees.size() >= 4) s << "slope vs log N: " << fmt(g.fit.slope) << " (R^2 " << fmt(g.fit.r_squared) << ")\n";
  else s << "fewer than 4 degrees; no growth fit\n";
  out.summary += s.str();

  if (!g.rows.empty() && g.rows.back().degree == r.max_degree) top_certificate = g.rows.back().certificate;
}

void run_similarity(const io::ProblemFile& p, const Resolved& r, RunResult& out, bool verify) {
  const auto [a, b] = resolve_pair(p, r.max_degree);
  std::optional<SimilarityCertificate> cert;
  growth_section(a, b, r, out, cert);
  if (!verify) return;
  if (!cert) {
    OptimizeOptions opt;
    opt.seed = r.seed;
    cert = optimize_C(a, b, opt);
  }
  const VerificationReport v = verify_certificate(a, b, *cert, r.tol);
  out.report["certificate"] = io::to_json(*cert);
  out.report["verification"] = verification_json(v, a.truncation());
  out.summary += "certificate at N=" + std::to_string(r.max_degree) + ": m1=" + fmt(cert->m1()) +
                 " m2=" + fmt(cert->m2()) + (v.passed ? " (verified)\n" : " (verification FAILED)\n");
  if (p.certificate) {
    const VerificationReport sv = verify_certificate(a, b, *p.certificate, r.tol);
    out.report["supplied_certificate"] = {{"certificate", io::to_json(*p.certificate)},
                                          {"verification", verification_json(sv, a.truncation())}};
    out.summary += std::string("supplied certificate: ") + (sv.passed ? "verified" : "FAILED") + "\n";
  }
}

void run_unitary(const io::ProblemFile& p, const Resolved& r, RunResult& out) {
  const auto [a, b] = resolve_pair(p, r.max_degree);
  const UnitaryResult u = test_unitary_equivalence(a, b, r.tol, r.seed);
  out.report["verdict"] = u.equivalent ? "YES" : "NO";
  out.report["max_residual"] = u.max_residual;
  out.report["reason"] = u.reason;
  if (u.v) {
    out.report["v"] = io::matrix_to_json(*u.v);
    const VerificationReport v = verify_certificate(a, b, {*u.v, 0.0, 0.0}, r.tol);
    out.report["certificate_verified"] = v.passed;
  }
  if (u.witness_pos)
    out.report["witness"] = {{"index", index_json(a.truncation(), *u.witness_pos)}, {"gap", u.witness_gap}};
  out.summary += std::string("verdict: ") + (u.equivalent ? "YES" : "NO") + "\n" + u.reason + "\n";
}

void run_oracle(const io::ProblemFile& p, const Resolved& r, RunResult& out) {
  const auto [a, b] = resolve_pair(p, r.max_degree);
  const IntertwinerBasis basis = brute_force_intertwiner(a, b);
  const IntertwinerMatrix x = basis.sample(r.seed);
  const IntertwinerStructure s = check_intertwiner_structure(a, b, x, r.tol);
  const double membership = basis.membership_residual(diagonal_intertwiner(a, b, s.certificate.c).x);
  const bool ok = s.level0_residual <= kOracleTol && s.recursion_residual <= kOracleTol && s.verification.passed &&
                  membership <= kOracleTol;
  out.report["verdict"] = ok ? "CONSISTENT" : "INCONSISTENT";
  out.report["solution_dimension"] = basis.dimension();
  out.report["total_dimension"] = basis.total_dim();
  out.report["intertwining_residual"] = intertwining_residual(x, a, b);
  out.report["level0_residual"] = s.level0_residual;
  out.report["recursion_residual"] = s.recursion_residual;
  out.report["norm"] = s.norm;
  out.report["inverse_norm"] = s.inverse_norm;
  out.report["certificate"] = io::to_json(s.certificate);
  out.report["verification"] = verification_json(s.verification, a.truncation());
  out.report["diagonal_membership_residual"] = membership;
  out.summary += std::string("verdict: ") + (ok ? "CONSISTENT" : "INCONSISTENT") + "\n" +
                 "solution space dimension " + std::to_string(basis.dimension()) + "\n";
}

bool run_validate(const io::ProblemFile& p, const Resolved& r, RunResult& out) {
  bool all_valid = true;
  Json systems = Json::array();
  for (std::size_t i = 0; i < p.systems.size(); ++i) {
    const auto& spec = p.systems[i];
    Json sj = {{"type", spec.type_name()}};
    bool valid = true;
    if (const auto w = io::weight_system(spec)) {
      const ValidationReport v = validate_weights(*w);
      sj["commutation_residual"] = v.max_commutation_residual;
      sj["min_singular_ratio"] = v.min_singular_ratio;
      sj["max_norm"] = v.max_norm;
      if (v.worst_index) sj["worst_index"] = v.worst_index->components();
      sj["message"] = v.message;
      valid = v.passed;
    }
    if (valid) {
      const int degree = spec.max_degree.value_or(r.max_degree);
      const MomentSystem m = io::resolve(spec, std::min(degree, r.max_degree));
      double adjoint = 0.0;
      double min_sv = HUGE_VAL;
      Json norms = Json::array();
      for (std::size_t j = 0; j < m.dim(); ++j) {
        adjoint = std::max(adjoint, check_adjoint_formula(m, j));
        const TruncatedMz mz = build_mz(m, j);
        if (m.max_degree() > 0) min_sv = std::min(min_sv, mz.min_singular_value);
        norms.push_back(mz.norm_estimate);
      }
      sj["adjoint_residual"] = adjoint;
      sj["min_block_singular_value"] = min_sv == HUGE_VAL ? 0.0 : min_sv;
      sj["norm_estimates"] = std::move(norms);
      valid = adjoint <= kAdjointTol && (m.max_degree() == 0 || min_sv > 0.0);
    }
    sj["valid"] = valid;
    all_valid = all_valid && valid;
    out.summary += "systems[" + std::to_string(i) + "] (" + spec.type_name() + "): " + (valid ? "valid" : "INVALID") + "\n";
    systems.push_back(std::move(sj));
  }
  out.report["systems"] = std::move(systems);
  out.report["verdict"] = all_valid ? "VALID" : "INVALID";
  out.summary = std::string("verdict: ") + (all_valid ? "VALID" : "INVALID") + "\n" + out.summary;
  return all_valid;
}

}  // namespace

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Schema: return kExitSchema;
    case ErrorCode::NoConvergence:
    case ErrorCode::RankDeficient: return kExitFailure;
    default: return kExitInvalidInput;
  }
}

std::vector<int> default_degrees(int max_degree) {
  std::vector<int> out;
  for (int q = 1; q <= 4; ++q) {
    const int k = max_degree * q / 4;
    if (k >= 1 && (out.empty() || k > out.back())) out.push_back(k);
  }
  return out;
}

RunResult run_problem(const io::ProblemFile& problem, const RunFlags& flags) {
  const Resolved r = resolve_options(problem, flags);
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  out.report = Json::object();
  out.report["version"] = 1;
  out.report["kind"] = io::to_string(problem.kind);
  out.report["options"] = options_json(r);
  Json types = Json::array();
  for (const auto& s : problem.systems) types.push_back(s.type_name());
  out.report["systems"] = std::move(types);

  switch (problem.kind) {
    case io::ProblemKind::Similarity: run_similarity(problem, r, out, true); break;
    case io::ProblemKind::Diagnostic: run_similarity(problem, r, out, false); break;
    case io::ProblemKind::Unitary: run_unitary(problem, r, out); break;
    case io::ProblemKind::Oracle: run_oracle(problem, r, out); break;
    case io::ProblemKind::Validate:
      if (!run_validate(problem, r, out)) out.exit_code = kExitInvalidInput;
      break;
  }
  if (flags.timing)
    out.report["timing"] = {
        {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  return out;
}

std::string validate_inputs(const io::ProblemFile& problem) {
  const Resolved r = resolve_options(problem, {});
  std::ostringstream s;
  for (std::size_t i = 0; i < problem.systems.size(); ++i) {
    const auto& spec = problem.systems[i];
    const int degree = std::min(spec.max_degree.value_or(r.max_degree), r.max_degree);
    const MomentSystem m = io::resolve(spec, degree);
    s << "systems[" << i << "]: " << spec.type_name() << ", d=" << m.dim() << ", N=" << m.max_degree()
      << ", fiber_dim=" << m.fiber_dim() << ", " << m.size() << " indices\n";
  }
  return s.str();
}

// ---------------------------------------------------------------- generators

Generated gen_pochhammer(const PochhammerPair& first, const PochhammerPair& second, std::size_t d, int max_degree) {
  Generated g;
  g.problem.kind = io::ProblemKind::Similarity;
  g.problem.systems = {io::pochhammer_spec(first, d), io::pochhammer_spec(second, d)};
  g.problem.options.max_degree = max_degree;
  g.problem.ground_truth = Json{{"similar", pochhammer_ground_truth(first, second)}};
  return g;
}

Generated gen_unitary_congruence(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed) {
  const MomentSystem m = random_moment_system(d, max_degree, n, seed);
  Rng rng(seed + 1);
  const CMatrix v0 = random_unitary(n, rng);
  Generated g;
  g.problem.kind = io::ProblemKind::Unitary;
  g.problem.systems = {io::moments_spec(m), io::moments_spec(m.congruent(v0))};
  g.problem.options.max_degree = max_degree;
  g.problem.options.seed = seed;
  g.problem.ground_truth = Json{{"unitarily_equivalent", true}};
  g.answer = Json{{"v0", io::matrix_to_json(v0)}, {"seed", seed}};
  return g;
}

Generated gen_perturb(const PochhammerPair& base, std::size_t d, int max_degree, std::optional<double> replace0,
                      std::optional<int> replace_degree, std::uint64_t seed) {
  const KernelSpec kernel = pochhammer_kernel(base, d, max_degree);
  std::map<MultiIndex, HermPD> repl;
  if (replace_degree) {
    Rng rng(seed);
    for (std::size_t p = 0; p < kernel.truncation->count_up_to(std::min(*replace_degree, max_degree)); ++p)
      repl.emplace((*kernel.truncation)[p], random_pd(kernel.fiber_dim, rng));
  }
  if (replace0) {
    if (!(*replace0 > 0.0)) throw Error(ErrorCode::IndexOutOfRange, "--replace0 must be positive");
    const std::vector<double> logs(kernel.fiber_dim, std::log(*replace0));
    repl.insert_or_assign(MultiIndex::zero(d), HermPD::from_log_diagonal(logs));
  }
  const Perturbation pert = perturb_kernel(kernel, repl);

  io::SystemSpec perturbed;
  perturbed.d = d;
  perturbed.fiber_dim = 2;
  io::PerturbedBody body;
  body.base = io::PochhammerBody{base.lambda, base.mu};
  for (const auto& [a, c] : repl) body.replacements.push_back({a.components(), 0, c.logscale(), c.matrix()});
  perturbed.body = std::move(body);

  Generated g;
  g.problem.kind = io::ProblemKind::Similarity;
  g.problem.systems = {io::pochhammer_spec(base, d), std::move(perturbed)};
  g.problem.options.max_degree = max_degree;
  g.problem.options.seed = seed;
  g.problem.ground_truth = Json{{"similar", true}, {"c1", pert.c1}, {"c2", pert.c2}};
  g.problem.certificate = pert.certificate;
  return g;
}

Generated gen_random_pair(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed, io::ProblemKind kind) {
  Generated g;
  g.problem.kind = kind;
  g.problem.systems = {io::moments_spec(random_moment_system(d, max_degree, n, seed)),
                       io::moments_spec(random_moment_system(d, max_degree, n, seed + 1))};
  g.problem.options.max_degree = max_degree;
  g.problem.options.seed = seed;
  return g;
}

PochhammerPair parse_pochhammer_base(const std::string& text) {
  const std::string prefix = "pochhammer:";
  const auto fail = [&] {
    return Error(ErrorCode::IndexOutOfRange, "expected --base pochhammer:LAMBDA,MU, got '" + text + "'");
  };
  if (text.rfind(prefix, 0) != 0) throw fail();
  const std::string rest = text.substr(prefix.size());
  const auto comma = rest.find(',');
  if (comma == std::string::npos) throw fail();
  try {
    std::size_t used = 0;
    const double lambda = std::stod(rest.substr(0, comma), &used);
    if (used != comma) throw fail();
    const std::string mu_text = rest.substr(comma + 1);
    const double mu = std::stod(mu_text, &used);
    if (used != mu_text.size()) throw fail();
    if (!(lambda > 0.0) || !(mu > 0.0)) throw fail();
    return {lambda, mu};
  } catch (const std::logic_error&) {
    throw fail();
  }
}

}  // namespace multishift::app
