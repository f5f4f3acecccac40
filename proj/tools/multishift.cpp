#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "multishift/app.hpp"
#include "multishift/parallel.hpp"

namespace ms = multishift;
using ms::app::kExitFailure;

namespace {

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::string ext = ".json";
  if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return path.substr(0, path.size() - ext.size()) + suffix;
  return path + suffix;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void emit(const ms::app::Generated& g, const std::string& out_path, bool quiet) {
  const std::string text = ms::io::dump(ms::io::to_json(g.problem));
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
    if (!quiet) std::cerr << "wrote " << out_path << "\n";
  }
  if (g.answer) {
    const std::string answer_path = with_suffix(out_path, ".answer.json");
    write_file(answer_path, ms::io::dump(*g.answer));
    if (!quiet) std::cerr << "wrote " << answer_path << "\n";
  }
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ms::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ms::app::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Similarity and unitary equivalence of operator-valued multishifts"};
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads (default: MULTISHIFT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "Suppress the human-readable summary");

  // run
  auto* run = app.add_subcommand("run", "Solve a problem file and write a report");
  std::string problem_path, out_path;
  ms::app::RunFlags flags;
  std::uint64_t seed = 0;
  double tol = 0.0;
  bool no_timing = false;
  run->add_option("problem", problem_path, "Problem JSON")->required();
  run->add_option("--out", out_path, "Report path (default: <problem>.report.json)");
  auto* seed_opt = run->add_option("--seed", seed, "Override options.seed");
  auto* tol_opt = run->add_option("--tol", tol, "Override options.tol")->check(CLI::PositiveNumber);
  run->add_option("--degrees", flags.degrees, "Degree list, e.g. 8,16,24,32")->delimiter(',');
  run->add_flag("--no-timing", no_timing, "Omit the timing block so reports compare byte for byte");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a problem file without solving it");
  std::string validate_path;
  validate->add_option("problem", validate_path, "Problem JSON")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate problem files");
  gen->require_subcommand(1);
  gen->fallthrough();
  std::string gen_out;
  std::size_t d = 2, n = 2;
  int max_degree = 24;
  std::uint64_t gen_seed = 0;

  auto* poch = gen->add_subcommand("pochhammer", "Pochhammer pair (lambda, mu) vs (lambda2, mu2)");
  ms::PochhammerPair first, second;
  poch->add_option("--lambda", first.lambda)->required()->check(CLI::PositiveNumber);
  poch->add_option("--mu", first.mu)->required()->check(CLI::PositiveNumber);
  poch->add_option("--lambda2", second.lambda)->required()->check(CLI::PositiveNumber);
  poch->add_option("--mu2", second.mu)->required()->check(CLI::PositiveNumber);
  poch->add_option("--N", max_degree)->check(CLI::NonNegativeNumber);
  poch->add_option("--d", d)->check(CLI::PositiveNumber);
  poch->add_option("--out", gen_out);

  auto* unit = gen->add_subcommand("unitary-congruence", "Random system and a hidden unitary congruence of it");
  unit->add_option("--d", d)->check(CLI::PositiveNumber);
  unit->add_option("--N", max_degree)->check(CLI::NonNegativeNumber);
  unit->add_option("--n", n)->check(CLI::PositiveNumber);
  unit->add_option("--seed", gen_seed);
  unit->add_option("--out", gen_out, "Problem path; the answer goes to <out>.answer.json")->required();

  auto* pert = gen->add_subcommand("perturb", "Pochhammer kernel against a perturbation of finitely many coefficients");
  std::string base = "pochhammer:1,2";
  double replace0 = 0.0;
  int replace_degree = 0;
  int pert_degree = 20;
  pert->add_option("--base", base, "pochhammer:LAMBDA,MU");
  auto* replace0_opt = pert->add_option("--replace0", replace0, "Set C_0 = s I")->check(CLI::PositiveNumber);
  auto* rdeg_opt = pert->add_option("--replace-degree", replace_degree,
                                    "Replace every C_a with |a| <= k by a seeded random PD matrix")
                       ->check(CLI::NonNegativeNumber);
  pert->add_option("--N", pert_degree)->check(CLI::NonNegativeNumber);
  pert->add_option("--d", d)->check(CLI::PositiveNumber);
  pert->add_option("--seed", gen_seed);
  pert->add_option("--out", gen_out);

  auto* pair = gen->add_subcommand("random-pair", "Two independent random moment systems");
  std::string kind = "oracle";
  int pair_degree = 3;
  pair->add_option("--d", d)->check(CLI::PositiveNumber);
  pair->add_option("--N", pair_degree)->check(CLI::NonNegativeNumber);
  pair->add_option("--n", n)->check(CLI::PositiveNumber);
  pair->add_option("--seed", gen_seed);
  pair->add_option("--kind", kind)->check(CLI::IsMember({"similarity", "unitary", "oracle", "diagnostic"}));
  pair->add_option("--out", gen_out);

  CLI11_PARSE(app, argc, argv);

  if (threads == 0)
    if (const char* env = std::getenv("MULTISHIFT_THREADS")) threads = std::atoi(env);
  ms::set_threads(threads);

  if (run->parsed()) {
    return guarded([&] {
      const ms::io::ProblemFile problem = ms::io::parse_problem(read_file(problem_path));
      if (seed_opt->count()) flags.seed = seed;
      if (tol_opt->count()) flags.tol = tol;
      flags.timing = !no_timing;
      const ms::app::RunResult result = ms::app::run_problem(problem, flags);
      const std::string report_path = out_path.empty() ? with_suffix(problem_path, ".report.json") : out_path;
      write_file(report_path, ms::io::dump(result.report));
      if (!quiet) std::cout << result.summary << "report: " << report_path << "\n";
      return result.exit_code;
    });
  }
  if (validate->parsed()) {
    return guarded([&] {
      const ms::io::ProblemFile problem = ms::io::parse_problem(read_file(validate_path));
      const std::string summary = ms::app::validate_inputs(problem);
      if (!quiet) std::cout << summary << "ok\n";
      return 0;
    });
  }
  return guarded([&] {
    ms::app::Generated g;
    if (poch->parsed()) {
      g = ms::app::gen_pochhammer(first, second, d, max_degree);
    } else if (unit->parsed()) {
      g = ms::app::gen_unitary_congruence(d, max_degree, n, gen_seed);
    } else if (pert->parsed()) {
      if (!replace0_opt->count() && !rdeg_opt->count())
        throw ms::Error(ms::ErrorCode::IndexOutOfRange, "perturb needs --replace0 or --replace-degree");
      g = ms::app::gen_perturb(ms::app::parse_pochhammer_base(base), d, pert_degree,
                               replace0_opt->count() ? std::optional<double>(replace0) : std::nullopt,
                               rdeg_opt->count() ? std::optional<int>(replace_degree) : std::nullopt, gen_seed);
    } else {
      static const std::map<std::string, ms::io::ProblemKind> kinds = {
          {"similarity", ms::io::ProblemKind::Similarity},
          {"unitary", ms::io::ProblemKind::Unitary},
          {"oracle", ms::io::ProblemKind::Oracle},
          {"diagnostic", ms::io::ProblemKind::Diagnostic}};
      g = ms::app::gen_random_pair(d, pair_degree, n, gen_seed, kinds.at(kind));
    }
    emit(g, gen_out, quiet);
    return 0;
  });
}
