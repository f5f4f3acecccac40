#include <gtest/gtest.h>

#include <cmath>

#include "multishift/app.hpp"
#include "multishift/io.hpp"
#include "multishift/sampling.hpp"

using namespace multishift;
using io::Json;

namespace {

Json pochhammer_system(double lambda, double mu) {
  return Json{{"type", "pochhammer"}, {"d", 2}, {"fiber_dim", 2}, {"lambda", lambda}, {"mu", mu}};
}

Json similarity_problem() {
  return Json{{"version", 1},
              {"kind", "similarity"},
              {"systems", Json::array({pochhammer_system(1, 2), pochhammer_system(2, 1)})},
              {"options", {{"N", 24}}}};
}

std::string schema_path(const Json& j) {
  try {
    io::problem_from_json(j);
  } catch (const io::SchemaError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST(Matrix, JsonRoundTrip) {
  const CMatrix m(2, 2, {Complex(1, 2), Complex(-0.5, 0), Complex(0, 3), Complex(4, -1)});
  const Json j = io::matrix_to_json(m);
  EXPECT_EQ(j[0][1][0], -0.5);
  EXPECT_EQ(j[1][0][1], 3.0);
  const CMatrix back = io::matrix_from_json(j, "m");
  EXPECT_TRUE(std::equal(m.entries().begin(), m.entries().end(), back.entries().begin()));
}

TEST(Matrix, RejectsRaggedAndBadEntries) {
  try {
    io::matrix_from_json(Json::parse("[[[1,0],[2,0]],[[3,0]]]"), "m");
    FAIL();
  } catch (const io::SchemaError& e) {
    EXPECT_EQ(e.path(), "m[1]");
  }
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[[1,0,0]]]"), "m"), io::SchemaError);
  EXPECT_THROW(io::matrix_from_json(Json::parse("[]"), "m"), io::SchemaError);
}

TEST(Schema, AcceptsMinimalProblem) { EXPECT_EQ(schema_path(similarity_problem()), "<accepted>"); }

TEST(Schema, NamesTheOffendingField) {
  auto j = similarity_problem();
  j["systems"][0].erase("fiber_dim");
  EXPECT_EQ(schema_path(j), "systems[0].fiber_dim");

  j = similarity_problem();
  j["version"] = 2;
  EXPECT_EQ(schema_path(j), "version");

  j = similarity_problem();
  j["kind"] = "other";
  EXPECT_EQ(schema_path(j), "kind");

  j = similarity_problem();
  j["systems"].erase(1);
  EXPECT_EQ(schema_path(j), "systems");

  j = similarity_problem();
  j["systems"][1]["d"] = 3;
  EXPECT_EQ(schema_path(j), "systems[1].d");

  j = similarity_problem();
  j["systems"][0]["fiber_dim"] = 3;
  EXPECT_EQ(schema_path(j), "systems[0].fiber_dim");

  j = similarity_problem();
  j["systems"][1]["mu"] = -1.0;
  EXPECT_EQ(schema_path(j), "systems[1].mu");

  j = similarity_problem();
  j["systems"][0]["type"] = "mystery";
  EXPECT_EQ(schema_path(j), "systems[0].type");

  j = similarity_problem();
  j["options"]["degrees"] = {8, 4, 16, 24};
  EXPECT_EQ(schema_path(j), "options.degrees[1]");

  j = similarity_problem();
  j["options"]["tol"] = 0.0;
  EXPECT_EQ(schema_path(j), "options.tol");
}

TEST(Schema, MomentsNeedDegree) {
  const auto m = random_moment_system(1, 2, 1, 3);
  Json sys = io::to_json(io::moments_spec(m));
  sys.erase("N");
  Json j{{"version", 1}, {"kind", "validate"}, {"systems", Json::array({sys})}};
  EXPECT_EQ(schema_path(j), "systems[0].N");
}

TEST(Schema, InvalidJsonIsSchemaError) {
  try {
    io::parse_problem("{ not json");
    FAIL();
  } catch (const io::SchemaError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Schema);
    EXPECT_EQ(app::exit_code_for(e), app::kExitSchema);
  }
}

TEST(RoundTrip, GeneratedFilesAreByteStable) {
  std::vector<app::Generated> gens;
  gens.push_back(app::gen_pochhammer({1, 2}, {2, 1}, 2, 24));
  gens.push_back(app::gen_unitary_congruence(2, 4, 3, 7));
  gens.push_back(app::gen_perturb({1, 2}, 2, 20, 4.0, std::nullopt, 0));
  gens.push_back(app::gen_perturb({1, 2}, 2, 20, std::nullopt, 2, 5));
  gens.push_back(app::gen_random_pair(2, 3, 2, 11, io::ProblemKind::Oracle));
  for (const auto& g : gens) {
    const std::string first = io::dump(io::to_json(g.problem));
    const std::string second = io::dump(io::to_json(io::parse_problem(first)));
    EXPECT_EQ(first, second);
  }
}

TEST(RoundTrip, MomentsSpecResolvesBitExact) {
  const auto m = random_moment_system(2, 3, 2, 12);
  const auto spec = io::system_from_json(Json::parse(io::dump(io::to_json(io::moments_spec(m)))), "s");
  EXPECT_TRUE(io::resolve(spec, 3) == m);
}

TEST(Gen, PochhammerGroundTruth) {
  EXPECT_EQ(app::gen_pochhammer({1, 2}, {2, 1}, 2, 24).problem.ground_truth->at("similar"), true);
  EXPECT_EQ(app::gen_pochhammer({1, 2}, {1, 3}, 2, 24).problem.ground_truth->at("similar"), false);
}

TEST(Gen, PerturbEmbedsClosedFormCertificate) {
  const auto g = app::gen_perturb({1, 2}, 2, 20, 4.0, std::nullopt, 0);
  ASSERT_TRUE(g.problem.certificate.has_value());
  EXPECT_NEAR(g.problem.certificate->m1(), 0.25, 1e-15);
  EXPECT_NEAR(g.problem.certificate->m2(), 1.0, 1e-15);
  EXPECT_NEAR(g.problem.ground_truth->at("c1").get<double>(), 0.25, 1e-15);
}

TEST(Gen, UnitaryCongruenceHasAnswer) {
  const auto g = app::gen_unitary_congruence(2, 4, 3, 7);
  ASSERT_TRUE(g.answer.has_value());
  const CMatrix v0 = io::matrix_from_json(g.answer->at("v0"), "v0");
  EXPECT_LE((adjoint_times(v0, v0) - CMatrix::identity(3)).max_abs(), 1e-12);
}

TEST(Gen, ParsesPochhammerBase) {
  const auto p = app::parse_pochhammer_base("pochhammer:1.5,2");
  EXPECT_EQ(p.lambda, 1.5);
  EXPECT_EQ(p.mu, 2.0);
  EXPECT_THROW(app::parse_pochhammer_base("homogeneous:1"), Error);
  EXPECT_THROW(app::parse_pochhammer_base("pochhammer:1"), Error);
}

TEST(Run, DefaultDegrees) {
  EXPECT_EQ(app::default_degrees(24), (std::vector<int>{6, 12, 18, 24}));
  EXPECT_EQ(app::default_degrees(2), (std::vector<int>{1, 2}));
}

TEST(Run, PochhammerSimilarity) {
  const auto r = app::run_problem(io::problem_from_json(similarity_problem()), {.timing = false});
  EXPECT_EQ(r.exit_code, app::kExitOk);
  EXPECT_EQ(r.report["verdict"], "SIMILAR_EVIDENCE");
  const auto& cert = r.report["certificate"];
  EXPECT_LE(cert["log_m2"].get<double>() - cert["log_m1"].get<double>(), 1e-6);
  EXPECT_FALSE(r.report.contains("timing"));
}

TEST(Run, IdenticalSystemsAreUnitarilyEquivalent) {
  const auto spec = io::moments_spec(random_moment_system(2, 3, 2, 13));
  io::ProblemFile p;
  p.kind = io::ProblemKind::Unitary;
  p.systems = {spec, spec};
  const auto r = app::run_problem(p, {.timing = false});
  EXPECT_EQ(r.exit_code, app::kExitOk);
  EXPECT_EQ(r.report["verdict"], "YES");
  const CMatrix v = io::matrix_from_json(r.report["v"], "v");
  EXPECT_LE((v - CMatrix::identity(2)).max_abs(), 1e-10);
}

TEST(Run, OracleIsConsistent) {
  const auto g = app::gen_random_pair(2, 3, 2, 14, io::ProblemKind::Oracle);
  const auto r = app::run_problem(g.problem, {.timing = false});
  EXPECT_EQ(r.exit_code, app::kExitOk);
  EXPECT_EQ(r.report["verdict"], "CONSISTENT");
}

TEST(Run, ReportsAreDeterministic) {
  const auto g = app::gen_unitary_congruence(2, 4, 3, 15);
  const app::RunFlags flags{.timing = false};
  EXPECT_EQ(io::dump(app::run_problem(g.problem, flags).report), io::dump(app::run_problem(g.problem, flags).report));
}

TEST(Run, InvalidWeightsFailValidation) {
  // Identity weights except two entries that break commutation at the origin.
  const Json id = io::matrix_to_json(CMatrix::identity(2));
  Json weights = Json::array();
  for (const auto& a : enumerate(2, 1)) {
    for (int j = 1; j <= 2; ++j) {
      Json m = id;
      if (a == MultiIndex({0, 0}) && j == 1) m = Json::parse("[[[1,0],[1,0]],[[0,0],[1,0]]]");
      if (a == MultiIndex({1, 0}) && j == 2) m = Json::parse("[[[0,0],[1,0]],[[1,0],[0,0]]]");
      weights.push_back({{"index", a.components()}, {"j", j}, {"matrix", m}});
    }
  }
  Json sys{{"type", "weights"}, {"d", 2}, {"N", 2}, {"fiber_dim", 2}, {"g0", {{"matrix", id}}}, {"weights", weights}};
  const auto p = io::problem_from_json(Json{{"version", 1}, {"kind", "validate"}, {"systems", Json::array({sys})}});
  const auto r = app::run_problem(p, {.timing = false});
  EXPECT_EQ(r.exit_code, app::kExitInvalidInput);
  EXPECT_EQ(r.report["verdict"], "INVALID");
}
