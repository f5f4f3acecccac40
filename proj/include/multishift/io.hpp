#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "multishift/equivalence.hpp"
#include "multishift/error.hpp"
#include "multishift/kernelgen.hpp"
#include "multishift/shiftcore.hpp"

namespace multishift::io {

using Json = nlohmann::json;

/// Malformed problem file; `path()` names the offending field, e.g.
/// "systems[0].fiber_dim".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(ErrorCode::Schema, path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path);

/// exp(logscale) * matrix, kept in that split form on disk.
struct ScaledEntry {
  std::vector<int> index;  // empty when not indexed
  std::size_t direction = 0;  // 0-based; written 1-based as "j" for weights
  double logscale = 0.0;
  CMatrix matrix;
};

struct MomentsBody {
  std::vector<ScaledEntry> grams;
};
struct WeightsBody {
  ScaledEntry g0;
  std::vector<ScaledEntry> weights;
};
struct PochhammerBody {
  double lambda = 1.0;
  double mu = 1.0;
};
struct HomogeneousBody {
  std::vector<ScaledEntry> a;  // A_0, A_1, ... by degree
};
struct PerturbedBody {
  std::variant<PochhammerBody, HomogeneousBody> base;
  std::vector<ScaledEntry> replacements;  // kernel coefficients D_a
};

struct SystemSpec {
  std::size_t d = 1;
  std::optional<int> max_degree;
  std::size_t fiber_dim = 1;
  std::variant<MomentsBody, WeightsBody, PochhammerBody, HomogeneousBody, PerturbedBody> body;

  const char* type_name() const;
  /// Largest degree this spec can produce, if bounded.
  std::optional<int> degree_limit() const;
};

enum class ProblemKind { Similarity, Unitary, Oracle, Diagnostic, Validate };
const char* to_string(ProblemKind k);

struct ProblemOptions {
  std::optional<int> max_degree;
  std::vector<int> degrees;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct ProblemFile {
  int version = 1;
  ProblemKind kind = ProblemKind::Similarity;
  std::vector<SystemSpec> systems;
  ProblemOptions options;
  std::optional<Json> ground_truth;  // advisory, never read by the solvers
  std::optional<SimilarityCertificate> certificate;
};

Json to_json(const SystemSpec& s);
SystemSpec system_from_json(const Json& j, const std::string& path);

Json to_json(const SimilarityCertificate& c);
SimilarityCertificate certificate_from_json(const Json& j, const std::string& path);

Json to_json(const ProblemFile& p);
/// Throws SchemaError naming the first offending field.
ProblemFile problem_from_json(const Json& j);
ProblemFile parse_problem(const std::string& text);
/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

/// Builds the moment system at the given degree (generated specs) or
/// restricts an explicit one.
MomentSystem resolve(const SystemSpec& s, int max_degree, Exec exec = Exec::Parallel);
/// The weight system of a "weights" spec at its own N; nullopt otherwise.
std::optional<WeightSystem> weight_system(const SystemSpec& s);
/// Kernel coefficients for generated specs (pochhammer, homogeneous, perturbed).
KernelSpec resolve_kernel(const SystemSpec& s, int max_degree);

SystemSpec moments_spec(const MomentSystem& m);
SystemSpec pochhammer_spec(const PochhammerPair& p, std::size_t d, std::optional<int> max_degree = std::nullopt);

}  // namespace multishift::io
