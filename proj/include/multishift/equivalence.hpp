#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "multishift/numerics.hpp"
#include "multishift/parallel.hpp"
#include "multishift/shiftcore.hpp"

namespace multishift {

/// (C, m1, m2) with m1 C^* G_a C <= G~_a <= m2 C^* G_a C. The constants are
/// held in log form.
struct SimilarityCertificate {
  CMatrix c;
  double log_m1 = 0.0;
  double log_m2 = 0.0;

  double m1() const { return std::exp(log_m1); }
  double m2() const { return std::exp(log_m2); }
  double log_ratio() const { return log_m2 - log_m1; }
};

struct SandwichResult {
  double log_m1 = 0.0;
  double log_m2 = 0.0;
  double log_ratio = 0.0;
  std::size_t argmin = 0;  // positions attaining m1 / m2
  std::size_t argmax = 0;

  double m1() const { return std::exp(log_m1); }
  double m2() const { return std::exp(log_m2); }
};

/// Precomputed per-index factors for repeated sandwich evaluations against
/// varying C. With G = L L^* and G~ = L~ L~^*, the pencil (G~, C^* G C) has
/// eigenvalues 1 / sigma^2 of L^* C L~^{-*}.
class SandwichEvaluator {
 public:
  SandwichEvaluator(const MomentSystem& m, const MomentSystem& m_tilde, Exec exec = Exec::Parallel);

  /// Throws SingularC when C is not invertible.
  SandwichResult evaluate(const CMatrix& c) const;
  /// evaluate(c).log_ratio, or +inf when C is singular.
  double log_ratio(const CMatrix& c) const;

  std::size_t fiber_dim() const noexcept { return n_; }

 private:
  std::size_t n_;
  Exec exec_;
  std::vector<CMatrix> left_;   // L_a^*
  std::vector<CMatrix> right_;  // L~_a^{-*}
  std::vector<double> offset_;  // logscale(G~_a) - logscale(G_a)
};

SandwichResult sandwich_ratio(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& c,
                              Exec exec = Exec::Parallel);

struct VerificationReport {
  bool passed = false;
  double tolerance = 0.0;
  /// Smallest eigenvalue of G~ - m1 C^*GC (resp. m2 C^*GC - G~) over the
  /// scale of the terms, per index.
  std::vector<double> lower_margins;
  std::vector<double> upper_margins;
  double worst_lower = 0.0;
  double worst_upper = 0.0;
  std::size_t worst_lower_pos = 0;
  std::size_t worst_upper_pos = 0;
};

VerificationReport verify_certificate(const MomentSystem& m, const MomentSystem& m_tilde,
                                      const SimilarityCertificate& cert, double tol,
                                      Exec exec = Exec::Parallel);

struct OptimizeOptions {
  int iterations = 200;
  int restarts = 2;  // extra seeded unitary starts besides W = I
  std::uint64_t seed = 0;
  double fd_step = 1e-5;
  Exec exec = Exec::Parallel;
};

/// Searches for a certificate: exact at a = 0, then unitary descent, then
/// local refinement over all invertible C.
SimilarityCertificate optimize_C(const MomentSystem& m, const MomentSystem& m_tilde,
                                 const OptimizeOptions& options = {});

enum class GrowthVerdict { SimilarEvidence, NotSimilarEvidence, Inconclusive };
const char* to_string(GrowthVerdict v);

struct GrowthThresholds {
  double ratio_cap = 1e3;  // bound on m2/m1
  double slope_eps = 0.1;
  double slope_floor = 0.3;
  double min_r_squared = 0.9;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};
/// Ordinary least squares y ~ slope * x + intercept. r_squared is 1 when y
/// has no spread.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct GrowthRow {
  int degree = 0;
  double log_ratio = 0.0;
  SimilarityCertificate certificate;
};

struct GrowthDiagnostic {
  std::vector<GrowthRow> rows;
  LinearFit fit;  // log_ratio against log(degree)
  double max_log_ratio = 0.0;
  GrowthVerdict verdict = GrowthVerdict::Inconclusive;
};

using PairGenerator = std::function<std::pair<MomentSystem, MomentSystem>(int degree)>;

GrowthDiagnostic growth_diagnostic(const PairGenerator& generate, std::span<const int> degrees,
                                   const OptimizeOptions& options = {},
                                   const GrowthThresholds& thresholds = {});

struct UnitaryResult {
  bool equivalent = false;
  std::optional<CMatrix> v;
  double max_residual = 0.0;
  std::optional<std::size_t> witness_pos;  // spectral mismatch witness
  double witness_gap = 0.0;
  std::string reason;
};

/// Simultaneous unitary congruence G~_a = V^* G_a V.
UnitaryResult test_unitary_equivalence(const MomentSystem& m, const MomentSystem& m_tilde, double tol,
                                       std::uint64_t seed = 0, Exec exec = Exec::Parallel);

/// max_a ||G~_a - V^* G_a V|| / ||G_a|| (spectral norms, common scale).
double congruence_residual(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& v,
                           Exec exec = Exec::Parallel);

}  // namespace multishift
