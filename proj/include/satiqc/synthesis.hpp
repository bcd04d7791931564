#pragma once

#include "satiqc/iqc.hpp"
#include "satiqc/lft.hpp"
#include "satiqc/lmi_expr.hpp"
#include "satiqc/sdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace satiqc {

// Nonlinearity IQC selection for one synthesis run.
struct IqcSpec {
  IqcKind kind = IqcKind::popov;
  double eps = 0.01;
  std::optional<StateSpace> h;  // Zames-Falb filter, default_zf_h() when empty
};

enum class Strategy { popov, zames_falb, sector, mixed };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
std::vector<IqcSpec> strategy_iqcs(Strategy s, double eps = 0.01);

// Builds and triangularizes the selected multipliers for input width nu.
std::vector<TriangularFactor> make_nonlinearity_filters(const std::vector<IqcSpec>& specs, double alpha, int nu,
                                                        const FactorOptions& fopts = {});

// Re(s) < -rho intersected with the sector |arg(-s)| < theta; theta = pi/2
// keeps only the half-plane.
struct PoleRegion {
  double rho = 1.0;
  double theta = 1.0471975511965976;  // pi/3
};

struct SynthesisOptions {
  double q_max = 1e6;  // Q <= q_max I; <= 0 disables the bound
  double strict_margin = 1e-8;
  std::optional<double> gamma_max;  // adds gamma <= gamma_max
  std::optional<PoleRegion> pole_region;
};

struct SynthesisProblem {
  LmiProblem lmi;
  Interconnection ic;
  Var Q, F_hat, H_hat, lambda_hat, gamma;
  std::vector<Var> Gamma_hat;       // one per uncertainty block
  std::vector<Var> lambda_hat_l;    // one per nonlinearity filter
  Expr AQ;                          // A0 Q + Bv F_hat
  Expr Gamma_hat_expr;              // block-diagonal assembly
};

SynthesisProblem build_synthesis_lmi(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                                     const std::vector<FactoredIQC>& unc_filters,
                                     const SynthesisOptions& opts = {});
// Throws std::invalid_argument for rho <= 0 or theta outside (0, pi/2].
void add_pole_region(SynthesisProblem& prob, double rho, double theta);

struct SynthesisDiagnostics {
  SdpStatus status = SdpStatus::numerical_error;
  std::string message;
  int iterations = 0;
  double primal_infeas = 0.0, dual_infeas = 0.0, rel_gap = 0.0;
  std::vector<std::pair<std::string, double>> margins;  // max eigenvalue, < 0 satisfied
  std::vector<double> relaxation_gap;                   // per nonlinearity filter
};

struct SynthesisResult {
  double gamma = 0.0;
  Mat F, H;
  std::vector<double> lambdas;  // lambda_l = 1 / lambda_hat_l
  Mat Gamma;                    // block-diagonal, inverse of Gamma_hat
  Mat Gamma_hat;
  Mat Q;
  double lambda_hat = 0.0;
  std::vector<double> lambda_hat_l;
  CVec poles;                   // closed-loop eigenvalues
  SynthesisDiagnostics diag;
  bool ok() const { return diag.status == SdpStatus::optimal; }
};

SynthesisResult solve_synthesis(const SynthesisProblem& prob, const SdpOptions& sopts = {});

// One-call pipeline: loop transform, filters, LMI, solve.
struct SynthesisRun {
  AugmentedPlant aug;
  SynthesisProblem problem;
  SynthesisResult result;
};
SynthesisRun synthesize(const SaturatedLFTPlant& plant, const std::vector<IqcSpec>& iqcs,
                        const SynthesisOptions& opts = {}, const SdpOptions& sopts = {},
                        const FactorOptions& fopts = {});

// Analysis LMI in the affine (P, X_k / chi_k, lambda_l, gamma) form.
struct AnalysisProblem {
  LmiProblem lmi;
  Var P, gamma;
  std::vector<Var> scalings;  // per uncertainty block
  std::vector<int> block_sizes;
  std::vector<Var> lambdas;   // per nonlinearity filter
};

AnalysisProblem build_analysis_lmi(const ClosedLoop& cl, const UncertaintyStructure& structure, int n_iqc,
                                   double strict_margin = 1e-8);

struct AnalysisResult {
  SdpStatus status = SdpStatus::numerical_error;
  double gamma = 0.0;
  Mat P, Gamma;
  std::vector<double> lambdas;
  std::string message;
  bool ok() const { return status == SdpStatus::optimal; }
};
AnalysisResult solve_analysis(const AnalysisProblem& prob, const SdpOptions& sopts = {});

// Main analysis matrix at fixed values (affine form).
Mat analysis_matrix(const ClosedLoop& cl, const UncertaintyStructure& structure, const Mat& P, const Mat& Gamma,
                    const std::vector<double>& lambdas, double gamma);
// Same condition with the scalings and performance channel kept as separate
// Schur blocks (-Gamma^{-1}, -Lambda, -gamma I).
Mat analysis_matrix_schur(const ClosedLoop& cl, const UncertaintyStructure& structure, const Mat& P,
                          const Mat& Gamma, const std::vector<double>& lambdas, double gamma);

// Substitutes P = Q^{-1}, Gamma = Gamma_hat^{-1}, lambda_l = 1/lambda_hat_l into
// the analysis matrix; returns lambda_max / max(1, ||M||).
double round_trip_margin(const SynthesisProblem& prob, const SynthesisResult& res);

// Static sector anti-windup baseline; the uncertainty channel is ignored.
struct AntiWindupProblem {
  LmiProblem lmi;
  Var Q, Gamma, F_hat, H_hat, gamma;
};
AntiWindupProblem build_antiwindup_lmi(const SaturatedLFTPlant& plant, const SynthesisOptions& opts = {});

struct AntiWindupResult {
  SdpStatus status = SdpStatus::numerical_error;
  double gamma = 0.0;
  Mat F, H, Q, Gamma;
  std::string message;
  bool ok() const { return status == SdpStatus::optimal; }
};
AntiWindupResult solve_antiwindup(const AntiWindupProblem& prob, const SdpOptions& sopts = {});

}  // namespace satiqc
