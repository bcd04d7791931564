#pragma once

#include "satiqc/ss_core.hpp"

#include <string>
#include <vector>

namespace satiqc {

enum class IqcKind { popov, zames_falb, sector, uncertainty_scalar, uncertainty_full };

std::string to_string(IqcKind k);
IqcKind iqc_kind_from_string(const std::string& s);

// Pi(s) realized as Phi~ M Phi for a stable basis Phi; `pi` is the product
// realization (not yet minimal). Inputs are partitioned (m1, m2).
struct Multiplier {
  StateSpace pi;
  int m1 = 0;
  int m2 = 0;
  IqcKind kind = IqcKind::sector;
  bool transformed = false;  // built around diag(1/(s+alpha), 1)
  double alpha = 0.0;

  CMat eval(double w) const { return pi.freq(w); }
};

// Static [[eps, 1], [1, -2-eps]].
Multiplier make_sector_multiplier(double eps = 0.01);
// diag(1/(s+a), 1)~ [[eps, 1], [1, -2-eps]] diag(1/(s+a), 1)
Multiplier make_sector_transformed_multiplier(double alpha, double eps = 0.01);
// diag(1/(s+a), 1)~ [[eps, -s], [s, -eps]] diag(1/(s+a), 1)
Multiplier make_popov_multiplier(double alpha, double eps = 0.01);
// diag(1/(s+a), 1)~ [[eps, 1+H], [1+H~, -2-eps-H-H~]] diag(1/(s+a), 1)
Multiplier make_zames_falb_multiplier(double alpha, double eps, const StateSpace& h);
Multiplier make_zames_falb_multiplier(double alpha, double eps = 0.01);

// 1/(s+2)
StateSpace default_zf_h();
// Integral of |h(t)| for a stable SISO strictly proper h (first-order in
// closed form, otherwise adaptive Simpson to tol).
double l1_norm(const StateSpace& h, double tol = 1e-6);

// Repeats a SISO-pair multiplier across nu independent channels; inputs are
// reordered to (v_1..v_nu, w_1..w_nu).
Multiplier replicate(const Multiplier& m, int nu);

// Standard check grid: 40 log-spaced points in [1e-3, 1e3] plus 1e6.
std::vector<double> check_grid();

struct SignCheck {
  bool ok = false;
  double min_pi11 = 0.0;  // smallest eigenvalue of Pi11 seen (grid and infinity)
  double max_pi22 = 0.0;  // largest eigenvalue of Pi22 seen
  double hermitian_defect = 0.0;
};
SignCheck check_multiplier_signs(const Multiplier& m, const std::vector<double>& grid = check_grid());

struct FactorOptions {
  double eps_reg = 1e-9;       // added to R(0,0) when R is singular
  double minreal_tol = 1e-9;
  bool isotropic_when_possible = true;  // see congruence_factor
};

struct FactoredIQC {
  StateSpace psi;
  SignatureMatrix w;
  int m1 = 0;
  int m2 = 0;
  IqcKind kind = IqcKind::sector;
  // diagnostics
  Mat X;                 // ARE solution (empty for static multipliers)
  Mat R;                 // D_s actually factored (after perturbation)
  Mat M;                 // D_s = M^T W M
  StateSpace stable_part;  // (A_s, B_s, C_s, D_s) in balanced coordinates
  double eps_applied = 0.0;
  double bound = 1.0;    // uncertainty bound b (uncertainty kinds only)
  int block_size = 0;    // uncertainty block size (uncertainty kinds only)
};

// Factorizes R = M^T W M, W = diag(I_m1, -I_m2). When R11 = 0 and R12 is
// square and invertible, M = [[I, a], [I, a - R12]]; otherwise block LDL^T
// pivoting on R22.
Mat congruence_factor(const Mat& R, int m1, int m2, bool isotropic_when_possible = true);

struct UncertaintyBlock {
  bool repeated_scalar = true;
  int size = 1;
};
// Psi = diag(b I, I); the scaling itself is a synthesis variable.
FactoredIQC make_uncertainty_iqc(const UncertaintyBlock& block, double b);

FactoredIQC j_spectral_factorize(const Multiplier& pi, const FactorOptions& opts = {});

// max_w ||Psi(jw)^* W Psi(jw) - Pi(jw)||_F over the grid.
double identity_residual(const FactoredIQC& f, const Multiplier& pi, const std::vector<double>& grid = check_grid());

struct TriangularFactor {
  StateSpace psi_bar;  // outputs (m1, m2); bottom rows are exactly [0, I]
  int m1 = 0;
  int m2 = 0;
  IqcKind kind = IqcKind::sector;

  // pieces of the realization used by the closed-loop assembly
  Mat AN() const { return psi_bar.A; }
  Mat BN1() const { return psi_bar.B.leftCols(m1); }
  Mat BN2() const { return psi_bar.B.rightCols(m2); }
  Mat CN() const { return psi_bar.C.topRows(m1); }
  Mat DN1() const { return psi_bar.D.topLeftCorner(m1, m1); }
  Mat DN2() const { return psi_bar.D.topRightCorner(m1, m2); }
};

TriangularFactor to_triangular(const FactoredIQC& f, double minreal_tol = 1e-9);

// Drives Psi with sampled inputs (rows of v and w are time samples spaced dt)
// and checks that the running integral of z^T W z stays >= -tol.
struct HardIqcReport {
  bool ok = false;
  double min_integral = 0.0;
  double final_integral = 0.0;
};
HardIqcReport hard_iqc_integral(const FactoredIQC& f, const Mat& v, const Mat& w, double dt, double horizon,
                                double tol = 1e-6);
bool check_hard_iqc(const FactoredIQC& f, const Mat& v, const Mat& w, double dt, double horizon);

}  // namespace satiqc
