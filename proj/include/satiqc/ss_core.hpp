#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <initializer_list>
#include <string>
#include <vector>

namespace satiqc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

// Thrown when a numerical routine cannot produce a valid answer (as opposed
// to std::invalid_argument for malformed input).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Concatenation of dense blocks; sizes must agree.
Mat hcat(std::initializer_list<Mat> parts);
Mat vcat(std::initializer_list<Mat> parts);

struct StateSpace {
  Mat A, B, C, D;

  StateSpace() = default;
  StateSpace(Mat a, Mat b, Mat c, Mat d);

  // Pure gain, zero states.
  static StateSpace gain(const Mat& d);

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(D.cols()); }
  int ny() const { return static_cast<int>(D.rows()); }
  bool is_static() const { return nx() == 0; }

  // D + C (sI - A)^{-1} B, solved column by column.
  CMat eval(cplx s) const;
  CMat freq(double w) const { return eval(cplx(0.0, w)); }

  StateSpace sub(const std::vector<int>& rows, const std::vector<int>& cols) const;
};

// W = diag(I_m1, -I_m2)
struct SignatureMatrix {
  int m1 = 0;
  int m2 = 0;
  int size() const { return m1 + m2; }
  Mat matrix() const;
};

CVec eigenvalues(const Mat& M);
double spectral_abscissa(const Mat& M);
bool is_hurwitz(const Mat& M, double margin = 0.0);

// g2 * g1 (g1 drives g2).
StateSpace series(const StateSpace& g1, const StateSpace& g2);
StateSpace parallel(const StateSpace& g1, const StateSpace& g2);
// blkdiag(g1, g2) acting on stacked inputs/outputs.
StateSpace append(const StateSpace& g1, const StateSpace& g2);
// [g1; g2] with a shared input.
StateSpace stack_outputs(const StateSpace& g1, const StateSpace& g2);
// G~(s) = G(-s)^T
StateSpace para_conjugate(const StateSpace& g);
// Requires invertible D.
StateSpace inverse(const StateSpace& g);
StateSpace scaled(const StateSpace& g, double k);
StateSpace left_multiply(const Mat& L, const StateSpace& g);
StateSpace right_multiply(const StateSpace& g, const Mat& R);

// Removes unobservable then uncontrollable modes. Rows (resp. columns) of the
// Krylov stacks are kept greedily in stack order when they raise the rank;
// with S the kept rows and U a right inverse, the reduction is (SAU, SB, CU).
StateSpace minimal_realization(const StateSpace& g, double tol = 1e-9);

// A X + X A^T + Q = 0, A Hurwitz (or at least no eigenvalue pair summing to 0).
Mat solve_lyapunov(const Mat& A, const Mat& Q);

struct OrderedSchur {
  CMat T;  // upper triangular
  CMat U;  // unitary, M = U T U^*
  int k = 0;  // leading selected eigenvalues
};
// Complex Schur form with the selected eigenvalues moved to the leading block.
OrderedSchur ordered_schur(const Mat& M, const std::function<bool(cplx)>& select);
// Real orthonormal basis of the invariant subspace spanned by the selected
// eigenvalues; selection must be closed under conjugation.
Mat real_invariant_subspace(const Mat& M, const std::function<bool(cplx)>& select);

struct AreResult {
  Mat X;
  Mat closed_loop;  // A - B D^{-1}(B^T X + C)
  double residual = 0.0;
  double eps_applied = 0.0;  // perturbation added to D(0,0), if any
};

// Stabilizing solution of A^T X + X A - (X B + C^T) D^{-1} (B^T X + C) = 0.
// D may be indefinite. If D is singular and eps_reg > 0, eps_reg is added to
// D(0,0) and recorded; with eps_reg == 0 a singular D throws.
AreResult solve_are(const Mat& A, const Mat& B, const Mat& C, const Mat& D, double eps_reg = 0.0);
double are_residual(const Mat& A, const Mat& B, const Mat& C, const Mat& D, const Mat& X);

struct StableSplit {
  StateSpace stable;      // carries the full feedthrough D
  StateSpace antistable;  // strictly proper
};
// g = stable + antistable; throws if g has poles within tol of the imaginary axis.
StableSplit stable_antistable_split(const StateSpace& g, double tol = 1e-9);

// Square-root balanced realization of a stable minimal system. Each row of B
// is sign-normalized so that its largest-magnitude entry is positive.
StateSpace balanced_realization(const StateSpace& g);

// Numerator and denominator coefficients (highest power first) of the SISO
// channel (i, j); denominator is monic.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;
};
TransferFunction siso_tf(const StateSpace& g, int i, int j);
std::vector<double> poly_from_roots(const CVec& roots);
std::string format_tf(const TransferFunction& tf, int precision = 4);

std::vector<double> logspace(double lo_exp, double hi_exp, int n);

// max_w ||G(jw)||_2 on a grid refined around the peak.
double hinf_norm(const StateSpace& g, double wmin = 1e-3, double wmax = 1e4, int n = 400);

}  // namespace satiqc
