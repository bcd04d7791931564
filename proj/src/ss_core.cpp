#include "satiqc/ss_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace satiqc {

namespace {

void check_square(const Mat& M, const char* what) {
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

Mat blkdiag(const Mat& a, const Mat& b) {
  Mat r = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  r.topLeftCorner(a.rows(), a.cols()) = a;
  r.bottomRightCorner(b.rows(), b.cols()) = b;
  return r;
}

// Greedy order-preserving row selection: returns indices of rows of K that
// increase the rank, judged by the Gram-Schmidt residual against tol.
std::vector<int> independent_rows(const Mat& K, double tol) {
  std::vector<int> keep;
  Mat basis(K.cols(), 0);
  for (int i = 0; i < K.rows(); ++i) {
    Vec r = K.row(i).transpose();
    const double nrm = r.norm();
    if (nrm <= tol) continue;
    for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.transpose() * r);
    if (r.norm() > tol) {
      keep.push_back(i);
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = r / r.norm();
      if (basis.cols() == K.cols()) break;
    }
  }
  return keep;
}

StateSpace observable_part(const StateSpace& g, double tol) {
  const int n = g.nx();
  if (n == 0) return g;
  const int p = g.ny();
  Mat O(p * n, n);
  Mat blk = g.C;
  for (int k = 0; k < n; ++k) {
    O.middleRows(k * p, p) = blk;
    blk = blk * g.A;
  }
  const double scale = std::max(1.0, O.norm());
  auto rows = independent_rows(O, tol * scale);
  if (static_cast<int>(rows.size()) == n) return g;
  Mat S(rows.size(), n);
  for (size_t i = 0; i < rows.size(); ++i) S.row(i) = O.row(rows[i]);
  // U = S^T (S S^T)^{-1}, a right inverse of S.
  Mat U = S.transpose() * (S * S.transpose()).inverse();
  return StateSpace(S * g.A * U, S * g.B, g.C * U, g.D);
}

}  // namespace

StateSpace::StateSpace(Mat a, Mat b, Mat c, Mat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  const auto n = A.rows();
  if (A.cols() != n) throw std::invalid_argument("StateSpace: A must be square");
  if (B.rows() != n) throw std::invalid_argument("StateSpace: B row count must match A");
  if (C.cols() != n) throw std::invalid_argument("StateSpace: C column count must match A");
  if (D.rows() != C.rows()) throw std::invalid_argument("StateSpace: D row count must match C");
  if (D.cols() != B.cols()) throw std::invalid_argument("StateSpace: D column count must match B");
}

StateSpace StateSpace::gain(const Mat& d) {
  return StateSpace(Mat(0, 0), Mat(0, d.cols()), Mat(d.rows(), 0), d);
}

CMat StateSpace::eval(cplx s) const {
  CMat G = D.cast<cplx>();
  if (nx() == 0) return G;
  CMat M = s * CMat::Identity(nx(), nx()) - A.cast<cplx>();
  Eigen::PartialPivLU<CMat> lu(M);
  CMat X = lu.solve(B.cast<cplx>());
  G += C.cast<cplx>() * X;
  return G;
}

StateSpace StateSpace::sub(const std::vector<int>& rows, const std::vector<int>& cols) const {
  Mat b(nx(), cols.size()), c(rows.size(), nx()), d(rows.size(), cols.size());
  for (size_t j = 0; j < cols.size(); ++j) b.col(j) = B.col(cols[j]);
  for (size_t i = 0; i < rows.size(); ++i) {
    c.row(i) = C.row(rows[i]);
    for (size_t j = 0; j < cols.size(); ++j) d(i, j) = D(rows[i], cols[j]);
  }
  return StateSpace(A, b, c, d);
}

Mat SignatureMatrix::matrix() const {
  Mat W = Mat::Zero(size(), size());
  W.topLeftCorner(m1, m1).setIdentity();
  W.bottomRightCorner(m2, m2) = -Mat::Identity(m2, m2);
  return W;
}

CVec eigenvalues(const Mat& M) {
  check_square(M, "eigenvalues");
  if (M.rows() == 0) return CVec(0);
  Eigen::EigenSolver<Mat> es(M, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues: QR iteration failed");
  return es.eigenvalues();
}

double spectral_abscissa(const Mat& M) {
  CVec ev = eigenvalues(M);
  double r = -std::numeric_limits<double>::infinity();
  for (auto& l : ev) r = std::max(r, l.real());
  return r;
}

bool is_hurwitz(const Mat& M, double margin) {
  check_square(M, "is_hurwitz");
  if (margin < 0) throw std::invalid_argument("is_hurwitz: margin must be >= 0");
  if (M.rows() == 0) return true;
  return spectral_abscissa(M) < -margin;
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
  if (g1.ny() != g2.nu()) throw std::invalid_argument("series: output of g1 must match input of g2");
  const int n1 = g1.nx(), n2 = g2.nx();
  Mat A = Mat::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g1.A;
  A.bottomLeftCorner(n2, n1) = g2.B * g1.C;
  A.bottomRightCorner(n2, n2) = g2.A;
  Mat B(n1 + n2, g1.nu());
  B.topRows(n1) = g1.B;
  B.bottomRows(n2) = g2.B * g1.D;
  Mat C(g2.ny(), n1 + n2);
  C.leftCols(n1) = g2.D * g1.C;
  C.rightCols(n2) = g2.C;
  return StateSpace(A, B, C, g2.D * g1.D);
}

StateSpace parallel(const StateSpace& g1, const StateSpace& g2) {
  if (g1.nu() != g2.nu() || g1.ny() != g2.ny()) throw std::invalid_argument("parallel: dimension mismatch");
  Mat B(g1.nx() + g2.nx(), g1.nu());
  B << g1.B, g2.B;
  Mat C(g1.ny(), g1.nx() + g2.nx());
  C << g1.C, g2.C;
  return StateSpace(blkdiag(g1.A, g2.A), B, C, g1.D + g2.D);
}

StateSpace append(const StateSpace& g1, const StateSpace& g2) {
  return StateSpace(blkdiag(g1.A, g2.A), blkdiag(g1.B, g2.B), blkdiag(g1.C, g2.C), blkdiag(g1.D, g2.D));
}

StateSpace stack_outputs(const StateSpace& g1, const StateSpace& g2) {
  if (g1.nu() != g2.nu()) throw std::invalid_argument("stack_outputs: input dimension mismatch");
  Mat B(g1.nx() + g2.nx(), g1.nu());
  B << g1.B, g2.B;
  Mat D(g1.ny() + g2.ny(), g1.nu());
  D << g1.D, g2.D;
  return StateSpace(blkdiag(g1.A, g2.A), B, blkdiag(g1.C, g2.C), D);
}

StateSpace para_conjugate(const StateSpace& g) {
  return StateSpace(-g.A.transpose(), g.C.transpose(), -g.B.transpose(), g.D.transpose());
}

StateSpace inverse(const StateSpace& g) {
  if (g.nu() != g.ny()) throw std::invalid_argument("inverse: system must be square");
  Eigen::FullPivLU<Mat> lu(g.D);
  if (!lu.isInvertible()) throw NumericalError("inverse: feedthrough is singular");
  Mat Di = lu.inverse();
  return StateSpace(g.A - g.B * Di * g.C, g.B * Di, -Di * g.C, Di);
}

StateSpace scaled(const StateSpace& g, double k) { return StateSpace(g.A, g.B, k * g.C, k * g.D); }

StateSpace left_multiply(const Mat& L, const StateSpace& g) {
  if (L.cols() != g.ny()) throw std::invalid_argument("left_multiply: dimension mismatch");
  return StateSpace(g.A, g.B, L * g.C, L * g.D);
}

StateSpace right_multiply(const StateSpace& g, const Mat& R) {
  if (R.rows() != g.nu()) throw std::invalid_argument("right_multiply: dimension mismatch");
  return StateSpace(g.A, g.B * R, g.C, g.D * R);
}

StateSpace minimal_realization(const StateSpace& g, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("minimal_realization: tol must be positive");
  StateSpace o = observable_part(g, tol);
  // controllability by duality
  StateSpace dual(o.A.transpose(), o.C.transpose(), o.B.transpose(), o.D.transpose());
  StateSpace r = observable_part(dual, tol);
  return StateSpace(r.A.transpose(), r.C.transpose(), r.B.transpose(), r.D.transpose());
}

Mat solve_lyapunov(const Mat& A, const Mat& Q) {
  check_square(A, "solve_lyapunov");
  const int n = static_cast<int>(A.rows());
  if (Q.rows() != n || Q.cols() != n) throw std::invalid_argument("solve_lyapunov: Q dimension mismatch");
  if (n == 0) return Mat(0, 0);
  Eigen::ComplexSchur<CMat> cs(A.cast<cplx>());
  const CMat& T = cs.matrixT();
  const CMat& U = cs.matrixU();
  CMat F = -(U.adjoint() * Q.cast<cplx>() * U);
  // T Y + Y T^* = F, solved for columns from the last one backwards.
  CMat Y = CMat::Zero(n, n);
  for (int j = n - 1; j >= 0; --j) {
    CVec rhs = F.col(j);
    for (int k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    CMat M = T;
    M.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  Mat X = (U * Y * U.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

OrderedSchur ordered_schur(const Mat& M, const std::function<bool(cplx)>& select) {
  check_square(M, "ordered_schur");
  const int n = static_cast<int>(M.rows());
  OrderedSchur out;
  if (n == 0) return out;
  Eigen::ComplexSchur<CMat> cs(M.cast<cplx>());
  if (cs.info() != Eigen::Success) throw NumericalError("ordered_schur: Schur iteration failed");
  CMat T = cs.matrixT();
  CMat U = cs.matrixU();
  std::vector<bool> sel(n);
  for (int i = 0; i < n; ++i) sel[i] = select(T(i, i));
  // Bubble each selected eigenvalue up with unitary 2x2 swaps.
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (!sel[i]) continue;
    for (int j = i; j > k; --j) {
      // swap positions j-1 and j
      const cplx t11 = T(j - 1, j - 1), t22 = T(j, j), t12 = T(j - 1, j);
      Eigen::Vector2cd x(t12, t22 - t11);
      const double nx = x.norm();
      if (nx == 0.0) {
        std::swap(T(j - 1, j - 1), T(j, j));
      } else {
        x /= nx;
        Eigen::Matrix2cd Z;
        Z << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
        T.middleRows(j - 1, 2) = Z.adjoint() * T.middleRows(j - 1, 2);
        T.middleCols(j - 1, 2) = T.middleCols(j - 1, 2) * Z;
        U.middleCols(j - 1, 2) = U.middleCols(j - 1, 2) * Z;
        T(j, j - 1) = 0.0;
      }
      std::swap(sel[j - 1], sel[j]);
    }
    ++k;
  }
  out.T = T;
  out.U = U;
  out.k = k;
  return out;
}

Mat real_invariant_subspace(const Mat& M, const std::function<bool(cplx)>& select) {
  OrderedSchur os = ordered_schur(M, select);
  const int n = static_cast<int>(M.rows());
  const int k = os.k;
  if (k == 0) return Mat(n, 0);
  Mat V(n, 2 * k);
  V.leftCols(k) = os.U.leftCols(k).real();
  V.rightCols(k) = os.U.leftCols(k).imag();
  Eigen::JacobiSVD<Mat> svd(V, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(k);
}

double are_residual(const Mat& A, const Mat& B, const Mat& C, const Mat& D, const Mat& X) {
  Mat L = B.transpose() * X + C;
  Mat R = A.transpose() * X + X * A - L.transpose() * D.partialPivLu().solve(L);
  return R.norm();
}

AreResult solve_are(const Mat& A, const Mat& B, const Mat& C, const Mat& D, double eps_reg) {
  check_square(A, "solve_are");
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (B.rows() != n || C.rows() != m || C.cols() != n || D.rows() != m || D.cols() != m)
    throw std::invalid_argument("solve_are: dimension mismatch");
  AreResult res;
  Mat R = D;
  Eigen::JacobiSVD<Mat> svd(R);
  const auto& sv = svd.singularValues();
  const bool singular = m > 0 && (sv(m - 1) <= 1e-12 * std::max(1.0, sv(0)));
  if (singular) {
    if (!(eps_reg > 0)) throw NumericalError("solve_are: singular R");
    R(0, 0) += eps_reg;
    res.eps_applied = eps_reg;
    Eigen::JacobiSVD<Mat> svd2(R);
    if (svd2.singularValues()(m - 1) <= 1e-14 * std::max(1.0, svd2.singularValues()(0)))
      throw NumericalError("solve_are: singular R after perturbation");
  }
  if (n == 0) {
    res.X = Mat(0, 0);
    res.closed_loop = Mat(0, 0);
    return res;
  }
  Eigen::PartialPivLU<Mat> Rlu(R);
  const Mat RiSt = Rlu.solve(C);              // R^{-1} S^T with S = C^T
  const Mat Ab = A - B * RiSt;
  const Mat G = B * Rlu.solve(B.transpose());
  const Mat Qb = -C.transpose() * RiSt;       // Q - S R^{-1} S^T, Q = 0
  Mat H(2 * n, 2 * n);
  H << Ab, -G, -Qb, -Ab.transpose();

  CVec hev = eigenvalues(H);
  const double hscale = std::max(1.0, H.norm());
  for (auto& l : hev)
    if (std::abs(l.real()) < 1e-10 * hscale) throw NumericalError("solve_are: no stabilizing solution (imaginary-axis Hamiltonian eigenvalues)");

  Mat V = real_invariant_subspace(H, [](cplx l) { return l.real() < 0; });
  if (V.cols() != n) throw NumericalError("solve_are: no stabilizing solution (stable subspace dimension)");
  Mat U1 = V.topRows(n), U2 = V.bottomRows(n);
  Eigen::FullPivLU<Mat> lu1(U1);
  if (!lu1.isInvertible()) throw NumericalError("solve_are: no stabilizing solution (U1 singular)");
  Mat X = U2 * lu1.inverse();
  X = 0.5 * (X + X.transpose());
  // Newton refinement: Ak^T dX + dX Ak = -F(X) with Ak the current closed loop.
  double resid = are_residual(A, B, C, R, X);
  for (int it = 0; it < 4 && resid > 0; ++it) {
    const Mat L = B.transpose() * X + C;
    const Mat Ak = A - B * Rlu.solve(L);
    if (!is_hurwitz(Ak)) break;
    const Mat Fx = A.transpose() * X + X * A - L.transpose() * Rlu.solve(L);
    Mat Xn = X + solve_lyapunov(Ak.transpose(), Fx);
    Xn = 0.5 * (Xn + Xn.transpose());
    const double rn = are_residual(A, B, C, R, Xn);
    if (!(rn < resid)) break;
    X = Xn;
    resid = rn;
  }
  res.X = X;
  res.closed_loop = A - B * Rlu.solve(B.transpose() * X + C);
  res.residual = resid;
  if (!is_hurwitz(res.closed_loop)) throw NumericalError("solve_are: no stabilizing solution (closed loop not Hurwitz)");
  return res;
}

StableSplit stable_antistable_split(const StateSpace& g, double tol) {
  const int n = g.nx();
  StableSplit out;
  if (n == 0) {
    out.stable = g;
    out.antistable = StateSpace::gain(Mat::Zero(g.ny(), g.nu()));
    return out;
  }
  CVec ev = eigenvalues(g.A);
  const double scale = std::max(1.0, g.A.norm());
  for (auto& l : ev)
    if (std::abs(l.real()) <= tol * scale) throw NumericalError("stable_antistable_split: pole on the imaginary axis");
  Mat Vs = real_invariant_subspace(g.A, [](cplx l) { return l.real() < 0; });
  Mat Va = real_invariant_subspace(g.A, [](cplx l) { return l.real() > 0; });
  const int ks = static_cast<int>(Vs.cols()), ka = static_cast<int>(Va.cols());
  Mat T(n, n);
  T << Vs, Va;
  Eigen::PartialPivLU<Mat> lu(T);
  Mat At = lu.solve(g.A * T);
  Mat Bt = lu.solve(g.B);
  Mat Ct = g.C * T;
  out.stable = StateSpace(At.topLeftCorner(ks, ks), Bt.topRows(ks), Ct.leftCols(ks), g.D);
  out.antistable = StateSpace(At.bottomRightCorner(ka, ka), Bt.bottomRows(ka), Ct.rightCols(ka),
                              Mat::Zero(g.ny(), g.nu()));
  return out;
}

StateSpace balanced_realization(const StateSpace& g) {
  const int n = g.nx();
  if (n == 0) return g;
  if (!is_hurwitz(g.A)) throw std::invalid_argument("balanced_realization: system must be stable");
  Mat Wc = solve_lyapunov(g.A, g.B * g.B.transpose());
  Mat Wo = solve_lyapunov(g.A.transpose(), g.C.transpose() * g.C);
  Eigen::LLT<Mat> lc(Wc), lo(Wo);
  if (lc.info() != Eigen::Success || lo.info() != Eigen::Success)
    throw NumericalError("balanced_realization: system is not minimal");
  Mat Lc = lc.matrixL(), Lo = lo.matrixL();
  Eigen::JacobiSVD<Mat> svd(Lo.transpose() * Lc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec s = svd.singularValues();
  Vec sih = s.array().rsqrt();
  Mat T = Lc * svd.matrixV() * sih.asDiagonal();
  Mat Ti = sih.asDiagonal() * svd.matrixU().transpose() * Lo.transpose();
  Mat A = Ti * g.A * T, B = Ti * g.B, C = g.C * T;
  for (int i = 0; i < n; ++i) {
    Eigen::Index j;
    B.row(i).cwiseAbs().maxCoeff(&j);
    if (B(i, j) < 0) {
      B.row(i) *= -1;
      A.row(i) *= -1;
      A.col(i) *= -1;
      C.col(i) *= -1;
    }
  }
  return StateSpace(A, B, C, g.D);
}

std::vector<double> poly_from_roots(const CVec& roots) {
  std::vector<cplx> c{1.0};
  for (int i = 0; i < roots.size(); ++i) {
    std::vector<cplx> nc(c.size() + 1, 0.0);
    for (size_t k = 0; k < c.size(); ++k) {
      nc[k] += c[k];
      nc[k + 1] -= roots(i) * c[k];
    }
    c = nc;
  }
  std::vector<double> r(c.size());
  for (size_t k = 0; k < c.size(); ++k) r[k] = c[k].real();
  return r;
}

TransferFunction siso_tf(const StateSpace& g, int i, int j) {
  if (i < 0 || i >= g.ny() || j < 0 || j >= g.nu()) throw std::invalid_argument("siso_tf: channel out of range");
  StateSpace s = minimal_realization(g.sub({i}, {j}));
  const int n = s.nx();
  TransferFunction tf;
  tf.den = poly_from_roots(eigenvalues(s.A));
  const double d = s.D(0, 0);
  std::vector<double> pbc = poly_from_roots(eigenvalues(s.A - s.B * s.C));
  tf.num.assign(n + 1, 0.0);
  // num = d * det(sI - A) + det(sI - A + BC) - det(sI - A)
  for (int k = 0; k <= n; ++k) tf.num[k] = d * tf.den[k] + pbc[k] - tf.den[k];
  return tf;
}

std::string format_tf(const TransferFunction& tf, int precision) {
  auto poly = [precision](const std::vector<double>& c) {
    std::ostringstream os;
    os << std::setprecision(precision);
    const int deg = static_cast<int>(c.size()) - 1;
    bool first = true;
    for (int k = 0; k <= deg; ++k) {
      const double v = c[k];
      const int p = deg - k;
      if (v == 0.0 && !(p == 0 && first)) continue;
      if (!first) os << (v < 0 ? " - " : " + ");
      else if (v < 0) os << "-";
      os << std::abs(v);
      if (p >= 1) os << "s";
      if (p >= 2) os << "^" << p;
      first = false;
    }
    return os.str();
  };
  if (tf.den.size() == 1) return poly(tf.num);
  return "(" + poly(tf.num) + ")/(" + poly(tf.den) + ")";
}

std::vector<double> logspace(double lo_exp, double hi_exp, int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    w[i] = std::pow(10.0, lo_exp + t * (hi_exp - lo_exp));
  }
  return w;
}

double hinf_norm(const StateSpace& g, double wmin, double wmax, int n) {
  auto sv = [&](double w) {
    Eigen::JacobiSVD<CMat> svd(g.freq(w));
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  };
  auto grid = logspace(std::log10(wmin), std::log10(wmax), n);
  double best = sv(0.0), wbest = 0.0;
  for (double w : grid) {
    const double v = sv(w);
    if (v > best) best = v, wbest = w;
  }
  // golden-section refinement around the grid peak
  if (wbest > 0) {
    const double r = std::pow(wmax / wmin, 1.0 / (n - 1));
    double a = wbest / r, b = wbest * r;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      if (sv(c) > sv(d)) b = d; else a = c;
    }
    best = std::max(best, sv(0.5 * (a + b)));
  }
  return best;
}

Mat hcat(std::initializer_list<Mat> parts) {
  Eigen::Index rows = parts.begin()->rows(), cols = 0;
  for (auto& p : parts) cols += p.cols();
  Mat r(rows, cols);
  Eigen::Index c = 0;
  for (auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("hcat: row mismatch");
    r.middleCols(c, p.cols()) = p;
    c += p.cols();
  }
  return r;
}

Mat vcat(std::initializer_list<Mat> parts) {
  Eigen::Index cols = parts.begin()->cols(), rows = 0;
  for (auto& p : parts) rows += p.rows();
  Mat r(rows, cols);
  Eigen::Index c = 0;
  for (auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("vcat: column mismatch");
    r.middleRows(c, p.rows()) = p;
    c += p.rows();
  }
  return r;
}

}  // namespace satiqc
