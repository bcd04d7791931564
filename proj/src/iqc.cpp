#include "satiqc/iqc.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>

namespace satiqc {

namespace {

// Pi = Phi~ M Phi
StateSpace quadratic_form(const StateSpace& phi, const Mat& M) {
  return series(left_multiply(M, phi), para_conjugate(phi));
}

// Basis [u; w] with u = v/(s+a): A = -a, B = [1 0], C = [1; 0], D = [0 0; 0 1]
StateSpace transformed_basis(double alpha) {
  Mat A(1, 1), B(1, 2), C(2, 1), D(2, 2);
  A << -alpha;
  B << 1, 0;
  C << 1, 0;
  D << 0, 0, 0, 1;
  return StateSpace(A, B, C, D);
}

Mat blkdiag(const Mat& a, const Mat& b) {
  Mat r = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  r.topLeftCorner(a.rows(), a.cols()) = a;
  r.bottomRightCorner(b.rows(), b.cols()) = b;
  return r;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace

std::string to_string(IqcKind k) {
  switch (k) {
    case IqcKind::popov: return "popov";
    case IqcKind::zames_falb: return "zames_falb";
    case IqcKind::sector: return "sector";
    case IqcKind::uncertainty_scalar: return "uncertainty_scalar";
    case IqcKind::uncertainty_full: return "uncertainty_full";
  }
  return "unknown";
}

IqcKind iqc_kind_from_string(const std::string& s) {
  if (s == "popov") return IqcKind::popov;
  if (s == "zames_falb" || s == "zf") return IqcKind::zames_falb;
  if (s == "sector") return IqcKind::sector;
  if (s == "uncertainty_scalar") return IqcKind::uncertainty_scalar;
  if (s == "uncertainty_full") return IqcKind::uncertainty_full;
  throw std::invalid_argument("unknown IQC kind: " + s);
}

Multiplier make_sector_multiplier(double eps) {
  if (!(eps > 0)) throw std::invalid_argument("sector multiplier: eps must be positive");
  Mat P(2, 2);
  P << eps, 1, 1, -2 - eps;
  Multiplier m;
  m.pi = StateSpace::gain(P);
  m.m1 = m.m2 = 1;
  m.kind = IqcKind::sector;
  return m;
}

Multiplier make_sector_transformed_multiplier(double alpha, double eps) {
  if (!(alpha > 0)) throw std::invalid_argument("sector multiplier: alpha must be positive");
  if (!(eps > 0)) throw std::invalid_argument("sector multiplier: eps must be positive");
  Mat P(2, 2);
  P << eps, 1, 1, -2 - eps;
  Multiplier m;
  m.pi = quadratic_form(transformed_basis(alpha), P);
  m.m1 = m.m2 = 1;
  m.kind = IqcKind::sector;
  m.transformed = true;
  m.alpha = alpha;
  return m;
}

Multiplier make_popov_multiplier(double alpha, double eps) {
  if (!(alpha > 0)) throw std::invalid_argument("popov multiplier: alpha must be positive");
  if (!(eps > 0)) throw std::invalid_argument("popov multiplier: eps must be positive");
  // basis [u; s u; w], s u = v - a u
  Mat A(1, 1), B(1, 2), C(3, 1), D(3, 2);
  A << -alpha;
  B << 1, 0;
  C << 1, -alpha, 0;
  D << 0, 0, 1, 0, 0, 1;
  Mat M(3, 3);
  M << eps, 0, 0, 0, 0, 1, 0, 1, -eps;
  Multiplier m;
  m.pi = quadratic_form(StateSpace(A, B, C, D), M);
  m.m1 = m.m2 = 1;
  m.kind = IqcKind::popov;
  m.transformed = true;
  m.alpha = alpha;
  return m;
}

StateSpace default_zf_h() {
  Mat A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -2;
  B << 1;
  C << 1;
  D << 0;
  return StateSpace(A, B, C, D);
}

double l1_norm(const StateSpace& h, double tol) {
  if (h.nu() != 1 || h.ny() != 1) throw std::invalid_argument("l1_norm: h must be SISO");
  if (!is_hurwitz(h.A)) throw std::invalid_argument("l1_norm: h must be stable");
  double direct = std::abs(h.D(0, 0));  // impulse at t = 0
  if (h.nx() == 0) return direct;
  if (h.nx() == 1) return direct + std::abs(h.C(0, 0) * h.B(0, 0)) / (-h.A(0, 0));
  const double decay = -spectral_abscissa(h.A);
  const double tend = 60.0 / decay;
  auto f = [&](double t) { return std::abs((h.C * (h.A * t).exp() * h.B)(0, 0)); };
  // split into panels so that sign changes are resolved
  const int panels = 64;
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = tend * i / panels, b = tend * (i + 1) / panels;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    total += adaptive_simpson(f, a, b, fa, fm, fb, whole, tol / panels, 30);
  }
  return direct + total;
}

Multiplier make_zames_falb_multiplier(double alpha, double eps, const StateSpace& h) {
  if (!(alpha > 0)) throw std::invalid_argument("zames_falb multiplier: alpha must be positive");
  if (!(eps > 0)) throw std::invalid_argument("zames_falb multiplier: eps must be positive");
  if (h.nu() != 1 || h.ny() != 1) throw std::invalid_argument("zames_falb multiplier: H must be SISO");
  if (!is_hurwitz(h.A)) throw std::invalid_argument("zames_falb multiplier: H unstable");
  if (l1_norm(h) > 1.0 + 1e-12) throw std::invalid_argument("zames_falb multiplier: L1 bound violated");
  // basis [u; w; H w]
  const int nh = h.nx();
  Mat A = Mat::Zero(1 + nh, 1 + nh), B = Mat::Zero(1 + nh, 2), C = Mat::Zero(3, 1 + nh), D = Mat::Zero(3, 2);
  A(0, 0) = -alpha;
  A.bottomRightCorner(nh, nh) = h.A;
  B(0, 0) = 1;
  B.bottomRightCorner(nh, 1) = h.B;
  C(0, 0) = 1;
  C.bottomRightCorner(1, nh) = h.C;
  D(1, 1) = 1;
  D(2, 1) = h.D(0, 0);
  Mat M(3, 3);
  M << eps, 1, 1, 1, -2 - eps, -1, 1, -1, 0;
  Multiplier m;
  m.pi = quadratic_form(StateSpace(A, B, C, D), M);
  m.m1 = m.m2 = 1;
  m.kind = IqcKind::zames_falb;
  m.transformed = true;
  m.alpha = alpha;
  return m;
}

Multiplier make_zames_falb_multiplier(double alpha, double eps) {
  return make_zames_falb_multiplier(alpha, eps, default_zf_h());
}

Multiplier replicate(const Multiplier& m, int nu) {
  if (nu < 1) throw std::invalid_argument("replicate: nu must be >= 1");
  if (m.m1 != 1 || m.m2 != 1) throw std::invalid_argument("replicate: expects a SISO-pair multiplier");
  if (nu == 1) return m;
  StateSpace g = m.pi;
  for (int i = 1; i < nu; ++i) g = append(g, m.pi);
  // old index of v_i is 2i, of w_i is 2i+1
  Mat P = Mat::Zero(2 * nu, 2 * nu);
  for (int i = 0; i < nu; ++i) {
    P(2 * i, i) = 1;
    P(2 * i + 1, nu + i) = 1;
  }
  Multiplier r = m;
  r.pi = left_multiply(P.transpose(), right_multiply(g, P));
  r.m1 = r.m2 = nu;
  return r;
}

std::vector<double> check_grid() {
  auto g = logspace(-3, 3, 40);
  g.push_back(1e6);
  return g;
}

SignCheck check_multiplier_signs(const Multiplier& m, const std::vector<double>& grid) {
  SignCheck sc;
  sc.min_pi11 = std::numeric_limits<double>::infinity();
  sc.max_pi22 = -std::numeric_limits<double>::infinity();
  double scale = 1.0;
  auto visit = [&](const CMat& P) {
    sc.hermitian_defect = std::max(sc.hermitian_defect, (P - P.adjoint()).norm());
    CMat H = 0.5 * (P + P.adjoint());
    scale = std::max(scale, H.norm());
    Eigen::SelfAdjointEigenSolver<CMat> e11(H.topLeftCorner(m.m1, m.m1), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<CMat> e22(H.bottomRightCorner(m.m2, m.m2), Eigen::EigenvaluesOnly);
    if (m.m1) sc.min_pi11 = std::min(sc.min_pi11, e11.eigenvalues()(0));
    if (m.m2) sc.max_pi22 = std::max(sc.max_pi22, e22.eigenvalues()(m.m2 - 1));
  };
  for (double w : grid) visit(m.eval(w));
  visit(m.pi.D.cast<cplx>());  // infinity
  sc.ok = sc.hermitian_defect <= 1e-9 * scale && (m.m1 == 0 || sc.min_pi11 >= -1e-12 * scale) &&
          (m.m2 == 0 || sc.max_pi22 < 0);
  return sc;
}

Mat congruence_factor(const Mat& R, int m1, int m2, bool isotropic_when_possible) {
  if (R.rows() != m1 + m2 || R.cols() != m1 + m2) throw std::invalid_argument("congruence_factor: dimension mismatch");
  const Mat Rs = 0.5 * (R + R.transpose());
  const Mat R11 = Rs.topLeftCorner(m1, m1), R12 = Rs.topRightCorner(m1, m2), R22 = Rs.bottomRightCorner(m2, m2);
  const double scale = std::max(1.0, Rs.norm());
  if (isotropic_when_possible && m1 == m2 && m1 > 0 && R11.norm() <= 1e-12 * scale) {
    Eigen::FullPivLU<Mat> lu(R12);
    if (lu.isInvertible()) {
      Mat a = lu.inverse().transpose() * (R22 + R12.transpose() * R12) * 0.5;
      Mat M(m1 + m2, m1 + m2);
      M << Mat::Identity(m1, m1), a, Mat::Identity(m1, m1), a - R12;
      return M;
    }
  }
  Mat M = Mat::Zero(m1 + m2, m1 + m2);
  if (m2 == 0) {
    Eigen::LLT<Mat> l(R11);
    if (l.info() != Eigen::Success) throw NumericalError("congruence_factor: R11 not positive definite");
    return l.matrixU();
  }
  Eigen::LLT<Mat> ln(-R22);
  if (ln.info() != Eigen::Success) throw NumericalError("congruence_factor: R22 not negative definite");
  const Mat cn = ln.matrixU();
  if (m1 == 0) return cn;
  const Mat R22iR21 = -ln.solve(Mat(R12.transpose()));  // R22^{-1} R21
  Mat S = R11 - R12 * R22iR21;
  S = 0.5 * (S + S.transpose());
  Eigen::LLT<Mat> ls(S);
  if (ls.info() != Eigen::Success) throw NumericalError("congruence_factor: signature of R does not match (m1, m2)");
  M.topLeftCorner(m1, m1) = ls.matrixU();
  M.bottomLeftCorner(m2, m1) = cn * R22iR21;
  M.bottomRightCorner(m2, m2) = cn;
  return M;
}

FactoredIQC make_uncertainty_iqc(const UncertaintyBlock& block, double b) {
  if (!(b > 0)) throw std::invalid_argument("uncertainty IQC: b must be positive");
  if (block.size < 1) throw std::invalid_argument("uncertainty IQC: block size must be >= 1");
  const int k = block.size;
  FactoredIQC f;
  f.psi = StateSpace::gain(blkdiag(b * Mat::Identity(k, k), Mat::Identity(k, k)));
  f.w = {k, k};
  f.m1 = f.m2 = k;
  f.kind = block.repeated_scalar ? IqcKind::uncertainty_scalar : IqcKind::uncertainty_full;
  f.bound = b;
  f.block_size = k;
  f.M = f.psi.D;
  f.R = f.w.matrix();
  return f;
}

FactoredIQC j_spectral_factorize(const Multiplier& pi, const FactorOptions& opts) {
  SignCheck sc = check_multiplier_signs(pi);
  if (!sc.ok) throw NumericalError("multiplier fails the sign conditions for J-factorization");
  const int m1 = pi.m1, m2 = pi.m2;
  FactoredIQC f;
  f.m1 = m1;
  f.m2 = m2;
  f.w = {m1, m2};
  f.kind = pi.kind;
  const Mat W = f.w.matrix();

  StateSpace g = minimal_realization(pi.pi, opts.minreal_tol);
  Mat R = 0.5 * (g.D + g.D.transpose());
  if (g.nx() == 0) {
    f.R = R;
    f.M = congruence_factor(R, m1, m2, opts.isotropic_when_possible);
    f.psi = StateSpace::gain(f.M);
    f.stable_part = StateSpace::gain(R);
    return f;
  }
  StableSplit split = stable_antistable_split(g);
  const int ns = split.stable.nx();
  StateSpace sp(split.stable.A, split.stable.B, split.stable.C, Mat::Zero(g.ny(), g.nu()));
  if (ns > 0) sp = balanced_realization(minimal_realization(sp, opts.minreal_tol));
  AreResult are = solve_are(sp.A, sp.B, sp.C, R, opts.eps_reg);
  if (are.eps_applied > 0) R(0, 0) += are.eps_applied;
  f.eps_applied = are.eps_applied;
  f.X = are.X;
  f.R = R;
  f.M = congruence_factor(R, m1, m2, opts.isotropic_when_possible);
  f.stable_part = StateSpace(sp.A, sp.B, sp.C, R);
  const Mat L = sp.B.transpose() * are.X + sp.C;
  const Mat Cpsi = W * f.M.transpose().fullPivLu().solve(L);
  f.psi = StateSpace(sp.A, sp.B, Cpsi, f.M);
  if (!is_hurwitz(f.psi.A, 1e-8)) throw NumericalError("j_spectral_factorize: factor is not stable");
  if (!is_hurwitz(inverse(f.psi).A, 1e-8)) throw NumericalError("j_spectral_factorize: factor inverse is not stable");
  return f;
}

double identity_residual(const FactoredIQC& f, const Multiplier& pi, const std::vector<double>& grid) {
  const CMat W = f.w.matrix().cast<cplx>();
  double r = 0.0;
  for (double w : grid) {
    CMat P = f.psi.freq(w);
    r = std::max(r, (P.adjoint() * W * P - pi.eval(w)).norm());
  }
  return r;
}

TriangularFactor to_triangular(const FactoredIQC& f, double minreal_tol) {
  const int m1 = f.m1, m2 = f.m2;
  const StateSpace& p = f.psi;
  const Mat D22 = p.D.bottomRightCorner(m2, m2);
  Eigen::FullPivLU<Mat> lu(D22);
  if (!lu.isInvertible()) throw NumericalError("to_triangular: Psi22 feedthrough is singular");
  const Mat D22i = lu.inverse();
  const Mat B1 = p.B.leftCols(m1), B2 = p.B.rightCols(m2);
  const Mat C1 = p.C.topRows(m1), C2 = p.C.bottomRows(m2);
  const Mat D11 = p.D.topLeftCorner(m1, m1), D12 = p.D.topRightCorner(m1, m2), D21 = p.D.bottomLeftCorner(m2, m1);

  const Mat AN = p.A - B2 * D22i * C2;
  Mat BN(p.nx(), m1 + m2);
  BN << B1 - B2 * D22i * D21, B2 * D22i;
  const Mat CN = C1 - D12 * D22i * C2;
  Mat DN(m1, m1 + m2);
  DN << D11 - D12 * D22i * D21, D12 * D22i;
  StateSpace top = minimal_realization(StateSpace(AN, BN, CN, DN), minreal_tol);
  if (!is_hurwitz(top.A)) throw NumericalError("to_triangular: Psi-bar is not stable");

  const int n = top.nx();
  Mat C = Mat::Zero(m1 + m2, n);
  C.topRows(m1) = top.C;
  Mat D = Mat::Zero(m1 + m2, m1 + m2);
  D.topRows(m1) = top.D;
  D.bottomRightCorner(m2, m2).setIdentity();
  TriangularFactor t;
  t.psi_bar = StateSpace(top.A, top.B, C, D);
  t.m1 = m1;
  t.m2 = m2;
  t.kind = f.kind;
  return t;
}

HardIqcReport hard_iqc_integral(const FactoredIQC& f, const Mat& v, const Mat& w, double dt, double horizon,
                                double tol) {
  if (v.rows() != w.rows() || v.cols() != f.m1 || w.cols() != f.m2)
    throw std::invalid_argument("hard_iqc_integral: probe dimension mismatch");
  const StateSpace& p = f.psi;
  const Mat W = f.w.matrix();
  const int N = std::min<int>(static_cast<int>(v.rows()), static_cast<int>(std::floor(horizon / dt + 1e-9)) + 1);
  Vec x = Vec::Zero(p.nx());
  auto input = [&](int k) {
    Vec in(f.m1 + f.m2);
    in << v.row(k).transpose(), w.row(k).transpose();
    return in;
  };
  auto q = [&](const Vec& xk, const Vec& in) {
    Vec z = p.C * xk + p.D * in;
    return z.dot(W * z);
  };
  HardIqcReport rep;
  double integral = 0.0, prev = q(x, input(0));
  rep.min_integral = 0.0;
  for (int k = 0; k + 1 < N; ++k) {
    const Vec u0 = input(k), u1 = input(k + 1), um = 0.5 * (u0 + u1);
    if (p.nx() > 0) {
      const Vec k1 = p.A * x + p.B * u0;
      const Vec k2 = p.A * (x + 0.5 * dt * k1) + p.B * um;
      const Vec k3 = p.A * (x + 0.5 * dt * k2) + p.B * um;
      const Vec k4 = p.A * (x + dt * k3) + p.B * u1;
      x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    const double cur = q(x, u1);
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
    rep.min_integral = std::min(rep.min_integral, integral);
  }
  rep.final_integral = integral;
  rep.ok = rep.min_integral >= -tol;
  return rep;
}

bool check_hard_iqc(const FactoredIQC& f, const Mat& v, const Mat& w, double dt, double horizon) {
  return hard_iqc_integral(f, v, w, dt, horizon).ok;
}

}  // namespace satiqc
