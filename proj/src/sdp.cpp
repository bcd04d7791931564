#include "satiqc/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace satiqc {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iterations: return "max_iterations";
    case SdpStatus::numerical_error: return "numerical_error";
  }
  return "unknown";
}

namespace {

double inner(const Mat& A, const Mat& B) { return A.cwiseProduct(B).sum(); }

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

// largest a with X + a dX >= 0 (infinity if none)
double max_step(const Mat& X, const Mat& dX) {
  Eigen::LLT<Mat> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat L = llt.matrixL();
  Mat M = L.triangularView<Eigen::Lower>().solve(dX);
  M = L.triangularView<Eigen::Lower>().solve(M.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(M), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

void schur_block(const SdpBlock& b, const Mat& Zinv, const Mat& X, Mat& O, bool parallel) {
  const int nv = static_cast<int>(b.F.size());
  auto column = [&](int jj) {
    const Mat T = Zinv * b.F[jj].second * X;
    const int j = b.F[jj].first;
    for (int ii = 0; ii < nv; ++ii) O(b.F[ii].first, j) += b.F[ii].second.cwiseProduct(T.transpose()).sum();
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int jj = 0; jj < nv; ++jj) column(jj);
  } else {
    for (int jj = 0; jj < nv; ++jj) column(jj);
  }
}

}  // namespace

Mat schur_complement_serial(const std::vector<SdpBlock>& blocks, const std::vector<Mat>& Zinv,
                            const std::vector<Mat>& X, int m) {
  Mat O = Mat::Zero(m, m);
  for (size_t k = 0; k < blocks.size(); ++k) schur_block(blocks[k], Zinv[k], X[k], O, false);
  return O;
}

Mat schur_complement_omp(const std::vector<SdpBlock>& blocks, const std::vector<Mat>& Zinv,
                         const std::vector<Mat>& X, int m) {
  Mat O = Mat::Zero(m, m);
  for (size_t k = 0; k < blocks.size(); ++k) schur_block(blocks[k], Zinv[k], X[k], O, true);
  return O;
}

// Works on  max b^T y  s.t.  Z = C - sum y_i A_i >= 0  with A_i = -F_i, C = F0,
// b = -c; its dual is  min <C, X>  s.t.  <A_i, X> = b_i, X >= 0.
SdpSolution InteriorPointSolver::solve(const SdpProblem& pin, const SdpOptions& o) const {
  const int m = pin.m;
  if (pin.c.size() != m) throw std::invalid_argument("sdp: objective length mismatch");
  SdpSolution sol;

  // bounds as 1x1 blocks
  std::vector<SdpBlock> blocks;
  auto add_bound = [&](int j, double val, double sgn) {
    SdpBlock b;
    b.F0 = Mat::Constant(1, 1, -sgn * val);
    b.F.emplace_back(j, Mat::Constant(1, 1, sgn));
    blocks.push_back(b);
  };
  for (auto& b : pin.blocks) {
    if (b.F0.rows() != b.F0.cols()) throw std::invalid_argument("sdp: non-square block");
    for (auto& [j, F] : b.F)
      if (j < 0 || j >= m || F.rows() != b.F0.rows() || F.cols() != b.F0.cols())
        throw std::invalid_argument("sdp: malformed block coefficient");
    if (b.dim() == 0) continue;
    if (b.F.empty()) {
      Eigen::SelfAdjointEigenSolver<Mat> es(sym(b.F0), Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < 0) {
        sol.status = SdpStatus::infeasible;
        sol.message = "constant block is not PSD";
        return sol;
      }
      continue;
    }
    blocks.push_back(b);
  }
  for (int j = 0; j < pin.lb.size(); ++j)
    if (std::isfinite(pin.lb(j))) add_bound(j, pin.lb(j), 1.0);
  for (int j = 0; j < pin.ub.size(); ++j)
    if (std::isfinite(pin.ub(j))) add_bound(j, pin.ub(j), -1.0);
  const int K = static_cast<int>(blocks.size());

  // block scaling then column scaling
  std::vector<double> bscale(K, 1.0);
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (auto& [j, F] : blocks[k].F) s = std::max(s, F.norm());
    if (s > 0) {
      bscale[k] = 1.0 / s;
      blocks[k].F0 *= bscale[k];
      for (auto& [j, F] : blocks[k].F) F *= bscale[k];
    }
  }
  Vec dscale = Vec::Ones(m);
  {
    Vec cn = Vec::Zero(m);
    for (auto& b : blocks)
      for (auto& [j, F] : b.F) cn(j) = std::max(cn(j), F.norm());
    for (int j = 0; j < m; ++j) {
      if (cn(j) == 0.0) {
        if (pin.c(j) != 0.0) {
          sol.status = SdpStatus::unbounded;
          sol.message = "variable " + std::to_string(j) + " appears only in the objective";
          return sol;
        }
        continue;
      }
      dscale(j) = 1.0 / cn(j);
    }
    for (auto& b : blocks)
      for (auto& [j, F] : b.F) F *= dscale(j);
  }
  Vec c = pin.c.cwiseProduct(dscale);
  const double cscale = std::max(1e-12, c.lpNorm<Eigen::Infinity>());
  c /= cscale;

  // A_i = -F_i kept implicitly: A(X)_i = -sum_k <F_i^k, X^k>
  const Vec b = -c;
  std::vector<Mat> X(K), Z(K), Zinv(K);
  int N = 0;
  double normC = 0.0;
  for (int k = 0; k < K; ++k) {
    const int n = blocks[k].dim();
    N += n;
    normC += blocks[k].F0.squaredNorm();
    double maxA = 0.0, ratio = 0.0;
    for (auto& [j, F] : blocks[k].F) {
      maxA = std::max(maxA, F.norm());
      ratio = std::max(ratio, (1.0 + std::abs(b(j))) / (1.0 + F.norm()));
    }
    const double xi = std::max({10.0, std::sqrt(double(n)), n * ratio});
    const double eta = std::max({10.0, std::sqrt(double(n)), maxA, blocks[k].F0.norm()});
    X[k] = xi * Mat::Identity(n, n);
    Z[k] = eta * Mat::Identity(n, n);
  }
  normC = std::sqrt(normC);
  const double normb = b.norm();
  Vec y = Vec::Zero(m);

  auto opA = [&](const std::vector<Mat>& M) {  // A(M)
    Vec r = Vec::Zero(m);
    for (int k = 0; k < K; ++k)
      for (auto& [j, F] : blocks[k].F) r(j) -= inner(F, M[k]);
    return r;
  };
  auto opAt = [&](const Vec& v, int k) {  // sum_i v_i A_i^k
    Mat r = Mat::Zero(blocks[k].dim(), blocks[k].dim());
    for (auto& [j, F] : blocks[k].F) r -= v(j) * F;
    return r;
  };

  double pobj = 0, dobj = 0, pinf = 0, dinf = 0, gap = 0;
  int stall = 0;
  // best iterate with a feasible slack, used when the run ends early
  Vec best_y;
  double best_gap = 1.0, best_pinf = 0.0, best_dinf = 0.0;
  sol.status = SdpStatus::max_iterations;
  int it = 0;
  for (; it < o.max_iter; ++it) {
    std::vector<Mat> Rd(K);
    double rdn = 0.0, xz = 0.0;
    pobj = 0.0;
    for (int k = 0; k < K; ++k) {
      Rd[k] = blocks[k].F0 - opAt(y, k) - Z[k];
      rdn += Rd[k].squaredNorm();
      xz += inner(X[k], Z[k]);
      pobj += inner(blocks[k].F0, X[k]);
    }
    const Vec AX = opA(X);
    const Vec rp = b - AX;
    dobj = b.dot(y);
    const double mu = xz / N;
    pinf = rp.norm() / (1.0 + normb);
    dinf = std::sqrt(rdn) / (1.0 + normC);
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (o.verbose)
      std::fprintf(stderr, "it %3d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e mu %.2e\n", it, pobj, dobj,
                   pinf, dinf, gap, mu);
    if (pinf < o.feas_tol && dinf < o.feas_tol && gap < o.gap_tol) {
      sol.status = SdpStatus::optimal;
      break;
    }
    if (dinf < o.feas_tol && gap < best_gap) {
      best_y = y;
      best_gap = gap;
      best_pinf = pinf;
      best_dinf = dinf;
    }
    // our problem infeasible: X with A(X) ~ 0 and <C, X> < 0
    if (pobj < 0 && AX.norm() / (-pobj) < 1e-8 && dinf > o.feas_tol) {
      sol.status = SdpStatus::infeasible;
      for (int k = 0; k < K; ++k) sol.certificate.push_back(X[k] * (bscale[k] / -pobj));
      break;
    }
    if (dobj > 1e12 * (1.0 + std::abs(pobj)) && dinf < o.feas_tol) {
      sol.status = SdpStatus::unbounded;
      break;
    }

    bool ok = true;
    for (int k = 0; k < K; ++k) {
      Eigen::LLT<Mat> llt(Z[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[k] = llt.solve(Mat::Identity(Z[k].rows(), Z[k].cols()));
    }
    if (!ok) {
      sol.status = SdpStatus::numerical_error;
      sol.message = "slack lost definiteness";
      break;
    }
    Mat O = o.parallel ? schur_complement_omp(blocks, Zinv, X, m) : schur_complement_serial(blocks, Zinv, X, m);
    O = sym(O);
    Eigen::LLT<Mat> Ollt(O);
    if (Ollt.info() != Eigen::Success) {
      O.diagonal().array() += 1e-13 * std::max(1.0, O.diagonal().maxCoeff());
      Ollt.compute(O);
      if (Ollt.info() != Eigen::Success) {
        sol.status = SdpStatus::numerical_error;
        sol.message = "Schur complement not positive definite";
        break;
      }
    }

    struct Dir {
      std::vector<Mat> dX, dZ;
      Vec dy;
    };
    auto direction = [&](double smu, const std::vector<Mat>* corr) {
      std::vector<Mat> T(K);
      for (int k = 0; k < K; ++k) {
        T[k] = smu * Zinv[k] - X[k] - Zinv[k] * Rd[k] * X[k];
        if (corr) T[k] -= (*corr)[k];
      }
      Vec rhs = rp - opA(T);
      Dir d;
      d.dy = Ollt.solve(rhs);
      for (int r = 0; r < 2; ++r) d.dy += Ollt.solve(Vec(rhs - O * d.dy));
      d.dX.resize(K);
      d.dZ.resize(K);
      for (int k = 0; k < K; ++k) {
        d.dZ[k] = Rd[k] - opAt(d.dy, k);
        d.dX[k] = sym(T[k] + Zinv[k] * opAt(d.dy, k) * X[k]);
      }
      return d;
    };
    auto steps = [&](const Dir& d, double tau) {
      double ap = 1.0, ad = 1.0;
      for (int k = 0; k < K; ++k) {
        ap = std::min(ap, tau * max_step(X[k], d.dX[k]));
        ad = std::min(ad, tau * max_step(Z[k], d.dZ[k]));
      }
      return std::pair<double, double>(ap, ad);
    };

    Dir pred = direction(0.0, nullptr);
    auto [ap0, ad0] = steps(pred, 1.0);
    double xz_aff = 0.0;
    for (int k = 0; k < K; ++k) xz_aff += inner(X[k] + ap0 * pred.dX[k], Z[k] + ad0 * pred.dZ[k]);
    double sigma = std::pow(std::max(0.0, xz_aff / xz), 3);
    sigma = std::clamp(sigma, 0.0, 1.0);
    std::vector<Mat> corr(K);
    for (int k = 0; k < K; ++k) corr[k] = Zinv[k] * pred.dZ[k] * pred.dX[k];
    Dir d = direction(sigma * mu, &corr);
    const double tau = 0.9 + 0.09 * std::min(1.0, std::min(ap0, ad0));
    auto [ap, ad] = steps(d, tau);
    if (!(ap > 0) || !(ad > 0) || !std::isfinite(ap) || !std::isfinite(ad)) {
      sol.status = SdpStatus::numerical_error;
      sol.message = "zero step length";
      break;
    }
    for (int k = 0; k < K; ++k) {
      X[k] = sym(X[k] + ap * d.dX[k]);
      Z[k] = sym(Z[k] + ad * d.dZ[k]);
    }
    y += ad * d.dy;
    stall = (ap < 1e-8 && ad < 1e-8) ? stall + 1 : 0;
    if (stall > 5) {
      sol.status = SdpStatus::numerical_error;
      sol.message = "stalled";
      break;
    }
  }
  sol.iterations = it;
  if (sol.status != SdpStatus::optimal && sol.status != SdpStatus::infeasible && best_y.size() == m &&
      best_gap < 1e-2) {
    y = best_y;
    gap = best_gap;
    pinf = best_pinf;
    dinf = best_dinf;
    sol.status = SdpStatus::optimal;
    sol.message = (sol.message.empty() ? std::string("iteration limit") : sol.message) +
                  " (reduced accuracy, best feasible iterate)";
  }
  sol.rel_gap = gap;
  sol.primal_infeas = dinf;  // infeasibility of G(y) >= 0
  sol.dual_infeas = pinf;
  sol.y = y.cwiseProduct(dscale);
  sol.objective = pin.c.dot(sol.y);
  // report the smallest eigenvalue of the unscaled blocks at the returned y
  double me = std::numeric_limits<double>::infinity();
  auto check = [&](const SdpBlock& blk) {
    if (blk.dim() == 0) return;
    Mat G = blk.F0;
    for (auto& [j, F] : blk.F) G += sol.y(j) * F;
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(G), Eigen::EigenvaluesOnly);
    me = std::min(me, es.eigenvalues()(0));
  };
  for (auto& blk : pin.blocks) check(blk);
  sol.min_eig = me;
  // an iteration cap with tight residuals is still usable
  if (sol.status == SdpStatus::max_iterations || sol.status == SdpStatus::numerical_error) {
    if (pinf < 1e3 * o.feas_tol && dinf < 1e3 * o.feas_tol && gap < 1e3 * o.gap_tol) {
      if (sol.message.empty()) sol.message = "reduced accuracy";
      else sol.message += " (reduced accuracy)";
      sol.status = SdpStatus::optimal;
    }
  }
  return sol;
}

}  // namespace satiqc
