#include "satiqc/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace satiqc {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::popov: return "popov";
    case Strategy::zames_falb: return "zames_falb";
    case Strategy::sector: return "sector";
    case Strategy::mixed: return "mixed";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "popov" || s == "P") return Strategy::popov;
  if (s == "zames_falb" || s == "zf" || s == "ZF") return Strategy::zames_falb;
  if (s == "sector" || s == "S") return Strategy::sector;
  if (s == "mixed" || s == "M") return Strategy::mixed;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

std::vector<IqcSpec> strategy_iqcs(Strategy s, double eps) {
  switch (s) {
    case Strategy::popov: return {{IqcKind::popov, eps, {}}};
    case Strategy::zames_falb: return {{IqcKind::zames_falb, eps, {}}};
    case Strategy::sector: return {{IqcKind::sector, eps, {}}};
    case Strategy::mixed:
      return {{IqcKind::popov, eps, {}}, {IqcKind::zames_falb, eps, {}}, {IqcKind::sector, eps, {}}};
  }
  return {};
}

std::vector<TriangularFactor> make_nonlinearity_filters(const std::vector<IqcSpec>& specs, double alpha, int nu,
                                                        const FactorOptions& fopts) {
  if (specs.empty()) throw std::invalid_argument("at least one nonlinearity IQC is required");
  std::vector<TriangularFactor> out;
  for (const auto& s : specs) {
    Multiplier m;
    switch (s.kind) {
      case IqcKind::popov: m = make_popov_multiplier(alpha, s.eps); break;
      case IqcKind::zames_falb: m = make_zames_falb_multiplier(alpha, s.eps, s.h ? *s.h : default_zf_h()); break;
      // the filter sees (v, w), so the sector condition on (u, w) goes through 1/(s+alpha)
      case IqcKind::sector: m = make_sector_transformed_multiplier(alpha, s.eps); break;
      default: throw std::invalid_argument("nonlinearity IQC must be popov, zames_falb or sector");
    }
    if (nu > 1) m = replicate(m, nu);
    out.push_back(to_triangular(j_spectral_factorize(m, fopts), fopts.minreal_tol));
  }
  return out;
}

namespace {

Mat vcat_list(const std::vector<Mat>& parts, int cols) {
  int r = 0;
  for (auto& p : parts) r += static_cast<int>(p.rows());
  Mat out(r, cols);
  int o = 0;
  for (auto& p : parts) {
    out.middleRows(o, p.rows()) = p;
    o += static_cast<int>(p.rows());
  }
  return out;
}

Expr eye_times(const Var& s, int n) { return scaled(s, Mat::Identity(n, n)); }

Expr zero(int r, int c) { return Expr::zero(r, c); }

Mat blockdiag(const std::vector<Mat>& parts) {
  int r = 0, c = 0;
  for (auto& p : parts) {
    r += static_cast<int>(p.rows());
    c += static_cast<int>(p.cols());
  }
  Mat out = Mat::Zero(r, c);
  int ro = 0, co = 0;
  for (auto& p : parts) {
    out.block(ro, co, p.rows(), p.cols()) = p;
    ro += static_cast<int>(p.rows());
    co += static_cast<int>(p.cols());
  }
  return out;
}

double sym_max_eig(const Mat& M) {
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

SynthesisProblem build_synthesis_lmi(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                                     const std::vector<FactoredIQC>& unc_filters, const SynthesisOptions& opts) {
  if (nonlin_filters.empty()) throw std::invalid_argument("build_synthesis_lmi: empty nonlinearity IQC list");
  SynthesisProblem sp;
  sp.ic = attach_filters(aug, nonlin_filters, unc_filters);
  const Interconnection& ic = sp.ic;
  const int n = ic.n(), m = ic.nu, nq = ic.nq(), nd = ic.nd(), ne = ic.ne();
  const int N = ic.num_filters();
  const auto& st = ic.structure;
  LmiProblem& P = sp.lmi;
  P.strict_margin = opts.strict_margin;

  sp.Q = P.add_symmetric("Q", n);
  std::vector<Expr> gblocks;
  for (int k = 0; k < st.num_blocks(); ++k) {
    const int sz = st.block_size(k);
    if (st.block_is_scalar(k)) {
      Var v = P.add_symmetric("Gamma_hat_" + std::to_string(k), sz);
      sp.Gamma_hat.push_back(v);
      gblocks.push_back(v());
    } else {
      Var v = P.add_scalar("chi_hat_" + std::to_string(k));
      sp.Gamma_hat.push_back(v);
      gblocks.push_back(eye_times(v, sz));
    }
  }
  for (int l = 0; l < N; ++l) sp.lambda_hat_l.push_back(P.add_scalar("lambda_hat_" + std::to_string(l)));
  sp.lambda_hat = P.add_scalar("lambda_hat");
  sp.F_hat = P.add_full("F_hat", m, n);
  sp.H_hat = P.add_full("H_hat", m, m);
  sp.gamma = P.add_scalar("gamma");

  const Expr Q = sp.Q();
  const Expr Fh = sp.F_hat();
  const Expr Hh = sp.H_hat();
  const Expr Gh = nq > 0 ? blkdiag(gblocks) : Expr::zero(0, 0);
  sp.Gamma_hat_expr = Gh;
  const Var& lam = sp.lambda_hat;

  sp.AQ = ic.A0 * Q + ic.Bv * Fh;

  Expr d33 = eye_times(lam, m) * (-2.0 * N);
  for (auto& v : sp.lambda_hat_l) d33 = d33 + eye_times(v, m);

  const Mat Cd = vcat_list(ic.Cd, n), Ddp = vcat_list(ic.Ddp, nq);
  const Mat Ddw = vcat_list(ic.Ddw, m), Ddd = vcat_list(ic.Ddd, nd);
  const Mat Cn = vcat_list(ic.Cn, n), Dnw = vcat_list(ic.Dnw, m), Dnv = vcat_list(ic.Dnv, m);
  const int nz = static_cast<int>(Cd.rows()), nn = N * m;

  std::vector<Expr> lam_blocks;
  for (auto& v : sp.lambda_hat_l) lam_blocks.push_back(eye_times(v, m));

  std::vector<std::vector<Expr>> g(7);
  g[0] = {sp.AQ.he()};
  g[1] = {Gh * Mat(ic.Bp.transpose()), -Gh};
  g[2] = {scaled(lam, ic.Bw.transpose()) + Hh.T() * Mat(ic.Bv.transpose()), zero(m, nq), d33};
  g[3] = {Expr(Mat(ic.Bd.transpose())), zero(nd, nq), zero(nd, m), eye_times(sp.gamma, nd) * -1.0};
  g[4] = {Cd * Q, Ddp * Gh, scaled(lam, Ddw), Expr(Ddd), -Gh};
  g[5] = {Cn * Q + Dnv * Fh, zero(nn, nq), Dnv * Hh + scaled(lam, Dnw), zero(nn, nd), zero(nn, nz),
          -blkdiag(lam_blocks)};
  g[6] = {ic.Ce * Q, ic.Dep * Gh, scaled(lam, ic.Dew), Expr(ic.Ded), zero(ne, nz), zero(ne, nn),
          eye_times(sp.gamma, ne) * -1.0};
  P.add_neg(sym_blocks(g), "synthesis");

  P.add_pos(Q, "Q");
  if (opts.q_max > 0) P.add_pos(Expr::identity(n, opts.q_max) - Q, "Q_bound", false);
  for (size_t k = 0; k < gblocks.size(); ++k) P.add_pos(gblocks[k], "Gamma_hat_" + std::to_string(k));
  for (int l = 0; l < N; ++l) P.add_pos(sp.lambda_hat_l[l](), "lambda_hat_" + std::to_string(l));
  P.add_pos(lam(), "lambda_hat");
  P.add_pos(sp.gamma(), "gamma");
  if (opts.gamma_max) P.add_pos(Expr::identity(1, *opts.gamma_max) - sp.gamma(), "gamma_max", false);
  P.minimize(sp.gamma());

  if (opts.pole_region) add_pole_region(sp, opts.pole_region->rho, opts.pole_region->theta);
  return sp;
}

void add_pole_region(SynthesisProblem& prob, double rho, double theta) {
  if (!(rho > 0)) throw std::invalid_argument("pole region: rho must be positive");
  if (!(theta > 0 && theta <= std::numbers::pi / 2))
    throw std::invalid_argument("pole region: theta must lie in (0, pi/2]");
  if (!prob.Q.valid()) throw std::invalid_argument("pole region: problem has no Q variable");
  const Expr& AQ = prob.AQ;
  const Expr Q = prob.Q();
  prob.lmi.add_neg(AQ.he() + Q * (2.0 * rho), "pole_shift");
  if (theta == std::numbers::pi / 2) return;  // half-plane only
  const double s = std::sin(theta), c = std::cos(theta);
  const Expr sym = AQ.he() * s;
  const Expr skew = (AQ - AQ.T()) * c;
  prob.lmi.add_neg(sym_blocks({{sym}, {skew.T(), sym}}), "pole_sector");
}

SynthesisResult solve_synthesis(const SynthesisProblem& prob, const SdpOptions& sopts) {
  SynthesisResult r;
  const LmiSolution sol = solve_lmi(prob.lmi, sopts);
  r.diag.status = sol.status;
  r.diag.message = sol.raw.message;
  r.diag.iterations = sol.raw.iterations;
  r.diag.primal_infeas = sol.raw.primal_infeas;
  r.diag.dual_infeas = sol.raw.dual_infeas;
  r.diag.rel_gap = sol.raw.rel_gap;
  if (sol.values.empty()) return r;
  const auto& v = sol.values;
  r.Q = v[prob.Q.id];
  r.gamma = v[prob.gamma.id](0, 0);
  r.lambda_hat = v[prob.lambda_hat.id](0, 0);
  for (auto& l : prob.lambda_hat_l) {
    const double lh = v[l.id](0, 0);
    r.lambda_hat_l.push_back(lh);
    r.lambdas.push_back(1.0 / lh);
    r.diag.relaxation_gap.push_back(lh / (r.lambda_hat * r.lambda_hat) - 2.0 / r.lambda_hat + 1.0 / lh);
  }
  r.Gamma_hat = prob.ic.nq() > 0 ? prob.Gamma_hat_expr.eval(v) : Mat(0, 0);
  r.Gamma = r.Gamma_hat.size() ? Mat(r.Gamma_hat.inverse()) : Mat(0, 0);
  Eigen::LLT<Mat> llt(r.Q);
  r.F = v[prob.F_hat.id] * (llt.info() == Eigen::Success ? Mat(llt.solve(Mat::Identity(r.Q.rows(), r.Q.cols())))
                                                          : Mat(r.Q.inverse()));
  r.H = v[prob.H_hat.id] / r.lambda_hat;
  const auto margins = prob.lmi.margins(v);
  for (size_t i = 0; i < margins.size(); ++i) r.diag.margins.push_back({prob.lmi.constraints()[i].name, margins[i]});
  r.poles = eigenvalues(close_loop(prob.ic, r.F, r.H).A);
  return r;
}

SynthesisRun synthesize(const SaturatedLFTPlant& plant, const std::vector<IqcSpec>& iqcs, const SynthesisOptions& opts,
                        const SdpOptions& sopts, const FactorOptions& fopts) {
  plant.validate();
  SynthesisRun run;
  run.aug = loop_transform(plant);
  const auto filters = make_nonlinearity_filters(iqcs, plant.alpha, plant.nu(), fopts);
  run.problem = build_synthesis_lmi(run.aug, filters, uncertainty_filters(plant.structure), opts);
  run.result = solve_synthesis(run.problem, sopts);
  return run;
}

// ---------------------------------------------------------------- analysis

namespace {

struct ClPieces {
  Mat B;                     // [B0 B1 B2]
  std::vector<Mat> Theta;    // per uncertainty block
  std::vector<Mat> Xi;       // per nonlinearity filter
  Mat Ce;                    // [C2 D20 D21 D22]
  int n, nq, nu, nd, ne;
};

ClPieces pieces(const ClosedLoop& cl, const UncertaintyStructure& st) {
  ClPieces p;
  p.n = cl.n();
  p.nq = static_cast<int>(cl.B0.cols());
  p.nu = static_cast<int>(cl.B1.cols());
  p.nd = static_cast<int>(cl.B2.cols());
  p.ne = static_cast<int>(cl.C2.rows());
  if (st.nq() != p.nq) throw std::invalid_argument("analysis: uncertainty structure does not match B_cl0");
  if (static_cast<int>(cl.C_d1.size()) != st.num_blocks())
    throw std::invalid_argument("analysis: one uncertainty output per block is required");
  p.B = hcat({cl.B0, cl.B1, cl.B2});
  for (size_t k = 0; k < cl.C_d1.size(); ++k) p.Theta.push_back(hcat({cl.C_d1[k], cl.D_d10[k], cl.D_d11[k], cl.D_d12[k]}));
  for (size_t l = 0; l < cl.C_n1.size(); ++l) p.Xi.push_back(hcat({cl.C_n1[l], cl.D_n10[l], cl.D_n11[l], cl.D_n12[l]}));
  p.Ce = hcat({cl.C2, cl.D20, cl.D21, cl.D22});
  return p;
}

Mat block_of(const Mat& Gamma, const UncertaintyStructure& st, int k) {
  const int o = st.block_offset(k), s = st.block_size(k);
  return Gamma.block(o, o, s, s);
}

}  // namespace

AnalysisProblem build_analysis_lmi(const ClosedLoop& cl, const UncertaintyStructure& structure, int n_iqc,
                                   double strict_margin) {
  const ClPieces p = pieces(cl, structure);
  if (n_iqc != static_cast<int>(p.Xi.size()))
    throw std::invalid_argument("build_analysis_lmi: n_iqc does not match the closed loop");
  AnalysisProblem ap;
  LmiProblem& L = ap.lmi;
  L.strict_margin = strict_margin;
  const int n = p.n, nq = p.nq, m = p.nu, nd = p.nd, ne = p.ne;
  const int nxi = n + nq + m + nd;
  ap.P = L.add_symmetric("P", n);
  std::vector<Expr> gam;
  Expr quad = Expr::zero(nxi, nxi);
  for (int k = 0; k < structure.num_blocks(); ++k) {
    const int sz = structure.block_size(k);
    const Mat& Th = p.Theta[k];
    if (structure.block_is_scalar(k)) {
      Var v = L.add_symmetric("X_" + std::to_string(k), sz);
      ap.scalings.push_back(v);
      ap.block_sizes.push_back(sz);
      gam.push_back(v());
      quad = quad + Mat(Th.transpose()) * v() * Th;
    } else {
      Var v = L.add_scalar("chi_" + std::to_string(k));
      ap.scalings.push_back(v);
      ap.block_sizes.push_back(sz);
      gam.push_back(eye_times(v, sz));
      quad = quad + scaled(v, Th.transpose() * Th);
    }
  }
  Expr lsum = Expr::zero(m, m);
  for (int l = 0; l < n_iqc; ++l) {
    Var v = L.add_scalar("lambda_" + std::to_string(l));
    ap.lambdas.push_back(v);
    lsum = lsum + eye_times(v, m);
    quad = quad + scaled(v, p.Xi[l].transpose() * p.Xi[l]);
  }
  ap.gamma = L.add_scalar("gamma");

  const Expr Pv = ap.P();
  const Expr PB = Pv * p.B;
  const Expr G = nq > 0 ? blkdiag(gam) : Expr::zero(0, 0);
  // selectors for the p, w, d rows of B^T P
  const Mat I = Mat::Identity(p.B.cols(), p.B.cols());
  const Expr BtP = PB.T();
  std::vector<std::vector<Expr>> g(4);
  g[0] = {(Pv * cl.A).he()};
  g[1] = {Mat(I.topRows(nq)) * BtP, -G};
  g[2] = {Mat(I.middleRows(nq, m)) * BtP, zero(m, nq), -lsum};
  g[3] = {Mat(I.bottomRows(nd)) * BtP, zero(nd, nq), zero(nd, m), eye_times(ap.gamma, nd) * -1.0};
  const Expr top = sym_blocks(g) + quad;
  const Expr main = sym_blocks({{top}, {Expr(p.Ce), eye_times(ap.gamma, ne) * -1.0}});
  L.add_neg(main, "analysis");
  L.add_pos(Pv, "P");
  for (size_t k = 0; k < gam.size(); ++k) L.add_pos(gam[k], "scaling_" + std::to_string(k));
  for (size_t l = 0; l < ap.lambdas.size(); ++l) L.add_pos(ap.lambdas[l](), "lambda_" + std::to_string(l));
  L.add_pos(ap.gamma(), "gamma");
  L.minimize(ap.gamma());
  return ap;
}

AnalysisResult solve_analysis(const AnalysisProblem& prob, const SdpOptions& sopts) {
  AnalysisResult r;
  const LmiSolution sol = solve_lmi(prob.lmi, sopts);
  r.status = sol.status;
  r.message = sol.raw.message;
  if (sol.values.empty()) return r;
  const auto& v = sol.values;
  r.P = v[prob.P.id];
  r.gamma = v[prob.gamma.id](0, 0);
  std::vector<Mat> blocks;
  for (size_t k = 0; k < prob.scalings.size(); ++k) {
    const Mat& x = v[prob.scalings[k].id];
    const int sz = prob.block_sizes[k];
    blocks.push_back(x.rows() == sz ? x : Mat(x(0, 0) * Mat::Identity(sz, sz)));
  }
  for (auto& l : prob.lambdas) r.lambdas.push_back(v[l.id](0, 0));
  r.Gamma = blockdiag(blocks);
  return r;
}

Mat analysis_matrix(const ClosedLoop& cl, const UncertaintyStructure& st, const Mat& P, const Mat& Gamma,
                    const std::vector<double>& lambdas, double gamma) {
  const ClPieces p = pieces(cl, st);
  const int n = p.n, nq = p.nq, m = p.nu, nd = p.nd, ne = p.ne;
  const int nxi = n + nq + m + nd;
  if (lambdas.size() != p.Xi.size()) throw std::invalid_argument("analysis_matrix: lambda count mismatch");
  Mat T = Mat::Zero(nxi, nxi);
  T.topLeftCorner(n, n) = P * cl.A + cl.A.transpose() * P;
  const Mat PB = P * p.B;
  T.block(0, n, n, nq + m + nd) = PB;
  T.block(n, 0, nq + m + nd, n) = PB.transpose();
  T.block(n, n, nq, nq) = -Gamma;
  double ls = 0;
  for (double l : lambdas) ls += l;
  T.block(n + nq, n + nq, m, m) = -ls * Mat::Identity(m, m);
  T.block(n + nq + m, n + nq + m, nd, nd) = -gamma * Mat::Identity(nd, nd);
  for (int k = 0; k < st.num_blocks(); ++k) {
    const Mat Gk = block_of(Gamma, st, k);
    T += p.Theta[k].transpose() * Gk * p.Theta[k];
  }
  for (size_t l = 0; l < lambdas.size(); ++l) T += lambdas[l] * p.Xi[l].transpose() * p.Xi[l];
  Mat M = Mat::Zero(nxi + ne, nxi + ne);
  M.topLeftCorner(nxi, nxi) = T;
  M.block(nxi, 0, ne, nxi) = p.Ce;
  M.block(0, nxi, nxi, ne) = p.Ce.transpose();
  M.bottomRightCorner(ne, ne) = -gamma * Mat::Identity(ne, ne);
  return M;
}

Mat analysis_matrix_schur(const ClosedLoop& cl, const UncertaintyStructure& st, const Mat& P, const Mat& Gamma,
                          const std::vector<double>& lambdas, double gamma) {
  const ClPieces p = pieces(cl, st);
  const int n = p.n, nq = p.nq, m = p.nu, nd = p.nd, ne = p.ne;
  const int nxi = n + nq + m + nd;
  const int N = static_cast<int>(lambdas.size());
  if (N != static_cast<int>(p.Xi.size())) throw std::invalid_argument("analysis_matrix_schur: lambda count mismatch");
  Mat Th(0, nxi), Xi(0, nxi);
  if (!p.Theta.empty()) Th = vcat_list(p.Theta, nxi);
  Xi = vcat_list(p.Xi, nxi);
  const int nz = static_cast<int>(Th.rows()), nn = static_cast<int>(Xi.rows());
  const int tot = nxi + nz + nn + ne;
  Mat M = Mat::Zero(tot, tot);
  M.topLeftCorner(n, n) = P * cl.A + cl.A.transpose() * P;
  const Mat PB = P * p.B;
  M.block(0, n, n, nq + m + nd) = PB;
  M.block(n, 0, nq + m + nd, n) = PB.transpose();
  M.block(n, n, nq, nq) = -Gamma;
  double ls = 0;
  for (double l : lambdas) ls += l;
  M.block(n + nq, n + nq, m, m) = -ls * Mat::Identity(m, m);
  M.block(n + nq + m, n + nq + m, nd, nd) = -gamma * Mat::Identity(nd, nd);
  std::vector<Mat> lam_inv;
  for (int l = 0; l < N; ++l) lam_inv.push_back(Mat::Identity(m, m) / lambdas[l]);
  const Mat Lambda = blockdiag(lam_inv);
  int o = nxi;
  if (nz > 0) {
    M.block(o, 0, nz, nxi) = Th;
    M.block(0, o, nxi, nz) = Th.transpose();
    M.block(o, o, nz, nz) = -Mat(Gamma.inverse());
    o += nz;
  }
  M.block(o, 0, nn, nxi) = Xi;
  M.block(0, o, nxi, nn) = Xi.transpose();
  M.block(o, o, nn, nn) = -Lambda;
  o += nn;
  M.block(o, 0, ne, nxi) = p.Ce;
  M.block(0, o, nxi, ne) = p.Ce.transpose();
  M.block(o, o, ne, ne) = -gamma * Mat::Identity(ne, ne);
  return M;
}

double round_trip_margin(const SynthesisProblem& prob, const SynthesisResult& res) {
  const ClosedLoop cl = close_loop(prob.ic, res.F, res.H);
  const Mat P = res.Q.inverse();
  const Mat M = analysis_matrix(cl, prob.ic.structure, 0.5 * (P + P.transpose()), res.Gamma, res.lambdas, res.gamma);
  return sym_max_eig(M) / std::max(1.0, M.norm());
}

// ---------------------------------------------------------------- anti-windup

AntiWindupProblem build_antiwindup_lmi(const SaturatedLFTPlant& plant, const SynthesisOptions& opts) {
  plant.validate();
  AntiWindupProblem ap;
  LmiProblem& L = ap.lmi;
  L.strict_margin = opts.strict_margin;
  const int n = plant.nx(), m = plant.nu(), nd = plant.nd(), ne = plant.ne();
  ap.Q = L.add_symmetric("Q", n);
  std::vector<Expr> gd;
  std::vector<Var> gv;
  for (int i = 0; i < m; ++i) {
    gv.push_back(L.add_scalar("Gamma_" + std::to_string(i)));
    gd.push_back(gv.back()());
  }
  ap.F_hat = L.add_full("F_hat", m, n);
  ap.H_hat = L.add_full("H_hat", m, m);
  ap.gamma = L.add_scalar("gamma");
  ap.Gamma = gv.front();

  const Expr Q = ap.Q(), Fh = ap.F_hat(), Hh = ap.H_hat();
  const Expr G = blkdiag(gd);
  const Mat B0t = plant.B0.transpose();
  std::vector<std::vector<Expr>> g(4);
  g[0] = {(plant.A * Q + plant.B0 * Fh).he()};
  g[1] = {(Hh - G).T() * B0t + Fh, Hh.he() - G * 2.0};
  g[2] = {Expr(Mat(plant.B2.transpose())), zero(nd, m), eye_times(ap.gamma, nd) * -1.0};
  g[3] = {plant.C1 * Q + plant.D10 * Fh, plant.D10 * (Hh - G), Expr(plant.D12), eye_times(ap.gamma, ne) * -1.0};
  L.add_neg(sym_blocks(g), "antiwindup");
  L.add_pos(Q, "Q");
  if (opts.q_max > 0) L.add_pos(Expr::identity(n, opts.q_max) - Q, "Q_bound", false);
  for (int i = 0; i < m; ++i) L.add_pos(gd[i], "Gamma_" + std::to_string(i));
  L.add_pos(ap.gamma(), "gamma");
  L.minimize(ap.gamma());
  return ap;
}

AntiWindupResult solve_antiwindup(const AntiWindupProblem& prob, const SdpOptions& sopts) {
  AntiWindupResult r;
  const LmiSolution sol = solve_lmi(prob.lmi, sopts);
  r.status = sol.status;
  r.message = sol.raw.message;
  if (sol.values.empty()) return r;
  const auto& v = sol.values;
  r.Q = v[prob.Q.id];
  r.gamma = v[prob.gamma.id](0, 0);
  const int m = static_cast<int>(v[prob.H_hat.id].rows());
  r.Gamma = Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) r.Gamma(i, i) = v[prob.Gamma.id + i](0, 0);
  r.F = v[prob.F_hat.id] * r.Q.inverse();
  r.H = v[prob.H_hat.id] * r.Gamma.inverse();
  return r;
}

}  // namespace satiqc
