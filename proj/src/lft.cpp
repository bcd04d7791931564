#include "satiqc/lft.hpp"

#include <Eigen/QR>

#include <cmath>

namespace satiqc {

namespace {

void expect_shape(const Mat& M, Eigen::Index r, Eigen::Index c, const char* name) {
  if (M.rows() != r || M.cols() != c)
    throw std::invalid_argument(std::string("plant field ") + name + ": expected " + std::to_string(r) + "x" +
                                std::to_string(c) + ", got " + std::to_string(M.rows()) + "x" +
                                std::to_string(M.cols()));
}

}  // namespace

int UncertaintyStructure::nq() const {
  int n = 0;
  for (int m : scalar_blocks) n += m;
  for (int r : full_blocks) n += r;
  return n;
}

int UncertaintyStructure::block_offset(int k) const {
  int off = 0;
  for (int i = 0; i < k; ++i) off += block_size(i);
  return off;
}

int UncertaintyStructure::block_size(int k) const {
  const int ns = static_cast<int>(scalar_blocks.size());
  return k < ns ? scalar_blocks[k] : full_blocks[k - ns];
}

void UncertaintyStructure::validate() const {
  if (!(bound > 0)) throw std::invalid_argument("uncertainty.bound must be positive");
  for (int m : scalar_blocks)
    if (m < 1) throw std::invalid_argument("uncertainty.scalar_blocks entries must be >= 1");
  for (int r : full_blocks)
    if (r < 1) throw std::invalid_argument("uncertainty.full_blocks entries must be >= 1");
}

void SaturatedLFTPlant::validate() const {
  const int n = nx(), m = nu(), q = nq(), d = nd(), e = ne();
  expect_shape(A, n, n, "A");
  expect_shape(B0, n, m, "B0");
  expect_shape(B1, n, q, "B1");
  expect_shape(B2, n, d, "B2");
  expect_shape(C0, q, n, "C0");
  expect_shape(D00, q, m, "D00");
  expect_shape(D01, q, q, "D01");
  expect_shape(D02, q, d, "D02");
  expect_shape(C1, e, n, "C1");
  expect_shape(D10, e, m, "D10");
  expect_shape(D11, e, q, "D11");
  expect_shape(D12, e, d, "D12");
  structure.validate();
  if (structure.nq() != q)
    throw std::invalid_argument("uncertainty: block sizes sum to " + std::to_string(structure.nq()) +
                                " but B1 has " + std::to_string(q) + " columns");
  if (u_bar.size() != m) throw std::invalid_argument("u_bar: expected " + std::to_string(m) + " entries");
  for (int i = 0; i < m; ++i)
    if (!(u_bar(i) > 0)) throw std::invalid_argument("u_bar: entries must be positive");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (n == 0 || m == 0) throw std::invalid_argument("plant must have states and a control input");
  // well-posedness of the uncertainty loop for every |Delta| <= b
  if (q > 0) {
    Eigen::JacobiSVD<Mat> svd(D01);
    if (structure.bound * svd.singularValues()(0) >= 1.0)
      throw std::invalid_argument("D01: uncertainty loop not well posed (b*||D01|| >= 1)");
  }
}

std::vector<std::string> SaturatedLFTPlant::plant_warnings() const {
  std::vector<std::string> w;
  if (!is_hurwitz(A)) w.push_back("A is not Hurwitz");
  // PBH test on unstable modes
  Mat B = hcat({B1, B0});
  CVec ev = eigenvalues(A);
  for (auto& l : ev) {
    if (l.real() < 0) continue;
    CMat M(nx(), nx() + B.cols());
    M << l * CMat::Identity(nx(), nx()) - A.cast<cplx>(), B.cast<cplx>();
    Eigen::ColPivHouseholderQR<CMat> qr(M);
    if (qr.rank() < nx()) {
      w.push_back("(A, [B1 B0]) is not stabilizable");
      break;
    }
  }
  return w;
}

SaturatedLFTPlant make_plant(const Mat& A, const Mat& B0, const Mat& B2, const Mat& C1, const Mat& D10,
                             const Mat& D12, double u_bar, double alpha) {
  SaturatedLFTPlant p;
  const Eigen::Index n = A.rows(), e = C1.rows(), m = B0.cols(), d = B2.cols();
  p.A = A;
  p.B0 = B0;
  p.B1 = Mat(n, 0);
  p.B2 = B2;
  p.C0 = Mat(0, n);
  p.D00 = Mat(0, m);
  p.D01 = Mat(0, 0);
  p.D02 = Mat(0, d);
  p.C1 = C1;
  p.D10 = D10;
  p.D11 = Mat(e, 0);
  p.D12 = D12;
  p.u_bar = Vec::Constant(m, u_bar);
  p.alpha = alpha;
  return p;
}

Vec deadzone(const Vec& u, const Vec& u_bar) {
  if (u.size() != u_bar.size()) throw std::invalid_argument("deadzone: dimension mismatch");
  Vec w(u.size());
  for (int i = 0; i < u.size(); ++i) {
    if (!(u_bar(i) > 0)) throw std::invalid_argument("deadzone: u_bar must be positive");
    const double a = std::abs(u(i));
    w(i) = a <= u_bar(i) ? 0.0 : u(i) - std::copysign(u_bar(i), u(i));
  }
  return w;
}

Vec saturate(const Vec& u, const Vec& u_bar) { return u - deadzone(u, u_bar); }

StateSpace AugmentedPlant::realization() const {
  Mat B = hcat({Bp, Bw, Bd, Bv});
  Mat C = vcat({Cq, Ce});
  Mat Z = Mat::Zero(nq() + ne(), nu);
  Mat D = vcat({hcat({Dqp, Dqw, Dqd}), hcat({Dep, Dew, Ded})});
  return StateSpace(A, B, C, hcat({D, Z}));
}

AugmentedPlant loop_transform(const SaturatedLFTPlant& plant) {
  plant.validate();
  const int n = plant.nx(), m = plant.nu();
  AugmentedPlant a;
  a.nx = n;
  a.nu = m;
  a.structure = plant.structure;
  a.alpha = plant.alpha;
  a.A = Mat::Zero(n + m, n + m);
  a.A.topLeftCorner(n, n) = plant.A;
  a.A.topRightCorner(n, m) = plant.B0;
  a.A.bottomRightCorner(m, m) = -plant.alpha * Mat::Identity(m, m);
  a.Bp = vcat({plant.B1, Mat::Zero(m, plant.nq())});
  a.Bw = vcat({-plant.B0, Mat::Zero(m, m)});
  a.Bd = vcat({plant.B2, Mat::Zero(m, plant.nd())});
  a.Bv = vcat({Mat::Zero(n, m), Mat::Identity(m, m)});
  a.Cq = hcat({plant.C0, plant.D00});
  a.Dqp = plant.D01;
  a.Dqw = -plant.D00;
  a.Dqd = plant.D02;
  a.Ce = hcat({plant.C1, plant.D10});
  a.Dep = plant.D11;
  a.Dew = -plant.D10;
  a.Ded = plant.D12;
  return a;
}

Mat Interconnection::AN() const { return A0.bottomRightCorner(npsi, npsi); }
Mat Interconnection::BN1() const { return Bv.bottomRows(npsi); }
Mat Interconnection::BN2() const { return Bw.bottomRows(npsi); }

std::vector<FactoredIQC> uncertainty_filters(const UncertaintyStructure& s) {
  std::vector<FactoredIQC> out;
  for (int k = 0; k < s.num_blocks(); ++k)
    out.push_back(make_uncertainty_iqc({s.block_is_scalar(k), s.block_size(k)}, s.bound));
  return out;
}

Interconnection attach_filters(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                               const std::vector<FactoredIQC>& unc_filters) {
  if (nonlin_filters.empty()) throw std::invalid_argument("attach_filters: at least one nonlinearity IQC is required");
  const int na = aug.n(), m = aug.nu, q = aug.nq();
  if (static_cast<int>(unc_filters.size()) != aug.structure.num_blocks())
    throw std::invalid_argument("attach_filters: one uncertainty filter per block is required");
  Interconnection ic;
  ic.nx = aug.nx;
  ic.nu = m;
  ic.structure = aug.structure;
  ic.alpha = aug.alpha;
  ic.filters = nonlin_filters;
  ic.unc_filters = unc_filters;
  int npsi = 0;
  for (auto& f : nonlin_filters) {
    if (f.m1 != m || f.m2 != m) throw std::invalid_argument("attach_filters: filter channel width must equal n_u");
    ic.filter_offset.push_back(npsi);
    ic.filter_states.push_back(f.psi_bar.nx());
    npsi += f.psi_bar.nx();
  }
  ic.npsi = npsi;
  const int n = na + npsi;

  ic.A0 = Mat::Zero(n, n);
  ic.A0.topLeftCorner(na, na) = aug.A;
  ic.Bv = Mat::Zero(n, m);
  ic.Bv.topRows(na) = aug.Bv;
  ic.Bw = Mat::Zero(n, m);
  ic.Bw.topRows(na) = aug.Bw;
  for (size_t l = 0; l < nonlin_filters.size(); ++l) {
    const auto& f = nonlin_filters[l];
    const int o = na + ic.filter_offset[l], k = ic.filter_states[l];
    ic.A0.block(o, o, k, k) = f.AN();
    ic.Bv.middleRows(o, k) = f.BN1();
    ic.Bw.middleRows(o, k) = f.BN2();
    Mat Cn = Mat::Zero(m, n);
    Cn.middleCols(o, k) = f.CN();
    ic.Cn.push_back(Cn);
    ic.Dnv.push_back(f.DN1());
    ic.Dnw.push_back(f.DN2());
  }
  ic.Bp = vcat({aug.Bp, Mat::Zero(npsi, q)});
  ic.Bd = vcat({aug.Bd, Mat::Zero(npsi, aug.nd())});

  const Mat Cq = hcat({aug.Cq, Mat::Zero(q, npsi)});
  for (int k = 0; k < aug.structure.num_blocks(); ++k) {
    const auto& uf = unc_filters[k];
    const int off = aug.structure.block_offset(k), sz = aug.structure.block_size(k);
    if (uf.m1 != sz || uf.m2 != sz) throw std::invalid_argument("attach_filters: uncertainty filter size mismatch");
    const Mat D1 = uf.psi.D.topLeftCorner(sz, sz), D2 = uf.psi.D.topRightCorner(sz, sz);
    Mat E = Mat::Zero(sz, q);
    E.middleCols(off, sz).setIdentity();
    ic.Cd.push_back(D1 * E * Cq);
    ic.Ddp.push_back(D1 * E * aug.Dqp + D2 * E);
    ic.Ddw.push_back(D1 * E * aug.Dqw);
    ic.Ddd.push_back(D1 * E * aug.Dqd);
  }
  ic.Ce = hcat({aug.Ce, Mat::Zero(aug.ne(), npsi)});
  ic.Dep = aug.Dep;
  ic.Dew = aug.Dew;
  ic.Ded = aug.Ded;
  return ic;
}

ClosedLoop close_loop(const Interconnection& ic, const Mat& F, const Mat& H) {
  const int n = ic.n(), m = ic.nu;
  if (F.rows() != m || F.cols() != n) throw std::invalid_argument("close_loop: F_c must be n_u x n_cl");
  if (H.rows() != m || H.cols() != m) throw std::invalid_argument("close_loop: H_c must be n_u x n_u");
  ClosedLoop cl;
  cl.nx = ic.nx;
  cl.nu = m;
  cl.npsi = ic.npsi;
  cl.F = F;
  cl.H = H;
  cl.A = ic.A0 + ic.Bv * F;
  cl.B0 = ic.Bp;
  cl.B1 = ic.Bw + ic.Bv * H;
  cl.B2 = ic.Bd;
  for (int k = 0; k < ic.num_unc(); ++k) {
    cl.C_d1.push_back(ic.Cd[k]);
    cl.D_d10.push_back(ic.Ddp[k]);
    cl.D_d11.push_back(ic.Ddw[k]);
    cl.D_d12.push_back(ic.Ddd[k]);
  }
  for (int l = 0; l < ic.num_filters(); ++l) {
    cl.C_n1.push_back(ic.Cn[l] + ic.Dnv[l] * F);
    cl.D_n10.push_back(Mat::Zero(m, ic.nq()));
    cl.D_n11.push_back(ic.Dnw[l] + ic.Dnv[l] * H);
    cl.D_n12.push_back(Mat::Zero(m, ic.nd()));
  }
  cl.C2 = ic.Ce;
  cl.D20 = ic.Dep;
  cl.D21 = ic.Dew;
  cl.D22 = ic.Ded;
  return cl;
}

ClosedLoop attach_filters(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                          const std::vector<FactoredIQC>& unc_filters, const Mat& F, const Mat& H) {
  return close_loop(attach_filters(aug, nonlin_filters, unc_filters), F, H);
}

}  // namespace satiqc
