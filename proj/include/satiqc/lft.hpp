#pragma once

#include "satiqc/iqc.hpp"
#include "satiqc/ss_core.hpp"

#include <string>
#include <vector>

namespace satiqc {

// Blocks are ordered: repeated-scalar blocks first, then full blocks.
struct UncertaintyStructure {
  std::vector<int> scalar_blocks;  // multiplicities m_i
  std::vector<int> full_blocks;    // sizes r_j (square blocks)
  double bound = 1.0;              // common norm bound b

  int nq() const;
  int num_blocks() const { return static_cast<int>(scalar_blocks.size() + full_blocks.size()); }
  // offset and size of block k in the stacked q / p vectors
  int block_offset(int k) const;
  int block_size(int k) const;
  bool block_is_scalar(int k) const { return k < static_cast<int>(scalar_blocks.size()); }
  void validate() const;
};

struct SaturatedLFTPlant {
  Mat A, B0, B1, B2;
  Mat C0, D00, D01, D02;
  Mat C1, D10, D11, D12;
  UncertaintyStructure structure;
  Vec u_bar;
  double alpha = 1.0;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B0.cols()); }
  int nq() const { return static_cast<int>(B1.cols()); }
  int nd() const { return static_cast<int>(B2.cols()); }
  int ne() const { return static_cast<int>(C1.rows()); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // Checks that only warn: A Hurwitz, (A, [B1 B0]) stabilizable.
  std::vector<std::string> plant_warnings() const;
};

// Builds a plant from the common pieces; empty uncertainty blocks get zero-size
// matrices of the right shape.
SaturatedLFTPlant make_plant(const Mat& A, const Mat& B0, const Mat& B2, const Mat& C1, const Mat& D10,
                             const Mat& D12, double u_bar, double alpha);

Vec deadzone(const Vec& u, const Vec& u_bar);
Vec saturate(const Vec& u, const Vec& u_bar);

// State [x_p; u], inputs (p, w, d, v).
struct AugmentedPlant {
  Mat A, Bp, Bw, Bd, Bv;
  Mat Cq, Dqp, Dqw, Dqd;
  Mat Ce, Dep, Dew, Ded;
  int nx = 0, nu = 0;
  UncertaintyStructure structure;
  double alpha = 1.0;

  int n() const { return static_cast<int>(A.rows()); }
  int nq() const { return static_cast<int>(Bp.cols()); }
  int nd() const { return static_cast<int>(Bd.cols()); }
  int ne() const { return static_cast<int>(Ce.rows()); }
  // Whole block realization, inputs ordered (p, w, d, v), outputs (q, e).
  StateSpace realization() const;
};

AugmentedPlant loop_transform(const SaturatedLFTPlant& plant);

// Open interconnection of the augmented plant with stacked filters; v is free.
//   x_cl' = A0 x_cl + Bp p + Bw w + Bd d + Bv v
//   z_D1,k = Cd[k] x_cl + Ddp[k] p + Ddw[k] w + Ddd[k] d
//   z_N1,l = Cn[l] x_cl + Dnw[l] w + Dnv[l] v
//   e      = Ce x_cl + Dep p + Dew w + Ded d
struct Interconnection {
  Mat A0, Bp, Bw, Bd, Bv;
  std::vector<Mat> Cd, Ddp, Ddw, Ddd;
  std::vector<Mat> Cn, Dnw, Dnv;
  Mat Ce, Dep, Dew, Ded;
  int nx = 0, nu = 0, npsi = 0;
  std::vector<int> filter_offset, filter_states;
  std::vector<TriangularFactor> filters;
  std::vector<FactoredIQC> unc_filters;
  UncertaintyStructure structure;
  double alpha = 1.0;

  int n() const { return static_cast<int>(A0.rows()); }
  int nq() const { return static_cast<int>(Bp.cols()); }
  int nd() const { return static_cast<int>(Bd.cols()); }
  int ne() const { return static_cast<int>(Ce.rows()); }
  int num_filters() const { return static_cast<int>(filters.size()); }
  int num_unc() const { return static_cast<int>(Cd.size()); }
  // Filter-only state-space pieces (block-diagonal stacking)
  Mat AN() const;
  Mat BN1() const;
  Mat BN2() const;
};

// Closed loop with v = F x_cl + H w.
struct ClosedLoop {
  Mat A, B0, B1, B2;                                     // inputs p, w, d
  std::vector<Mat> C_d1, D_d10, D_d11, D_d12;            // per uncertainty block
  std::vector<Mat> C_n1, D_n10, D_n11, D_n12;            // per nonlinearity filter
  Mat C2, D20, D21, D22;
  Mat F, H;
  int nx = 0, nu = 0, npsi = 0;
  int n() const { return static_cast<int>(A.rows()); }
};

Interconnection attach_filters(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                               const std::vector<FactoredIQC>& unc_filters);
ClosedLoop close_loop(const Interconnection& ic, const Mat& F, const Mat& H);
ClosedLoop attach_filters(const AugmentedPlant& aug, const std::vector<TriangularFactor>& nonlin_filters,
                          const std::vector<FactoredIQC>& unc_filters, const Mat& F, const Mat& H);

// One static uncertainty IQC per block of the structure.
std::vector<FactoredIQC> uncertainty_filters(const UncertaintyStructure& s);

}  // namespace satiqc
