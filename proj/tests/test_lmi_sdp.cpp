#include "fixtures.hpp"

#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <random>

using namespace satiqc;
using fixtures::mat;

TEST_SUITE("lmi_sdp") {
  TEST_CASE("lowering round trip") {
    LmiProblem P;
    const Var X = P.add_symmetric("X", 3);
    const Var Y = P.add_full("Y", 2, 3);
    const Var s = P.add_scalar("s");
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    auto rnd = [&](int r, int c) {
      Mat M(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
      return M;
    };
    const Mat A = rnd(3, 3), B = rnd(3, 2), C = rnd(2, 3), S0 = rnd(2, 2);
    const Mat S = S0 + S0.transpose();
    const Expr e = sym_blocks({{(A * X()).he() + (B * Y()).he()}, {Y() * 2.0 + Expr(C), scaled(s, S)}});
    std::vector<Mat> vals{rnd(3, 3), rnd(2, 3), rnd(1, 1)};
    vals[0] = (vals[0] + vals[0].transpose()).eval();
    const Vec y = P.pack(vals);
    const auto back = P.unpack(y);
    for (size_t i = 0; i < vals.size(); ++i) CHECK(fixtures::max_abs_diff(back[i], vals[i]) < 1e-15);
    const Mat direct = e.eval(vals);
    CHECK(fixtures::max_abs_diff(direct, P.eval_lowered(e, y)) < 1e-12);
    CHECK(fixtures::max_abs_diff(direct, direct.transpose()) < 1e-12);
  }

  TEST_CASE("minimum-trace Lyapunov SDP") {
    // min tr P  s.t.  A^T P + P A + I <= 0  has the Lyapunov solution as optimum.
    const Mat A = mat({{-1, 1}, {0, -2}});
    LmiProblem L;
    const Var P = L.add_symmetric("P", 2);
    L.add_neg((A.transpose() * P()).he() + Expr::identity(2), "lyap", false);
    const Mat e0 = mat({{1, 0}}), e1 = mat({{0, 1}});
    L.minimize(e0 * P() * e0.transpose() + e1 * P() * e1.transpose());
    const LmiSolution s = solve_lmi(L);
    REQUIRE(s.status == SdpStatus::optimal);
    // Kronecker oracle: (I kron A^T + A^T kron I) vec P = -vec I
    const Mat K = Eigen::kroneckerProduct(Mat::Identity(2, 2), A.transpose()).eval() +
                  Eigen::kroneckerProduct(A.transpose(), Mat::Identity(2, 2)).eval();
    const Vec vp = K.fullPivLu().solve(-Vec((Vec(4) << 1, 0, 0, 1).finished()));
    const Mat Pref = Eigen::Map<const Mat>(vp.data(), 2, 2);
    CHECK(fixtures::max_abs_diff(s.values[0], Pref) < 1e-6);
  }

  TEST_CASE("infeasible SDP is reported") {
    LmiProblem L;
    const Var x = L.add_scalar("x");
    L.add_pos(x(), "x_pos");
    L.add_neg(x() + Expr::identity(1), "x_below_minus_one");
    L.minimize(x());
    CHECK(solve_lmi(L).status == SdpStatus::infeasible);
  }

  TEST_CASE("serial and OpenMP Schur complements agree") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const int m = 12;
    std::vector<SdpBlock> blocks;
    std::vector<Mat> Zi, X;
    for (int b = 0; b < 3; ++b) {
      const int n = 3 + 2 * b;
      SdpBlock blk;
      blk.F0 = Mat::Zero(n, n);
      for (int j = 0; j < m; ++j) {
        if ((j + b) % 3 == 0) continue;
        Mat F(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) F(r, c) = nd(rng);
        blk.F.push_back({j, (F + F.transpose()).eval()});
      }
      Mat R(n, n), S(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          R(r, c) = nd(rng);
          S(r, c) = nd(rng);
        }
      Zi.push_back(R * R.transpose() + Mat::Identity(n, n));
      X.push_back(S * S.transpose() + Mat::Identity(n, n));
      blocks.push_back(blk);
    }
    const Mat a = schur_complement_serial(blocks, Zi, X, m);
    const Mat b = schur_complement_omp(blocks, Zi, X, m);
    CHECK((a - b).norm() <= 1e-12 * (1 + a.norm()));
  }
}
