#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace satiqc;
using fixtures::mat;

namespace {

// Stabilizing root of the scalar ARE 2aX - (XB + C^T) D^{-1} (B^T X + C) = 0.
double scalar_are(double a, const Mat& B, const Mat& C, const Mat& D) {
  const Mat Di = D.inverse();
  const double q2 = -(B * Di * B.transpose())(0, 0);
  const double q1 = 2 * a - 2 * (B * Di * C)(0, 0);
  const double q0 = -(C.transpose() * Di * C)(0, 0);
  const double disc = std::sqrt(q1 * q1 - 4 * q2 * q0);
  for (double X : {(-q1 + disc) / (2 * q2), (-q1 - disc) / (2 * q2)}) {
    const double acl = a - (B * Di * (B.transpose() * X + C))(0, 0);
    if (acl < 0) return X;
  }
  return std::nan("");
}

}  // namespace

TEST_SUITE("ss_core") {
  TEST_CASE("ARE on the Popov stable part matches the scalar quadratic root") {
    const Mat A = mat({{-1}}), B = mat({{-1, 0}}), C = mat({{-0.005}, {1}}), D = mat({{0, 1}, {1, -0.01}});
    const AreResult r = solve_are(A, B, C, D);
    CHECK(r.X(0, 0) == doctest::Approx(scalar_are(-1, B, C, D)).epsilon(1e-10));
    CHECK(r.X(0, 0) == doctest::Approx(0.9950).epsilon(1e-3));
    CHECK(r.residual < 1e-10);
    CHECK(is_hurwitz(r.closed_loop));
  }

  TEST_CASE("ARE with C_s = [-0.32; 1] gives 7.68") {
    const Mat A = mat({{-1}}), B = mat({{-1, 0}}), C = mat({{-0.32}, {1}}), D = mat({{0, 1}, {1, -0.01}});
    const AreResult r = solve_are(A, B, C, D);
    CHECK(r.X(0, 0) == doctest::Approx(scalar_are(-1, B, C, D)).epsilon(1e-10));
    CHECK(r.X(0, 0) == doctest::Approx(7.68).epsilon(1e-3));
  }

  TEST_CASE("ARE scalar zero solution") {
    // C = 0 makes X = 0 stabilizing when A is Hurwitz.
    const Mat A = mat({{-3}}), B = mat({{1}}), C = mat({{0}}), D = mat({{1}});
    const AreResult r = solve_are(A, B, C, D);
    CHECK(std::abs(r.X(0, 0)) < 1e-12);
  }

  TEST_CASE("ARE with singular D throws unless regularized") {
    const Mat A = mat({{-1}}), B = mat({{1, 0}}), C = mat({{0}, {1}}), D = mat({{0, 0}, {0, -1}});
    CHECK_THROWS(solve_are(A, B, C, D));
  }

  TEST_CASE("ARE residual on random stabilizable instances") {
    // LQR in the indefinite form: B = [Bu 0], C = [0; L], D = diag(I, -1) gives
    // A^T X + X A - X Bu Bu^T X + L^T L = 0, with A possibly unstable.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + trial % 3;
      Mat A(n, n), B = Mat::Zero(n, 3), C = Mat::Zero(3, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
        B(i, 0) = nd(rng);
        B(i, 1) = nd(rng);
        C(2, i) = nd(rng);
      }
      Mat D = Mat::Identity(3, 3);
      D(2, 2) = -1;
      const AreResult r = solve_are(A, B, C, D);
      CHECK(are_residual(A, B, C, D, r.X) < 1e-8);
      CHECK(is_hurwitz(r.closed_loop));
      // LQR value function is positive semidefinite
      CHECK(Eigen::SelfAdjointEigenSolver<Mat>(r.X).eigenvalues().minCoeff() > -1e-9);
    }
  }

  TEST_CASE("minimal realization of the Popov product") {
    const Mat A = mat({{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
    const Mat B = mat({{0, 0}, {1, 0}, {0, 1}});
    const Mat C = mat({{-0.01, 0, 1}, {1, -1, 0}});
    const Mat D = mat({{0, 1}, {1, -1}});
    const StateSpace g(A, B, C, D);
    const StateSpace m = minimal_realization(g);
    REQUIRE(m.nx() == 2);
    CHECK(fixtures::max_abs_diff(m.A, mat({{1, 0.01}, {0, -1}})) < 1e-12);
    CHECK(fixtures::max_abs_diff(m.B, mat({{0, 1}, {-1, 0}})) < 1e-12);
    CHECK(fixtures::max_abs_diff(m.C, mat({{1, 0}, {0, 1}})) < 1e-12);
    for (double w : {0.1, 1.0, 7.0}) CHECK((g.freq(w) - m.freq(w)).norm() < 1e-12);
  }

  TEST_CASE("series connection") {
    const StateSpace g1(mat({{-1}}), mat({{1}}), mat({{1}}), mat({{0}}));  // 1/(s+1)
    const StateSpace g2(mat({{-2}}), mat({{1}}), mat({{-2}}), mat({{1}}));  // s/(s+2)
    const StateSpace s = series(g1, g2);
    for (double w : {0.0, 0.3, 2.0, 50.0}) {
      const cplx jw(0, w);
      const cplx expect = jw / ((jw + 1.0) * (jw + 2.0));
      CHECK(std::abs(s.freq(w)(0, 0) - expect) < 1e-12);
    }
    const TransferFunction tf = siso_tf(g2, 0, 0);
    REQUIRE(tf.num.size() == 2);
    CHECK(tf.num[0] == doctest::Approx(1.0));
    CHECK(std::abs(tf.num[1]) < 1e-12);
    CHECK(tf.den[1] == doctest::Approx(2.0));
  }

  TEST_CASE("para-conjugate and inverse") {
    const StateSpace g(mat({{-1}}), mat({{1}}), mat({{2}}), mat({{3}}));
    const StateSpace gi = inverse(g);
    const StateSpace gc = para_conjugate(g);
    for (double w : {0.2, 5.0}) {
      CHECK(std::abs(g.freq(w)(0, 0) * gi.freq(w)(0, 0) - 1.0) < 1e-12);
      CHECK(std::abs(gc.freq(w)(0, 0) - std::conj(g.freq(w)(0, 0))) < 1e-12);
    }
  }

  TEST_CASE("Lyapunov solution satisfies the equation") {
    const Mat A = mat({{-1, 2}, {0, -3}});
    const Mat Q = mat({{2, 1}, {1, 4}});
    const Mat X = solve_lyapunov(A, Q);
    CHECK((A * X + X * A.transpose() + Q).norm() < 1e-12);
  }
}
