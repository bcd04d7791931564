#include "fixtures.hpp"

#include <doctest.h>

using namespace satiqc;
using fixtures::mat;
using fixtures::max_abs_diff;

TEST_SUITE("lft") {
  TEST_CASE("dead-zone and saturation") {
    const Vec ub = Vec::Constant(1, 0.0003);
    CHECK(deadzone(Vec::Constant(1, 2.0), ub)(0) == doctest::Approx(1.9997).epsilon(1e-12));
    CHECK(deadzone(Vec::Constant(1, -2.0), ub)(0) == doctest::Approx(-1.9997).epsilon(1e-12));
    CHECK(deadzone(Vec::Constant(1, 0.0001), ub)(0) == 0.0);
    CHECK(saturate(Vec::Constant(1, 2.0), ub)(0) == doctest::Approx(0.0003));
    const Vec u = (Vec(3) << -4, 0.5, 9).finished();
    const Vec b = (Vec(3) << 1, 1, 2).finished();
    CHECK(max_abs_diff(deadzone(u, b) + saturate(u, b), u) < 1e-15);
  }

  TEST_CASE("loop transform of the second-order example") {
    const SaturatedLFTPlant p = *fixtures::second_order().plant;
    const AugmentedPlant a = loop_transform(p);
    CHECK(max_abs_diff(a.A, mat({{0, 1, 0}, {-10, -8, 0.1}, {0, 0, -2}})) < 1e-15);
    CHECK(max_abs_diff(a.Bw, mat({{0}, {-0.1}, {0}})) < 1e-15);
    CHECK(max_abs_diff(a.Bv, mat({{0}, {0}, {1}})) < 1e-15);
    CHECK(max_abs_diff(a.Bp, mat({{0}, {1}, {0}})) < 1e-15);
    CHECK(max_abs_diff(a.Bd, mat({{0}, {-1}, {0}})) < 1e-15);
    CHECK(max_abs_diff(a.Cq, mat({{2, -1, 0.3}})) < 1e-15);
    CHECK(max_abs_diff(a.Dqw, mat({{-0.3}})) < 1e-15);
    CHECK(max_abs_diff(a.Dqd, mat({{1}})) < 1e-15);
    CHECK(max_abs_diff(a.Ce, mat({{-1, 1, 0.1}})) < 1e-15);
    CHECK(max_abs_diff(a.Dew, mat({{-0.1}})) < 1e-15);
    CHECK(max_abs_diff(a.Dep, mat({{1}})) < 1e-15);
    CHECK(max_abs_diff(a.Ded, mat({{0.5}})) < 1e-15);
  }

  TEST_CASE("loop transform reproduces the saturated plant response") {
    // With u' = -alpha u + v and w = N(u), the augmented x_p' equals the
    // plant driven by Sat(u) = u - w.
    const SaturatedLFTPlant p = *fixtures::second_order().plant;
    const AugmentedPlant a = loop_transform(p);
    const Vec xp = (Vec(2) << 0.3, -1.2).finished();
    const double u = 0.7, w = 0.4, pd = -0.2, d = 0.9, v = 1.1;
    const Vec xa = (Vec(3) << xp, u).finished();
    const Vec dx = a.A * xa + a.Bp * pd + a.Bw * w + a.Bd * d + a.Bv * v;
    const Vec ref = p.A * xp + p.B0 * (u - w) + p.B1 * pd + p.B2 * d;
    CHECK(max_abs_diff(dx.head(2), ref) < 1e-14);
    CHECK(dx(2) == doctest::Approx(-p.alpha * u + v));
  }

  TEST_CASE("plant validation names the field") {
    SaturatedLFTPlant p = *fixtures::second_order().plant;
    p.B0 = Mat::Zero(3, 1);
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("B0"), std::invalid_argument);
  }

  TEST_CASE("closed loop dimensions with mixed filters") {
    const ProblemConfig c = fixtures::second_order();
    const SaturatedLFTPlant& p = *c.plant;
    const AugmentedPlant a = loop_transform(p);
    const auto filters = make_nonlinearity_filters(c.iqcs, p.alpha, p.nu());
    const Interconnection ic = attach_filters(a, filters, uncertainty_filters(p.structure));
    CHECK(ic.num_filters() == 3);
    CHECK(ic.num_unc() == 1);
    CHECK(ic.n() == 3 + ic.npsi);
    const ClosedLoop cl = close_loop(ic, Mat::Zero(1, ic.n()), Mat::Zero(1, 1));
    // with zero gains the filter states do not feed back into the plant
    CHECK(cl.A.topRightCorner(3, ic.npsi).norm() == 0.0);
  }
}
