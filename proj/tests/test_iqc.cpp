#include "fixtures.hpp"
#include "probes.hpp"

#include <doctest.h>

using namespace satiqc;
using fixtures::mat;

TEST_SUITE("iqc") {
  TEST_CASE("L1 norms of first- and second-order filters") {
    CHECK(l1_norm(default_zf_h()) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(l1_norm(StateSpace(mat({{-1}}), mat({{1}}), mat({{3}}), mat({{0}}))) == doctest::Approx(3.0).epsilon(1e-9));
    // (s-1)/((s+1)(s+2)) = -2 e^{-t} + 3 e^{-2t}; |h| integrates to 5/6
    const StateSpace h(mat({{-1, 0}, {0, -2}}), mat({{1}, {1}}), mat({{-2, 3}}), mat({{0}}));
    CHECK(l1_norm(h, 1e-9) == doctest::Approx(5.0 / 6.0).epsilon(1e-6));
  }

  TEST_CASE("Zames-Falb filter above the L1 bound is rejected") {
    const StateSpace h(mat({{-1}}), mat({{1}}), mat({{2}}), mat({{0}}));
    CHECK_THROWS_WITH_AS(make_zames_falb_multiplier(1.0, 0.01, h), doctest::Contains("L1 bound violated"),
                         std::invalid_argument);
  }

  TEST_CASE("Popov factorization at alpha = 1") {
    const Multiplier m = make_popov_multiplier(1.0, 0.01);
    const FactoredIQC f = j_spectral_factorize(m);
    REQUIRE(f.X.size() == 1);
    CHECK(f.X(0, 0) == doctest::Approx(0.9950).epsilon(1e-3));
    CHECK(identity_residual(f, m) < 1e-6);
    const TriangularFactor t = to_triangular(f);
    CHECK(probes::tf_coeff_error(t.psi_bar, 0, 0, {1.98, 0.0198}, {1, 1}) < 1e-2);
    CHECK(probes::tf_coeff_error(t.psi_bar, 0, 1, {-0.9802}, {1}) < 1e-2);
    CHECK(probes::tf_coeff_error(t.psi_bar, 1, 0, {0}, {1}) < 1e-12);
    CHECK(probes::tf_coeff_error(t.psi_bar, 1, 1, {1}, {1}) < 1e-12);
    // Psi and Psi^{-1} both stable
    CHECK(is_hurwitz(f.psi.A));
    CHECK(is_hurwitz(inverse(f.psi).A));
  }

  TEST_CASE("static sector factorization is exact") {
    const Multiplier m = make_sector_multiplier(0.01);
    const FactoredIQC f = j_spectral_factorize(m);
    CHECK(f.psi.nx() == 0);
    CHECK(identity_residual(f, m) < 1e-12);
    const Mat W = f.w.matrix();
    CHECK(fixtures::max_abs_diff(f.M.transpose() * W * f.M, mat({{0.01, 1}, {1, -2.01}})) < 1e-12);
  }

  TEST_CASE("congruence factor reproduces R for both rules") {
    const Mat R = mat({{0, 1}, {1, -0.01}});
    for (bool iso : {true, false}) {
      const Mat M = congruence_factor(R, 1, 1, iso);
      const Mat W = mat({{1, 0}, {0, -1}});
      CHECK(fixtures::max_abs_diff(M.transpose() * W * M, R) < 1e-12);
    }
  }

  TEST_CASE("multiplier sign conditions") {
    for (double a : {0.5, 2.0}) {
      CHECK(check_multiplier_signs(make_popov_multiplier(a)).ok);
      CHECK(check_multiplier_signs(make_zames_falb_multiplier(a)).ok);
      CHECK(check_multiplier_signs(make_sector_transformed_multiplier(a)).ok);
    }
    CHECK(check_multiplier_signs(make_sector_multiplier()).ok);
  }

  TEST_CASE("frequency identity across families and alpha") {
    for (double a : {0.5, 1.0, 2.0, 10.0}) {
      for (const Multiplier& m : {make_popov_multiplier(a), make_zames_falb_multiplier(a),
                                  make_sector_transformed_multiplier(a), make_sector_multiplier()}) {
        const FactoredIQC f = j_spectral_factorize(m);
        CAPTURE(a);
        CAPTURE(to_string(m.kind));
        CHECK(identity_residual(f, m) < 1e-6);
      }
    }
  }

  TEST_CASE("hard IQC integral stays nonnegative on dead-zone probes") {
    std::mt19937_64 rng(5);
    for (const Multiplier& m : {make_popov_multiplier(1.0), make_zames_falb_multiplier(1.0),
                                make_sector_transformed_multiplier(1.0), make_sector_multiplier()}) {
      const FactoredIQC f = j_spectral_factorize(m);
      for (int k = 0; k < 5; ++k) {
        const auto [v, w] = probes::deadzone_probe(m, rng, 1e-3, 20.0);
        const HardIqcReport r = hard_iqc_integral(f, v, w, 1e-3, 20.0);
        CAPTURE(to_string(m.kind));
        CHECK(r.ok);
      }
    }
  }

  TEST_CASE("replicated multiplier keeps the identity") {
    const Multiplier m = replicate(make_popov_multiplier(2.0), 2);
    CHECK(m.m1 == 2);
    const FactoredIQC f = j_spectral_factorize(m);
    CHECK(identity_residual(f, m) < 1e-6);
  }

  TEST_CASE("uncertainty IQC is diag(b I, I)") {
    const FactoredIQC f = make_uncertainty_iqc({true, 2}, 0.5);
    CHECK(f.psi.nx() == 0);
    CHECK(fixtures::max_abs_diff(f.psi.D, Mat(Vec((Vec(4) << 0.5, 0.5, 1, 1).finished()).asDiagonal())) < 1e-15);
  }
}
