#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>

using namespace satiqc;

namespace {

json raw(const std::string& name) {
  std::ifstream in(fixtures::config_path(name));
  return json::parse(in);
}

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped configs load") {
    for (const char* f : {"second_order.json", "cart_pendulum.json", "cart_pendulum_antiwindup.json",
                          "popov_factorize.json", "sector_factorize.json", "zf_bad_filter.json"}) {
      CAPTURE(f);
      CHECK_NOTHROW(load_config(fixtures::config_path(f)));
    }
    const ProblemConfig c = fixtures::second_order();
    REQUIRE(c.plant);
    CHECK(c.plant->nx() == 2);
    CHECK(c.iqcs.size() == 3);
    CHECK(c.synthesis.pole_region.has_value());
    CHECK(c.sweep->values.size() == 12);
    CHECK(c.scenarios.size() == 1);
    CHECK(fixtures::cart().plant->nq() == 0);
  }

  TEST_CASE("errors name the offending field") {
    json j = raw("second_order.json");
    j["plant"]["B0"] = {{0.0}, {0.1}, {0.0}};
    CHECK(error_of(j).rfind("plant.B0: expected 2x1, got 3x1", 0) == 0);

    j = raw("second_order.json");
    j.erase("alpha");
    CHECK(error_of(j).rfind("alpha", 0) == 0);

    j = raw("second_order.json");
    j["uncertainty"]["scalar_blocks"] = {2};
    CHECK(error_of(j).rfind("uncertainty", 0) == 0);

    j = raw("second_order.json");
    j["iqcs"][1]["kind"] = "circle";
    CHECK(error_of(j).rfind("iqcs[1].kind", 0) == 0);

    j = raw("second_order.json");
    j["plant"]["A"][1] = {1.0};
    CHECK(error_of(j).rfind("plant.A[1]", 0) == 0);

    j = raw("second_order.json");
    j["scenarios"][0]["uncertainty"]["value"] = {2.0};
    CHECK(error_of(j).rfind("scenarios[0].uncertainty.value", 0) == 0);

    j = raw("second_order.json");
    j["pole_region"]["rho"] = -1;
    CHECK(error_of(j).rfind("pole_region.rho", 0) == 0);

    j = raw("second_order.json");
    j["u_bar"] = "big";
    CHECK(error_of(j).rfind("u_bar", 0) == 0);
  }

  TEST_CASE("omitted zero-size matrices are accepted") {
    const ProblemConfig c = fixtures::cart();
    CHECK(c.plant->B1.rows() == 4);
    CHECK(c.plant->B1.cols() == 0);
    CHECK(c.plant->D11.rows() == 1);
  }

  TEST_CASE("synthesis result round-trips through JSON") {
    SynthesisResult r;
    r.gamma = 1.2345678901234567;
    r.F = Mat::Random(1, 5);
    r.H = Mat::Random(1, 1);
    r.Q = Mat::Random(5, 5);
    r.Gamma = Mat::Random(1, 1);
    r.lambdas = {0.1, 1.0 / 3.0};
    r.poles = CVec::Zero(2);
    const json j = json::parse(synthesis_result_json(r, -1e-12).dump());
    const SynthesisResult b = synthesis_result_from_json(j);
    CHECK(b.gamma == r.gamma);
    CHECK(b.F == r.F);
    CHECK(b.Q == r.Q);
    CHECK(b.lambdas == r.lambdas);
  }
}
