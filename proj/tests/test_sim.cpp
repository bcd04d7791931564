#include "fixtures.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace satiqc;

namespace {

struct Fixture {
  ProblemConfig c = fixtures::second_order();
  SynthesisRun run = synthesize(*c.plant, c.iqcs, c.synthesis, c.solver, c.factor);
  SimModel model = make_sim_model(*c.plant, run.problem.ic, run.result.F, run.result.H);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

SimTrace manual_trace(const Vec& d, const Vec& e, double dt) {
  SimTrace tr;
  tr.t = Vec::LinSpaced(d.size(), 0.0, dt * (d.size() - 1));
  tr.d = d;
  tr.e = e;
  return tr;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("empirical gain of e = 2 d") {
    const Vec t = Vec::LinSpaced(2001, 0.0, 20.0);
    const Vec d = t.array().sin();
    CHECK(empirical_l2_gain(manual_trace(d, 2 * d, 0.01)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(empirical_l2_gain(manual_trace(Vec::Zero(10), Vec::Zero(10), 0.1)), std::invalid_argument);
  }

  TEST_CASE("RK4 converges at fourth order") {
    // Zero gains, zero disturbance and Delta = 0: x_p' = A x_p exactly.
    const ProblemConfig c = fixtures::second_order();
    const SaturatedLFTPlant& p = *c.plant;
    const Interconnection ic = attach_filters(loop_transform(p), make_nonlinearity_filters(c.iqcs, p.alpha, p.nu()),
                                              uncertainty_filters(p.structure));
    const SimModel m = make_sim_model(p, ic, Mat::Zero(1, ic.n()), Mat::Zero(1, 1));
    const Vec x0 = (Vec(2) << 1.0, -0.5).finished();
    const double T = 2.0;
    const Vec exact = (p.A * T).exp() * x0;
    auto err = [&](double h) {
      Scenario s;
      s.duration = T;
      s.step = h;
      s.x0 = x0;
      const SimTrace tr = simulate(m, s);
      return (tr.x_p().row(tr.samples() - 1).transpose() - exact).norm();
    };
    const double ratio = err(0.1) / err(0.05);
    CHECK(ratio > 12);
    CHECK(ratio < 20);
  }

  TEST_CASE("zero disturbance gives a zero trace") {
    Scenario s;
    s.duration = 2.0;
    const SimTrace tr = simulate(fx().model, s);
    CHECK(tr.x_cl.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(tr.e.cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(empirical_l2_gain(tr), std::invalid_argument);
  }

  TEST_CASE("configured scenario stays below the certified gain") {
    const Fixture& f = fx();
    const SimTrace tr = simulate(f.model, f.c.scenarios.at(0));
    REQUIRE_FALSE(tr.diverged);
    CHECK(empirical_l2_gain(tr) <= f.run.result.gamma);
    CHECK(check_dissipation(tr, f.model, f.run.result).ok());
  }

  TEST_CASE("a corrupted storage function violates dissipation") {
    const Fixture& f = fx();
    const SimTrace tr = simulate(f.model, f.c.scenarios.at(0));
    SynthesisResult bad = f.run.result;
    bad.Q = -bad.Q;
    CHECK(check_dissipation(tr, f.model, bad).worst_relative > 1e-4);
  }

  TEST_CASE("serial and parallel batches match") {
    const Fixture& f = fx();
    std::mt19937_64 rng(4);
    std::vector<Scenario> scs;
    for (int i = 0; i < 3; ++i) scs.push_back(random_scenario(rng, f.c.plant->structure, 1, 3.0, 1e-3));
    const auto a = simulate_batch_serial(f.model, scs);
    const auto b = simulate_batch(f.model, scs);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a[i].x_cl - b[i].x_cl).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("random scenarios are admissible") {
    std::mt19937_64 rng(8);
    UncertaintyStructure st;
    st.scalar_blocks = {1, 2};
    st.bound = 0.7;
    for (int i = 0; i < 20; ++i) CHECK_NOTHROW(random_scenario(rng, st, 2).validate(st));
  }

  TEST_CASE("an uncertainty realization above the bound is rejected") {
    UncertaintyStructure st;
    st.scalar_blocks = {1};
    Scenario s;
    s.uncertainty.kind = UncertaintySignal::Kind::constant;
    s.uncertainty.value = {1.5};
    CHECK_THROWS_AS(s.validate(st), std::invalid_argument);
  }

  TEST_CASE("CSV header lists every channel") {
    Scenario s;
    s.duration = 0.01;
    std::ostringstream os;
    write_csv(os, simulate(fx().model, s));
    const std::string head = os.str().substr(0, os.str().find('\n'));
    for (const char* col : {"t", "x1", "u1", "sat_u1", "w1", "p1", "q1", "e1", "d1"})
      CHECK(head.find(col) != std::string::npos);
  }
}
