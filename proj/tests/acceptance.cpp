// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits 0 either way; failures are reported, not fatal.
#include "probes.hpp"
#include "satiqc/config.hpp"

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace satiqc;

namespace {

const std::string kConfigs = SATIQC_CONFIG_DIR;
const std::string kCli = SATIQC_CLI;

struct Line {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct CliRun {
  int code = -1;
  double seconds = 0.0;
};

CliRun cli(const std::string& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = "'" + kCli + "' " + args + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

StateSpace ss_from_json(const json& j) {
  return StateSpace(matrix_from_json(j.at("A"), "A"), matrix_from_json(j.at("B"), "B"),
                    matrix_from_json(j.at("C"), "C"), matrix_from_json(j.at("D"), "D"));
}

CVec poles_from_json(const json& j) {
  CVec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = cplx(j[i][0].get<double>(), j[i][1].get<double>());
  return v;
}

double rel_err(double v, double ref) { return std::abs(v - ref) / std::abs(ref); }

Interconnection interconnection(const ProblemConfig& c) {
  const SaturatedLFTPlant& p = *c.plant;
  return attach_filters(loop_transform(p), make_nonlinearity_filters(c.iqcs, p.alpha, p.nu(), c.factor),
                        uncertainty_filters(p.structure));
}

// 1. Popov factorization through the CLI.
Line factorization() {
  Line L{1, "Popov factorization (alpha = 1, eps = 0.01)"};
  const CliRun r = cli("factorize --config '" + kConfigs + "/popov_factorize.json' --out factorize_popov.json");
  L.check(r.code == 0, "exit code " + std::to_string(r.code));
  if (r.code != 0) return L;
  const json j = read_json("factorize_popov.json").at("result");
  const double X = j.at("X")[0][0].get<double>();
  const double res = j.at("identity_residual").get<double>();
  const StateSpace pb = ss_from_json(j.at("psi_bar"));
  double ce = 0.0;
  ce = std::max(ce, probes::tf_coeff_error(pb, 0, 0, {1.98, 0.0198}, {1, 1}));
  ce = std::max(ce, probes::tf_coeff_error(pb, 0, 1, {-0.9802}, {1}));
  ce = std::max(ce, probes::tf_coeff_error(pb, 1, 0, {0}, {1}));
  ce = std::max(ce, probes::tf_coeff_error(pb, 1, 1, {1}, {1}));
  L.check(std::abs(X - 0.9950) <= 1e-3, "X = " + fmt(X));
  L.check(res < 1e-6, "residual " + fmt(res, 3));
  L.check(ce < 1e-2, "Psi_bar coefficient error " + fmt(ce, 3));
  L.check(r.seconds < 1.0, "runtime " + fmt(r.seconds, 3) + " s");
  L.notes.insert(L.notes.begin(), "X = " + fmt(X, 5) + ", residual " + fmt(res, 2) + ", coeff err " + fmt(ce, 2) +
                                      ", " + fmt(r.seconds, 2) + " s");
  return L;
}

std::vector<std::array<double, 5>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, line)) {
    std::array<double, 5> r{};
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 5 && std::getline(ss, cell, ','); ++k) r[k] = cell == "NaN" ? std::nan("") : std::stod(cell);
    rows.push_back(r);
  }
  return rows;
}

// 2. Alpha sweep through the CLI.
Line sweep() {
  Line L{2, "alpha sweep on the second-order example"};
  const CliRun r = cli("sweep --config '" + kConfigs + "/second_order.json' --out sweep.csv --jobs 4");
  L.check(r.code == 0, "exit code " + std::to_string(r.code));
  if (r.code != 0) return L;
  const auto rows = read_csv("sweep.csv");
  const std::vector<double> alphas{2, 5, 7, 10, 15, 20, 30, 40, 50, 60, 70, 100};
  L.check(rows.size() == alphas.size(), "row count " + std::to_string(rows.size()));
  if (rows.size() != alphas.size()) return L;
  double wP = 0, wS = 0, wM = 0, zf_lo = INFINITY, zf_hi = -INFINITY, drift_lo = INFINITY, drift_hi = -INFINITY;
  double mono = -INFINITY;
  bool nan = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& c = rows[i];
    for (int k = 1; k < 5; ++k) nan = nan || std::isnan(c[k]);
    L.check(c[0] == alphas[i], "alpha grid mismatch at row " + std::to_string(i));
    wP = std::max(wP, rel_err(c[1], 3.041));
    wS = std::max(wS, rel_err(c[3], 8.155));
    wM = std::max(wM, rel_err(c[4], 1.508));
    zf_lo = std::min(zf_lo, c[2]);
    zf_hi = std::max(zf_hi, c[2]);
    if (c[0] >= 30) {
      drift_lo = std::min(drift_lo, c[2] - rows[0][2]);
      drift_hi = std::max(drift_hi, c[2] - rows[0][2]);
    }
    mono = std::max(mono, c[4] - std::min({c[1], c[2], c[3]}));
  }
  L.check(!nan, "solver failures (NaN cells)");
  L.check(wP <= 0.05, "gamma_P off 3.041 by " + fmt(100 * wP, 3) + "% (got ~" + fmt(rows[0][1], 5) + ")");
  L.check(zf_lo >= 1.45 && zf_hi <= 1.61, "gamma_ZF range [" + fmt(zf_lo, 5) + ", " + fmt(zf_hi, 5) + "]");
  L.check(drift_lo >= -1e-3 && drift_hi <= 0.05,
          "gamma_ZF drift for alpha >= 30 in [" + fmt(drift_lo, 3) + ", " + fmt(drift_hi, 3) + "]");
  L.check(wS <= 0.05, "gamma_S off 8.155 by " + fmt(100 * wS, 3) + "% (got ~" + fmt(rows[0][3], 5) + ")");
  L.check(wM <= 0.05, "gamma_M off 1.508 by " + fmt(100 * wM, 3) + "%");
  L.check(mono <= 1e-3, "gamma_M exceeds min single-IQC gamma by " + fmt(mono, 3));
  L.check(r.seconds < 300, "runtime " + fmt(r.seconds, 3) + " s");
  L.notes.insert(L.notes.begin(), "gamma_M ~" + fmt(rows[0][4], 5) + ", " + fmt(r.seconds, 2) + " s");
  return L;
}

// 3. Cart-pendulum dynamic IQC vs anti-windup, through the CLI.
Line cart() {
  Line L{3, "cart-pendulum dynamic IQC vs anti-windup"};
  const CliRun a = cli("synth --config '" + kConfigs + "/cart_pendulum.json' --out synth_cart.json");
  const CliRun b = cli("synth --config '" + kConfigs + "/cart_pendulum_antiwindup.json' --out synth_cart_aw.json");
  L.check(a.code == 0, "dynamic synthesis exit code " + std::to_string(a.code));
  L.check(b.code == 0, "anti-windup exit code " + std::to_string(b.code));
  if (a.code != 0 || b.code != 0) return L;
  const double gd = read_json("synth_cart.json").at("result").at("gamma").get<double>();
  const double gs = read_json("synth_cart_aw.json").at("result").at("gamma").get<double>();
  L.notes.push_back("gamma_dyn " + fmt(gd, 5) + ", gamma_sc " + fmt(gs, 6) + ", " + fmt(a.seconds + b.seconds, 2) +
                    " s");
  L.check(rel_err(gd, 3.022) <= 0.10, "gamma_dyn " + fmt(gd, 5) + " not within 10% of 3.022");
  L.check(rel_err(gs, 181.142) <= 0.10, "gamma_sc " + fmt(gs, 6) + " not within 10% of 181.142");
  L.check(gs >= 10 * gd, "ratio gamma_sc / gamma_dyn = " + fmt(gs / gd, 4));
  L.check(a.seconds + b.seconds < 30, "runtime " + fmt(a.seconds + b.seconds, 3) + " s");
  return L;
}

// 4. Pole region on the second-order example.
Line pole_region() {
  Line L{4, "pole region rho = 1, theta = pi/3"};
  const CliRun r = cli("synth --config '" + kConfigs + "/second_order.json' --out synth_second_order.json");
  L.check(r.code == 0, "exit code " + std::to_string(r.code));
  if (r.code != 0) return L;
  const json j = read_json("synth_second_order.json").at("result");
  const ProblemConfig c = load_config(kConfigs + "/second_order.json");
  const double theta = c.synthesis.pole_region->theta;
  const Interconnection ic = interconnection(c);
  const ClosedLoop cl = close_loop(ic, matrix_from_json(j.at("F_c"), "F_c"), matrix_from_json(j.at("H_c"), "H_c"));
  const CVec eig = eigenvalues(cl.A);
  const CVec reported = poles_from_json(j.at("poles"));
  L.check(eig.size() == reported.size(), "pole count mismatch");
  double worst_re = -INFINITY, worst_sec = -INFINITY;
  for (int i = 0; i < eig.size(); ++i) {
    worst_re = std::max(worst_re, eig(i).real());
    worst_sec = std::max(worst_sec, std::tan(theta) * eig(i).real() + std::abs(eig(i).imag()));
  }
  L.check(worst_re < -1 + 1e-6, "max Re = " + fmt(worst_re));
  L.check(worst_sec < 1e-6, "sector violation " + fmt(worst_sec));
  L.notes.insert(L.notes.begin(), "max Re " + fmt(worst_re, 5) + ", sector slack " + fmt(-worst_sec, 4));
  return L;
}

struct ExampleSim {
  std::string name;
  ProblemConfig cfg;
  SynthesisResult res;
};

// 5. Certificate soundness on random admissible scenarios.
Line certificates() {
  Line L{5, "certificates on random admissible scenarios"};
  std::vector<ExampleSim> ex;
  for (const auto& [name, file, result] : {std::tuple{"second_order", "second_order.json", "synth_second_order.json"},
                                           std::tuple{"cart_pendulum", "cart_pendulum.json", "synth_cart.json"}}) {
    std::ifstream in(result);
    if (!in) {
      L.check(false, std::string(name) + ": no synthesis result");
      continue;
    }
    ex.push_back({name, load_config(kConfigs + "/" + file), synthesis_result_from_json(json::parse(in))});
  }
  std::mt19937_64 rng(2024);
  for (const ExampleSim& e : ex) {
    const SaturatedLFTPlant& p = *e.cfg.plant;
    const Interconnection ic = interconnection(e.cfg);
    const SimModel m = make_sim_model(p, ic, e.res.F, e.res.H);
    std::vector<Scenario> scs;
    for (int i = 0; i < 10; ++i) scs.push_back(random_scenario(rng, p.structure, p.nd(), 30.0, 1e-3));
    const auto traces = simulate_batch(m, scs);
    int bad_gain = 0, bad_diss = 0, diverged = 0;
    double worst_ratio = 0.0, worst_diss = -INFINITY;
    for (const SimTrace& tr : traces) {
      if (tr.diverged) {
        ++diverged;
        continue;
      }
      const double g = empirical_l2_gain(tr);
      worst_ratio = std::max(worst_ratio, g / e.res.gamma);
      if (g > e.res.gamma) ++bad_gain;
      const DissipationReport d = check_dissipation(tr, m, e.res);
      worst_diss = std::max(worst_diss, d.worst_relative);
      if (!d.ok(1e-4)) ++bad_diss;
    }
    L.notes.push_back(e.name + ": max gain/gamma " + fmt(worst_ratio, 4) + ", worst dissipation " +
                      fmt(worst_diss, 3) + ", diverged " + std::to_string(diverged) + "/10");
    L.check(diverged == 0, e.name + ": " + std::to_string(diverged) + " of 10 runs diverged");
    L.check(bad_gain == 0, e.name + ": " + std::to_string(bad_gain) + " runs above gamma");
    L.check(bad_diss == 0, e.name + ": " + std::to_string(bad_diss) + " runs with a positive dissipation margin");
  }
  return L;
}

// 6. Substituting every synthesis solution into the analysis LMI.
Line round_trip() {
  Line L{6, "synthesis solutions satisfy the analysis LMI"};
  double worst = -INFINITY;
  int count = 0, unsolved = 0;
  auto take = [&](const SynthesisRun& run, const std::string& tag) {
    if (!run.result.ok()) {
      ++unsolved;
      return;
    }
    const double m = round_trip_margin(run.problem, run.result);
    ++count;
    worst = std::max(worst, m);
    L.check(m <= 1e-6, tag + ": margin " + fmt(m, 3));
  };
  const ProblemConfig so = load_config(kConfigs + "/second_order.json");
  take(synthesize(*so.plant, so.iqcs, so.synthesis, so.solver, so.factor), "second_order");
  SynthesisOptions plain = so.synthesis;
  plain.pole_region.reset();
  for (double a : so.sweep->values)
    for (Strategy s : {Strategy::popov, Strategy::zames_falb, Strategy::sector, Strategy::mixed}) {
      SaturatedLFTPlant p = *so.plant;
      p.alpha = a;
      take(synthesize(p, strategy_iqcs(s), plain, so.solver, so.factor), to_string(s) + "@" + fmt(a));
    }
  const ProblemConfig ca = load_config(kConfigs + "/cart_pendulum.json");
  take(synthesize(*ca.plant, ca.iqcs, ca.synthesis, ca.solver, ca.factor), "cart_pendulum");
  L.notes.insert(L.notes.begin(), std::to_string(count) + " solutions, worst relative margin " + fmt(worst, 3) +
                                      (unsolved ? ", " + std::to_string(unsolved) + " unsolved" : ""));
  return L;
}

// 7. Numerical kernels.
Line kernels() {
  Line L{7, "ARE, factorization and hard-IQC kernels"};
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  double worst_are = 0.0;
  int are_fail = 0;
  for (int t = 0; t < 100; ++t) {
    // indefinite-D LQR form: B = [Bu 0], C = [0; Lq], D = diag(I, -I)
    const int n = 2 + t % 5, m = 1 + t % 2, r = 1 + (t / 2) % 2;
    Mat A(n, n), B = Mat::Zero(n, m + r), C = Mat::Zero(m + r, n), D = Mat::Identity(m + r, m + r);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
      for (int j = 0; j < m; ++j) B(i, j) = nd(rng);
      for (int j = 0; j < r; ++j) C(m + j, i) = nd(rng);
    }
    D.bottomRightCorner(r, r) *= -1;
    try {
      const AreResult a = solve_are(A, B, C, D);
      const double res = are_residual(A, B, C, D, a.X);
      worst_are = std::max(worst_are, res);
      if (!(res < 1e-8) || !is_hurwitz(a.closed_loop)) ++are_fail;
    } catch (const std::exception&) {
      ++are_fail;
    }
  }
  L.check(are_fail == 0, std::to_string(are_fail) + " of 100 ARE instances failed");

  double worst_fact = 0.0;
  for (double a : {0.5, 1.0, 2.0, 10.0})
    for (const Multiplier& m : {make_popov_multiplier(a), make_zames_falb_multiplier(a),
                                make_sector_transformed_multiplier(a), make_sector_multiplier()}) {
      const double res = identity_residual(j_spectral_factorize(m), m);
      worst_fact = std::max(worst_fact, res);
      L.check(res < 1e-6, to_string(m.kind) + " alpha " + fmt(a) + ": residual " + fmt(res, 3));
    }

  double min_int = INFINITY;
  for (const Multiplier& m : {make_popov_multiplier(1.0), make_zames_falb_multiplier(1.0),
                              make_sector_transformed_multiplier(1.0), make_sector_multiplier()}) {
    const FactoredIQC f = j_spectral_factorize(m);
    int bad = 0;
    for (int k = 0; k < 100; ++k) {
      const auto [v, w] = probes::deadzone_probe(m, rng, 2e-3, 20.0);
      const HardIqcReport r = hard_iqc_integral(f, v, w, 2e-3, 20.0);
      min_int = std::min(min_int, r.min_integral);
      if (!r.ok) ++bad;
    }
    L.check(bad == 0, to_string(m.kind) + (m.transformed ? " (transformed)" : "") + ": " + std::to_string(bad) +
                          " of 100 probes went negative");
  }
  L.notes.insert(L.notes.begin(), "ARE residual " + fmt(worst_are, 2) + ", factorization residual " +
                                      fmt(worst_fact, 2) + ", min IQC integral " + fmt(min_int, 2));
  return L;
}

}  // namespace

int main() {
  std::vector<Line> lines;
  for (auto fn : {factorization, sweep, cart, pole_region, certificates, round_trip, kernels}) {
    try {
      lines.push_back(fn());
    } catch (const std::exception& e) {
      Line L{static_cast<int>(lines.size()) + 1, "(exception)"};
      L.check(false, e.what());
      lines.push_back(L);
    }
  }
  int passed = 0;
  for (const Line& L : lines) {
    passed += L.pass;
    std::cout << (L.pass ? "PASS" : "FAIL") << "  criterion " << L.id << ": " << L.title;
    for (size_t i = 0; i < L.notes.size(); ++i) std::cout << (i ? "; " : " | ") << L.notes[i];
    std::cout << "\n";
  }
  std::cout << passed << "/" << lines.size() << " criteria passed\n";
  return 0;
}
