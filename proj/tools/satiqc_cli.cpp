// satiqc command-line front end: factorize | synth | analyze | sweep | simulate
#include "satiqc/config.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace satiqc;

namespace {

enum Exit { ok = 0, infeasible = 1, invalid = 2, numerical = 3 };

struct Args {
  std::string config, out, result, multiplier;
  int jobs = 1;
  std::optional<double> feas_tol, gap;
  std::uint64_t seed = 1;
  int random = 0;
  bool verbose = false;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json metadata(const std::string& cmd, const Args& a, double elapsed) {
  return {{"command", cmd}, {"config", a.config}, {"timestamp", timestamp()}, {"elapsed_s", elapsed}};
}

void emit(const json& doc, const std::string& path) {
  const std::string s = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << s;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("--out: cannot write " + path);
  f << s;
}

ProblemConfig load(const Args& a) {
  if (a.config.empty()) throw ConfigError("--config: required");
  ProblemConfig c = load_config(a.config);
  if (a.feas_tol) c.solver.feas_tol = *a.feas_tol;
  if (a.gap) c.solver.gap_tol = *a.gap;
  c.solver.verbose = a.verbose;
  return c;
}

const SaturatedLFTPlant& need_plant(const ProblemConfig& c) {
  if (!c.plant) throw ConfigError("plant: missing");
  return *c.plant;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

void print_matrix(std::ostream& os, const std::string& name, const Mat& M) {
  os << "  " << name << " =";
  if (M.size() == 0) {
    os << " []\n";
    return;
  }
  os << "\n";
  for (int i = 0; i < M.rows(); ++i) {
    os << "    ";
    for (int k = 0; k < M.cols(); ++k) os << std::setw(14) << fmt(M(i, k)) << (k + 1 < M.cols() ? " " : "");
    os << "\n";
  }
}

void print_tf_matrix(std::ostream& os, const std::string& name, const StateSpace& g) {
  os << "  " << name << "(s) =\n";
  for (int i = 0; i < g.ny(); ++i) {
    os << "    [";
    for (int k = 0; k < g.nu(); ++k) os << (k ? ",  " : " ") << format_tf(siso_tf(g, i, k));
    os << " ]\n";
  }
}

json tf_json(const StateSpace& g) {
  json rows = json::array();
  for (int i = 0; i < g.ny(); ++i) {
    json r = json::array();
    for (int k = 0; k < g.nu(); ++k) {
      const auto tf = siso_tf(g, i, k);
      r.push_back({{"num", tf.num}, {"den", tf.den}});
    }
    rows.push_back(r);
  }
  return rows;
}

int status_exit(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return Exit::ok;
    case SdpStatus::infeasible:
    case SdpStatus::unbounded: return Exit::infeasible;
    default: return Exit::numerical;
  }
}

Multiplier build_multiplier(const FactorizeSpec& f) {
  switch (f.kind) {
    case IqcKind::popov: return make_popov_multiplier(f.alpha, f.eps);
    case IqcKind::zames_falb:
      return f.h ? make_zames_falb_multiplier(f.alpha, f.eps, *f.h) : make_zames_falb_multiplier(f.alpha, f.eps);
    case IqcKind::sector: return make_sector_multiplier(f.eps);
    default: throw ConfigError("factorize.multiplier: unsupported");
  }
}

int cmd_factorize(const Args& a) {
  Timer tm;
  ProblemConfig c = load(a);
  if (!c.factorize && a.multiplier.empty()) throw ConfigError("factorize: missing");
  FactorizeSpec spec = c.factorize.value_or(FactorizeSpec{});
  if (!a.multiplier.empty()) {
    const IqcKind k = iqc_kind_from_string(a.multiplier);
    if (k != IqcKind::popov && k != IqcKind::zames_falb && k != IqcKind::sector)
      throw ConfigError("--multiplier: expected popov, zames_falb or sector");
    if (k != spec.kind) spec.h.reset();
    spec.kind = k;
  }
  const Multiplier m = build_multiplier(spec);
  const FactoredIQC f = j_spectral_factorize(m, c.factor);
  const TriangularFactor tri = to_triangular(f, c.factor.minreal_tol);
  const double res = identity_residual(f, m);
  const double elapsed = tm.seconds();
  const bool pass = res < 1e-6;

  std::cerr << "multiplier " << to_string(spec.kind) << (m.transformed ? " (loop-transformed, alpha = " + fmt(spec.alpha) + ")" : "")
            << ", eps = " << spec.eps << "\n";
  if (f.X.size()) print_matrix(std::cerr, "X", f.X);
  print_matrix(std::cerr, "M", f.M);
  print_tf_matrix(std::cerr, "Psi", f.psi);
  print_tf_matrix(std::cerr, "Psi_bar", tri.psi_bar);
  std::cerr << "  max |Psi~ W Psi - Pi| = " << std::scientific << std::setprecision(3) << res << std::defaultfloat
            << (pass ? "  (ok)" : "  (above 1e-6)") << "\n";

  json r;
  r["multiplier"] = to_string(spec.kind);
  r["alpha"] = spec.alpha;
  r["eps"] = spec.eps;
  r["signature"] = {f.w.m1, f.w.m2};
  r["X"] = to_json(f.X);
  r["M"] = to_json(f.M);
  r["eps_applied"] = f.eps_applied;
  r["psi"] = to_json(f.psi);
  r["psi_bar"] = to_json(tri.psi_bar);
  r["psi_tf"] = tf_json(f.psi);
  r["psi_bar_tf"] = tf_json(tri.psi_bar);
  r["identity_residual"] = res;
  json doc;
  doc["result"] = r;
  doc["metadata"] = metadata("factorize", a, elapsed);
  emit(doc, a.out);
  return pass ? Exit::ok : Exit::numerical;
}

void print_synthesis(std::ostream& os, const SynthesisResult& r, double rt) {
  os << "status " << to_string(r.diag.status) << "  gamma = " << fmt(r.gamma, 8) << "  (" << r.diag.iterations
     << " iterations)\n";
  if (!r.diag.message.empty()) os << "  " << r.diag.message << "\n";
  if (!r.ok()) return;
  print_matrix(os, "F_c", r.F);
  print_matrix(os, "H_c", r.H);
  os << "  lambda =";
  for (double l : r.lambdas) os << " " << fmt(l);
  os << "\n  poles  =";
  for (int i = 0; i < r.poles.size(); ++i) {
    os << " " << fmt(r.poles(i).real());
    if (r.poles(i).imag() != 0) os << (r.poles(i).imag() > 0 ? "+" : "") << fmt(r.poles(i).imag()) << "i";
  }
  os << "\n  round-trip margin = " << fmt(rt, 3) << "\n";
}

int cmd_synth(const Args& a) {
  Timer tm;
  ProblemConfig c = load(a);
  const SaturatedLFTPlant& plant = need_plant(c);
  json doc;
  int code;
  if (c.method == "antiwindup") {
    const AntiWindupResult r = solve_antiwindup(build_antiwindup_lmi(plant, c.synthesis), c.solver);
    std::cerr << "anti-windup: status " << to_string(r.status) << "  gamma = " << fmt(r.gamma, 8) << "\n";
    if (r.ok()) {
      print_matrix(std::cerr, "F", r.F);
      print_matrix(std::cerr, "H", r.H);
    }
    doc["result"] = antiwindup_result_json(r);
    code = status_exit(r.status);
  } else {
    SynthesisRun run = synthesize(plant, c.iqcs, c.synthesis, c.solver, c.factor);
    const double rt = run.result.ok() ? round_trip_margin(run.problem, run.result) : std::nan("");
    print_synthesis(std::cerr, run.result, rt);
    doc["result"] = synthesis_result_json(run.result, rt);
    code = status_exit(run.result.diag.status);
  }
  doc["metadata"] = metadata("synth", a, tm.seconds());
  emit(doc, a.out);
  return code;
}

// Gains from --result, or a fresh synthesis when none is given.
SynthesisResult gains_for(const Args& a, const ProblemConfig& c) {
  if (!a.result.empty()) {
    std::ifstream in(a.result);
    if (!in) throw ConfigError("--result: cannot open " + a.result);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("--result: ") + e.what());
    }
    return synthesis_result_from_json(j);
  }
  SynthesisRun run = synthesize(need_plant(c), c.iqcs, c.synthesis, c.solver, c.factor);
  if (!run.result.ok()) throw NumericalError("synthesis failed: " + run.result.diag.message);
  return run.result;
}

Interconnection interconnection_for(const ProblemConfig& c) {
  const SaturatedLFTPlant& plant = need_plant(c);
  const AugmentedPlant aug = loop_transform(plant);
  return attach_filters(aug, make_nonlinearity_filters(c.iqcs, plant.alpha, plant.nu(), c.factor),
                        uncertainty_filters(plant.structure));
}

void check_gain_shapes(const Interconnection& ic, const SynthesisResult& g) {
  if (g.F.rows() != ic.nu || g.F.cols() != ic.n())
    throw ConfigError("result.F_c: expected " + std::to_string(ic.nu) + "x" + std::to_string(ic.n()) +
                      " for the configured filters");
  if (g.H.rows() != ic.nu || g.H.cols() != ic.nu)
    throw ConfigError("result.H_c: expected " + std::to_string(ic.nu) + "x" + std::to_string(ic.nu));
}

int cmd_analyze(const Args& a) {
  Timer tm;
  ProblemConfig c = load(a);
  if (c.method != "iqc") throw ConfigError("method: analyze needs an iqc configuration");
  const SynthesisResult g = gains_for(a, c);
  const Interconnection ic = interconnection_for(c);
  check_gain_shapes(ic, g);
  const ClosedLoop cl = close_loop(ic, g.F, g.H);
  const AnalysisResult r =
      solve_analysis(build_analysis_lmi(cl, ic.structure, ic.num_filters(), c.synthesis.strict_margin), c.solver);
  const CVec poles = eigenvalues(cl.A);
  std::cerr << "analysis: status " << to_string(r.status) << "  gamma = " << fmt(r.gamma, 8)
            << "  (synthesis bound " << fmt(g.gamma, 8) << ")\n";
  if (!r.message.empty()) std::cerr << "  " << r.message << "\n";
  json res;
  res["status"] = to_string(r.status);
  res["gamma"] = r.gamma;
  res["synthesis_gamma"] = g.gamma;
  res["lambdas"] = r.lambdas;
  res["Gamma"] = to_json(r.Gamma);
  res["P"] = to_json(r.P);
  res["poles"] = to_json(poles);
  res["message"] = r.message;
  json doc;
  doc["result"] = res;
  doc["metadata"] = metadata("analyze", a, tm.seconds());
  emit(doc, a.out);
  return status_exit(r.status);
}

int cmd_sweep(const Args& a) {
  Timer tm;
  ProblemConfig c = load(a);
  SaturatedLFTPlant base = need_plant(c);
  if (!c.sweep) throw ConfigError("sweep: missing");
  const SweepSpec& sw = *c.sweep;
  // Sweep cells are independent; each runs the serial solver.
  SynthesisOptions so = c.synthesis;
  so.pole_region.reset();
  SdpOptions sdp = c.solver;
  sdp.parallel = false;
  sdp.verbose = false;
  const double eps = c.iqcs.empty() ? 0.01 : c.iqcs.front().eps;

  const std::array<Strategy, 4> cols{Strategy::popov, Strategy::zames_falb, Strategy::sector, Strategy::mixed};
  const int nv = static_cast<int>(sw.values.size());
  std::vector<std::array<double, 4>> gam(nv);
  for (auto& r : gam) r.fill(std::nan(""));
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < nv; ++i)
    for (int k = 0; k < 4; ++k)
      if (std::find(sw.strategies.begin(), sw.strategies.end(), cols[k]) != sw.strategies.end()) cells.push_back({i, k});

  const int jobs = std::max(1, a.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int ci = 0; ci < static_cast<int>(cells.size()); ++ci) {
    const auto [i, k] = cells[ci];
    SaturatedLFTPlant p = base;
    p.alpha = sw.values[i];
    try {
      const SynthesisRun run = synthesize(p, strategy_iqcs(cols[k], eps), so, sdp, c.factor);
      if (run.result.ok()) gam[i][k] = run.result.gamma;
    } catch (const std::exception&) {
    }
  }

  std::ostringstream csv;
  csv << "alpha,gamma_P,gamma_ZF,gamma_S,gamma_M\n" << std::setprecision(10);
  for (int i = 0; i < nv; ++i) {
    csv << sw.values[i];
    for (double g : gam[i]) {
      csv << ",";
      if (std::isnan(g)) csv << "NaN";
      else csv << g;
    }
    csv << "\n";
  }
  std::cerr << std::setw(8) << "alpha" << std::setw(12) << "gamma_P" << std::setw(12) << "gamma_ZF" << std::setw(12)
            << "gamma_S" << std::setw(12) << "gamma_M" << "\n";
  for (int i = 0; i < nv; ++i) {
    std::cerr << std::setw(8) << sw.values[i];
    for (double g : gam[i]) std::cerr << std::setw(12) << (std::isnan(g) ? std::string("NaN") : fmt(g, 6));
    std::cerr << "\n";
  }
  std::cerr << "sweep: " << cells.size() << " cells in " << fmt(tm.seconds(), 3) << " s\n";
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(a.out);
    if (!f) throw ConfigError("--out: cannot write " + a.out);
    f << csv.str();
  }
  return Exit::ok;
}

std::string trace_path(const std::string& out, const std::string& name, size_t count) {
  if (out.empty() || count == 1) return out;
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_" + name + p.extension().string())).string();
}

// Last time |e| exceeds 2% of its peak.
double settling_time(const SimTrace& tr) {
  if (tr.samples() == 0 || tr.e.cols() == 0) return 0.0;
  const Vec mag = tr.e.rowwise().norm();
  const double peak = mag.maxCoeff();
  if (!(peak > 0)) return 0.0;
  for (int i = tr.samples() - 1; i >= 0; --i)
    if (mag(i) > 0.02 * peak) return tr.t(std::min(i + 1, tr.samples() - 1));
  return 0.0;
}

int cmd_simulate(const Args& a) {
  Timer tm;
  ProblemConfig c = load(a);
  if (c.method != "iqc") throw ConfigError("method: simulate needs an iqc configuration");
  const SaturatedLFTPlant& plant = need_plant(c);
  const SynthesisResult g = gains_for(a, c);
  const Interconnection ic = interconnection_for(c);
  check_gain_shapes(ic, g);
  const SimModel model = make_sim_model(plant, ic, g.F, g.H);

  std::vector<Scenario> scs = c.scenarios;
  std::mt19937_64 rng(a.seed);
  for (int i = 0; i < a.random; ++i) {
    Scenario s = random_scenario(rng, plant.structure, plant.nd());
    s.name = "random_" + std::to_string(i);
    scs.push_back(s);
  }
  if (scs.empty()) throw ConfigError("scenarios: none given (add some or pass --random N)");
  for (size_t i = 0; i < scs.size(); ++i) {
    if (scs[i].name.empty()) scs[i].name = "scenario_" + std::to_string(i);
    try {
      scs[i].validate(plant.structure);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scenarios[" + std::to_string(i) + "]: " + e.what());
    }
  }

  const bool certificate = g.Q.size() > 0 && g.Gamma.rows() == plant.nq() && g.lambdas.size() == ic.filters.size();
  json list = json::array();
  bool diverged = false;
  for (size_t i = 0; i < scs.size(); ++i) {
    const SimTrace tr = simulate(model, scs[i]);
    json s;
    s["name"] = scs[i].name;
    s["samples"] = tr.samples();
    s["diverged"] = tr.diverged;
    if (tr.diverged) s["message"] = tr.message;
    diverged = diverged || tr.diverged;
    try {
      s["empirical_l2_gain"] = empirical_l2_gain(tr);
    } catch (const std::invalid_argument&) {
      s["empirical_l2_gain"] = nullptr;  // no disturbance energy
    }
    s["certified_gamma"] = g.gamma;
    s["peak_u"] = tr.u.size() ? tr.u.cwiseAbs().maxCoeff() : 0.0;
    bool sat = false;
    for (int r = 0; r < tr.u.rows(); ++r)
      for (int k = 0; k < tr.u.cols(); ++k) sat = sat || std::abs(tr.u(r, k)) > plant.u_bar(k);
    s["saturation_active"] = sat;
    s["settling_time"] = settling_time(tr);
    s["final_state_norm"] = tr.samples() ? tr.x_p().row(tr.samples() - 1).norm() : 0.0;
    if (certificate && !tr.diverged) {
      const DissipationReport d = check_dissipation(tr, model, g);
      s["dissipation_worst_relative"] = d.worst_relative;
      s["dissipation_ok"] = d.ok();
    }
    list.push_back(s);
    const std::string path = trace_path(a.out, scs[i].name, scs.size());
    if (!path.empty()) {
      std::ofstream f(path);
      if (!f) throw ConfigError("--out: cannot write " + path);
      write_csv(f, tr);
    }
    std::cerr << scs[i].name << ": "
              << (s["empirical_l2_gain"].is_null() ? std::string("gain undefined (zero disturbance)")
                                                   : "empirical gain " + fmt(s["empirical_l2_gain"].get<double>()))
              << ", gamma " << fmt(g.gamma) << (tr.diverged ? ", DIVERGED" : "") << (sat ? ", saturated" : "") << "\n";
  }
  json res;
  res["poles"] = to_json(eigenvalues(model.cl.A));
  res["scenarios"] = list;
  json doc;
  doc["result"] = res;
  doc["metadata"] = metadata("simulate", a, tm.seconds());
  std::cout << doc.dump(2) << "\n";
  return diverged ? Exit::infeasible : Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"satiqc: IQC-based state-feedback synthesis for saturated uncertain systems"};
  app.require_subcommand(1);
  Args a;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", a.config, "problem configuration (JSON)")->required();
    s->add_option("--out", a.out, "output file (stdout when omitted)");
    s->add_option("--feas-tol", a.feas_tol, "solver feasibility tolerance");
    s->add_option("--gap", a.gap, "solver relative gap tolerance");
    s->add_flag("-v,--verbose", a.verbose, "solver progress on stderr");
  };
  auto* f = app.add_subcommand("factorize", "J-spectral factorization of a multiplier");
  common(f);
  f->add_option("--multiplier", a.multiplier, "popov | zames_falb | sector (overrides the config)");
  auto* s = app.add_subcommand("synth", "controller synthesis");
  common(s);
  auto* an = app.add_subcommand("analyze", "analysis LMI for fixed gains");
  common(an);
  an->add_option("--result", a.result, "result JSON from synth (synthesizes when omitted)");
  auto* sw = app.add_subcommand("sweep", "alpha sweep over IQC strategies (CSV)");
  common(sw);
  sw->add_option("--jobs", a.jobs, "concurrent sweep cells")->check(CLI::PositiveNumber);
  auto* sim = app.add_subcommand("simulate", "closed-loop simulation");
  common(sim);
  sim->add_option("--result", a.result, "result JSON from synth (synthesizes when omitted)");
  sim->add_option("--seed", a.seed, "seed for --random scenarios");
  sim->add_option("--random", a.random, "add N random admissible scenarios")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : Exit::invalid;
  }
  try {
    if (*f) return cmd_factorize(a);
    if (*s) return cmd_synth(a);
    if (*an) return cmd_analyze(a);
    if (*sw) return cmd_sweep(a);
    return cmd_simulate(a);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::invalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::numerical;
  }
}
