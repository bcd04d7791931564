#include "satiqc/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace satiqc {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& child(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (!j.contains(key)) fail(join(path, key), "missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  return number(j.at(key), join(path, key));
}

int count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Mat sized_matrix(const json& obj, const std::string& key, const std::string& path, int r, int c) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) {
    if (r == 0 || c == 0) return Mat(r, c);
    fail(p, "missing (expected " + std::to_string(r) + "x" + std::to_string(c) + ")");
  }
  const Mat M = matrix_from_json(obj.at(key), p);
  const bool empty_ok = (r == 0 || c == 0) && M.size() == 0;
  if (!empty_ok && (M.rows() != r || M.cols() != c))
    fail(p, "expected " + std::to_string(r) + "x" + std::to_string(c) + ", got " + std::to_string(M.rows()) + "x" +
                std::to_string(M.cols()));
  return empty_ok ? Mat(r, c) : M;
}

StateSpace parse_ss(const json& j, const std::string& path) {
  const Mat A = matrix_from_json(child(j, "A", path), join(path, "A"));
  const Mat B = matrix_from_json(child(j, "B", path), join(path, "B"));
  const Mat C = matrix_from_json(child(j, "C", path), join(path, "C"));
  const Mat D = matrix_from_json(child(j, "D", path), join(path, "D"));
  try {
    return StateSpace(A, B, C, D);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

IqcKind nonlin_kind(const std::string& s, const std::string& path) {
  IqcKind k;
  try {
    k = iqc_kind_from_string(s);
  } catch (const std::exception&) {
    fail(path, "unknown IQC '" + s + "'");
  }
  if (k != IqcKind::popov && k != IqcKind::zames_falb && k != IqcKind::sector)
    fail(path, "expected popov, zames_falb or sector");
  return k;
}

IqcSpec parse_iqc(const json& j, const std::string& path) {
  IqcSpec s;
  if (j.is_string()) {
    s.kind = nonlin_kind(j.get<std::string>(), path);
    return s;
  }
  s.kind = nonlin_kind(text(child(j, "kind", path), join(path, "kind")), join(path, "kind"));
  s.eps = number_or(j, "eps", path, s.eps);
  if (!(s.eps > 0)) fail(join(path, "eps"), "must be positive");
  if (j.contains("h")) {
    if (s.kind != IqcKind::zames_falb) fail(join(path, "h"), "only zames_falb takes a filter");
    s.h = parse_ss(j.at("h"), join(path, "h"));
  }
  return s;
}

SaturatedLFTPlant parse_plant(const json& root) {
  const json& pj = child(root, "plant", "");
  const std::string P = "plant";
  const json& dims = child(pj, "dims", P);
  const std::string D = "plant.dims";
  const int nx = count(child(dims, "nx", D), D + ".nx"), nu = count(child(dims, "nu", D), D + ".nu");
  const int nq = dims.contains("nq") ? count(dims.at("nq"), D + ".nq") : 0;
  const int nd = count(child(dims, "nd", D), D + ".nd"), ne = count(child(dims, "ne", D), D + ".ne");
  if (nx == 0) fail(D + ".nx", "must be positive");
  if (nu == 0) fail(D + ".nu", "must be positive");
  SaturatedLFTPlant p;
  p.A = sized_matrix(pj, "A", P, nx, nx);
  p.B0 = sized_matrix(pj, "B0", P, nx, nu);
  p.B1 = sized_matrix(pj, "B1", P, nx, nq);
  p.B2 = sized_matrix(pj, "B2", P, nx, nd);
  p.C0 = sized_matrix(pj, "C0", P, nq, nx);
  p.D00 = sized_matrix(pj, "D00", P, nq, nu);
  p.D01 = sized_matrix(pj, "D01", P, nq, nq);
  p.D02 = sized_matrix(pj, "D02", P, nq, nd);
  p.C1 = sized_matrix(pj, "C1", P, ne, nx);
  p.D10 = sized_matrix(pj, "D10", P, ne, nu);
  p.D11 = sized_matrix(pj, "D11", P, ne, nq);
  p.D12 = sized_matrix(pj, "D12", P, ne, nd);

  if (root.contains("uncertainty")) {
    const json& u = root.at("uncertainty");
    const std::string U = "uncertainty";
    if (u.contains("scalar_blocks"))
      for (double v : numbers(u.at("scalar_blocks"), U + ".scalar_blocks")) {
        if (v < 1 || v != std::floor(v)) fail(U + ".scalar_blocks", "entries must be positive integers");
        p.structure.scalar_blocks.push_back(static_cast<int>(v));
      }
    if (u.contains("full_blocks"))
      for (double v : numbers(u.at("full_blocks"), U + ".full_blocks")) {
        if (v < 1 || v != std::floor(v)) fail(U + ".full_blocks", "entries must be positive integers");
        p.structure.full_blocks.push_back(static_cast<int>(v));
      }
    p.structure.bound = number_or(u, "bound", U, 1.0);
    if (!(p.structure.bound > 0)) fail(U + ".bound", "must be positive");
  }
  if (p.structure.nq() != nq)
    fail("uncertainty", "block sizes sum to " + std::to_string(p.structure.nq()) + " but plant.dims.nq is " +
                            std::to_string(nq));

  const json& ub = child(root, "u_bar", "");
  if (ub.is_number()) {
    p.u_bar = Vec::Constant(nu, ub.get<double>());
  } else {
    const auto v = numbers(ub, "u_bar");
    if (static_cast<int>(v.size()) != nu) fail("u_bar", "expected " + std::to_string(nu) + " entries");
    p.u_bar = Eigen::Map<const Vec>(v.data(), nu);
  }
  for (int i = 0; i < nu; ++i)
    if (!(p.u_bar(i) > 0)) fail("u_bar", "entries must be positive");
  p.alpha = number(child(root, "alpha", ""), "alpha");
  if (!(p.alpha > 0)) fail("alpha", "must be positive");
  try {
    p.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail("plant", e.what());
  }
  return p;
}

Signal parse_signal(const json& j, const std::string& path) {
  Signal s;
  const std::string kind = text(child(j, "kind", path), join(path, "kind"));
  if (kind == "zero") s.kind = Signal::Kind::zero;
  else if (kind == "sinusoid") s.kind = Signal::Kind::sinusoid;
  else if (kind == "step") s.kind = Signal::Kind::step;
  else if (kind == "samples") s.kind = Signal::Kind::samples;
  else fail(join(path, "kind"), "expected zero, sinusoid, step or samples");
  s.amplitude = number_or(j, "amplitude", path, 0.0);
  s.frequency = number_or(j, "frequency", path, 0.0);
  s.phase = number_or(j, "phase", path, 0.0);
  s.t_on = number_or(j, "t_on", path, 0.0);
  s.t_off = number_or(j, "t_off", path, std::numeric_limits<double>::infinity());
  if (s.t_off < s.t_on) fail(join(path, "t_off"), "must not precede t_on");
  if (j.contains("direction")) {
    const auto v = numbers(j.at("direction"), join(path, "direction"));
    s.direction = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (s.kind == Signal::Kind::samples) {
    s.times = numbers(child(j, "times", path), join(path, "times"));
    s.values = numbers(child(j, "values", path), join(path, "values"));
    if (s.times.size() != s.values.size() || s.times.empty())
      fail(join(path, "values"), "times and values must be nonempty and of equal length");
    for (size_t i = 1; i < s.times.size(); ++i)
      if (!(s.times[i] > s.times[i - 1])) fail(join(path, "times"), "must be strictly increasing");
  }
  return s;
}

UncertaintySignal parse_delta(const json& j, const std::string& path, const UncertaintyStructure& st) {
  UncertaintySignal u;
  const std::string kind = text(child(j, "kind", path), join(path, "kind"));
  if (kind == "zero") u.kind = UncertaintySignal::Kind::zero;
  else if (kind == "constant") u.kind = UncertaintySignal::Kind::constant;
  else if (kind == "sinusoid") u.kind = UncertaintySignal::Kind::sinusoid;
  else fail(join(path, "kind"), "expected zero, constant or sinusoid");
  if (u.kind == UncertaintySignal::Kind::zero) return u;
  const size_t nb = static_cast<size_t>(st.num_blocks());
  u.value = numbers(child(j, "value", path), join(path, "value"));
  if (u.value.size() != nb) fail(join(path, "value"), "expected one entry per uncertainty block");
  if (j.contains("frequency")) u.frequency = numbers(j.at("frequency"), join(path, "frequency"));
  if (j.contains("phase")) u.phase = numbers(j.at("phase"), join(path, "phase"));
  for (double v : u.value)
    if (std::abs(v) > st.bound) fail(join(path, "value"), "magnitude exceeds the uncertainty bound");
  return u;
}

Scenario parse_scenario(const json& j, const std::string& path, const SaturatedLFTPlant* plant) {
  Scenario s;
  if (j.contains("name")) s.name = text(j.at("name"), join(path, "name"));
  s.duration = number_or(j, "duration", path, s.duration);
  s.step = number_or(j, "step", path, s.step);
  if (!(s.step > 0)) fail(join(path, "step"), "must be positive");
  if (!(s.duration > s.step)) fail(join(path, "duration"), "must exceed step");
  if (j.contains("disturbance")) s.disturbance = parse_signal(j.at("disturbance"), join(path, "disturbance"));
  if (plant) {
    if (s.disturbance.direction.size() > 0 && s.disturbance.direction.size() != plant->nd())
      fail(join(path, "disturbance.direction"), "expected n_d entries");
    if (j.contains("uncertainty")) s.uncertainty = parse_delta(j.at("uncertainty"), join(path, "uncertainty"), plant->structure);
    if (j.contains("x0")) {
      const auto v = numbers(j.at("x0"), join(path, "x0"));
      if (static_cast<int>(v.size()) != plant->nx()) fail(join(path, "x0"), "expected n_x entries");
      s.x0 = Eigen::Map<const Vec>(v.data(), plant->nx());
    }
  }
  return s;
}

}  // namespace

Mat matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected a nested array");
  const int r = static_cast<int>(j.size());
  if (r == 0) return Mat(0, 0);
  if (!j[0].is_array()) fail(field, "expected a nested array");
  const int c = static_cast<int>(j[0].size());
  Mat M(r, c);
  for (int i = 0; i < r; ++i) {
    const std::string rp = field + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) fail(rp, "rows must all have " + std::to_string(c) + " entries");
    for (int k = 0; k < c; ++k) M(i, k) = number(j[i][k], rp + "[" + std::to_string(k) + "]");
  }
  return M;
}

ProblemConfig parse_config(const json& j) {
  if (!j.is_object()) fail("<root>", "expected an object");
  ProblemConfig c;
  if (j.contains("name")) c.name = text(j.at("name"), "name");
  if (j.contains("method")) {
    c.method = text(j.at("method"), "method");
    if (c.method != "iqc" && c.method != "antiwindup") fail("method", "expected iqc or antiwindup");
  }
  if (j.contains("plant")) c.plant = parse_plant(j);
  if (j.contains("iqcs")) {
    const json& a = j.at("iqcs");
    if (!a.is_array() || a.empty()) fail("iqcs", "expected a nonempty array");
    for (size_t i = 0; i < a.size(); ++i) c.iqcs.push_back(parse_iqc(a[i], "iqcs[" + std::to_string(i) + "]"));
  }
  if (j.contains("synthesis")) {
    const json& s = j.at("synthesis");
    c.synthesis.q_max = number_or(s, "q_max", "synthesis", c.synthesis.q_max);
    c.synthesis.strict_margin = number_or(s, "strict_margin", "synthesis", c.synthesis.strict_margin);
    if (!(c.synthesis.strict_margin >= 0)) fail("synthesis.strict_margin", "must be nonnegative");
    if (s.contains("gamma_max")) c.synthesis.gamma_max = number(s.at("gamma_max"), "synthesis.gamma_max");
  }
  if (j.contains("pole_region")) {
    const json& p = j.at("pole_region");
    PoleRegion r;
    r.rho = number(child(p, "rho", "pole_region"), "pole_region.rho");
    r.theta = number_or(p, "theta", "pole_region", std::numbers::pi / 2);
    if (!(r.rho > 0)) fail("pole_region.rho", "must be positive");
    if (!(r.theta > 0 && r.theta <= std::numbers::pi / 2)) fail("pole_region.theta", "must lie in (0, pi/2]");
    c.synthesis.pole_region = r;
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    c.solver.feas_tol = number_or(s, "feas_tol", "solver", c.solver.feas_tol);
    c.solver.gap_tol = number_or(s, "gap", "solver", c.solver.gap_tol);
    if (s.contains("max_iter")) c.solver.max_iter = count(s.at("max_iter"), "solver.max_iter");
    if (s.contains("parallel")) {
      if (!s.at("parallel").is_boolean()) fail("solver.parallel", "expected a boolean");
      c.solver.parallel = s.at("parallel").get<bool>();
    }
    c.factor.eps_reg = number_or(s, "eps_reg", "solver", c.factor.eps_reg);
  }
  if (j.contains("factorize")) {
    const json& f = j.at("factorize");
    FactorizeSpec fs;
    const std::string kind = text(child(f, "multiplier", "factorize"), "factorize.multiplier");
    fs.kind = nonlin_kind(kind, "factorize.multiplier");
    fs.alpha = number_or(f, "alpha", "factorize", fs.alpha);
    fs.eps = number_or(f, "eps", "factorize", fs.eps);
    if (!(fs.alpha > 0)) fail("factorize.alpha", "must be positive");
    if (!(fs.eps > 0)) fail("factorize.eps", "must be positive");
    if (f.contains("h")) fs.h = parse_ss(f.at("h"), "factorize.h");
    c.factorize = fs;
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSpec sw;
    if (s.contains("parameter") && text(s.at("parameter"), "sweep.parameter") != "alpha")
      fail("sweep.parameter", "only alpha is supported");
    sw.values = numbers(child(s, "values", "sweep"), "sweep.values");
    if (sw.values.empty()) fail("sweep.values", "must be nonempty");
    for (double v : sw.values)
      if (!(v > 0)) fail("sweep.values", "alpha values must be positive");
    if (s.contains("strategies")) {
      sw.strategies.clear();
      const json& a = s.at("strategies");
      if (!a.is_array() || a.empty()) fail("sweep.strategies", "expected a nonempty array");
      for (size_t i = 0; i < a.size(); ++i) {
        const std::string p = "sweep.strategies[" + std::to_string(i) + "]";
        try {
          sw.strategies.push_back(strategy_from_string(text(a[i], p)));
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          fail(p, e.what());
        }
      }
    }
    c.sweep = sw;
  }
  if (j.contains("scenarios")) {
    const json& a = j.at("scenarios");
    if (!a.is_array()) fail("scenarios", "expected an array");
    for (size_t i = 0; i < a.size(); ++i)
      c.scenarios.push_back(parse_scenario(a[i], "scenarios[" + std::to_string(i) + "]", c.plant ? &*c.plant : nullptr));
  }
  if (c.plant && c.iqcs.empty() && c.method == "iqc") c.iqcs = strategy_iqcs(Strategy::mixed);
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const Mat& M) {
  json a = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (int k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
    a.push_back(r);
  }
  return a;
}

json to_json(const CVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

json to_json(const StateSpace& g) {
  json j;
  j["A"] = to_json(g.A);
  j["B"] = to_json(g.B);
  j["C"] = to_json(g.C);
  j["D"] = to_json(g.D);
  return j;
}

json synthesis_result_json(const SynthesisResult& r, double round_trip) {
  json j;
  j["status"] = to_string(r.diag.status);
  j["gamma"] = r.gamma;
  j["F_c"] = to_json(r.F);
  j["H_c"] = to_json(r.H);
  j["lambdas"] = r.lambdas;
  j["Gamma"] = to_json(r.Gamma);
  j["lambda_hat"] = r.lambda_hat;
  j["Q"] = to_json(r.Q);
  j["poles"] = to_json(r.poles);
  json d;
  d["message"] = r.diag.message;
  d["iterations"] = r.diag.iterations;
  d["primal_infeasibility"] = r.diag.primal_infeas;
  d["dual_infeasibility"] = r.diag.dual_infeas;
  d["relative_gap"] = r.diag.rel_gap;
  json m = json::object();
  for (auto& [name, v] : r.diag.margins) m[name] = v;
  d["margins"] = m;
  d["relaxation_gap"] = r.diag.relaxation_gap;
  d["round_trip_margin"] = round_trip;
  j["diagnostics"] = d;
  return j;
}

json antiwindup_result_json(const AntiWindupResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["gamma"] = r.gamma;
  j["F_c"] = to_json(r.F);
  j["H_c"] = to_json(r.H);
  j["Gamma"] = to_json(r.Gamma);
  j["Q"] = to_json(r.Q);
  j["diagnostics"] = {{"message", r.message}};
  return j;
}

SynthesisResult synthesis_result_from_json(const json& j) {
  const json& r = j.contains("result") ? j.at("result") : j;
  SynthesisResult s;
  s.F = matrix_from_json(child(r, "F_c", "result"), "result.F_c");
  s.H = matrix_from_json(child(r, "H_c", "result"), "result.H_c");
  s.gamma = number(child(r, "gamma", "result"), "result.gamma");
  if (!(s.gamma > 0)) fail("result.gamma", "must be positive");
  if (r.contains("Q")) s.Q = matrix_from_json(r.at("Q"), "result.Q");
  if (r.contains("Gamma")) s.Gamma = matrix_from_json(r.at("Gamma"), "result.Gamma");
  if (r.contains("lambdas")) s.lambdas = numbers(r.at("lambdas"), "result.lambdas");
  s.diag.status = SdpStatus::optimal;
  return s;
}

}  // namespace satiqc
