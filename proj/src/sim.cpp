#include "satiqc/sim.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace satiqc {

double Signal::scalar(double t) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::sinusoid:
      return (t >= t_on && t <= t_off) ? amplitude * std::sin(frequency * t + phase) : 0.0;
    case Kind::step: return (t >= t_on && t <= t_off) ? amplitude : 0.0;
    case Kind::samples: {
      if (times.empty()) return 0.0;
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      auto it = std::upper_bound(times.begin(), times.end(), t);
      const size_t i = static_cast<size_t>(it - times.begin());
      const double a = (t - times[i - 1]) / (times[i] - times[i - 1]);
      return (1 - a) * values[i - 1] + a * values[i];
    }
  }
  return 0.0;
}

Vec Signal::eval(double t, int n) const {
  const double s = scalar(t);
  if (direction.size() == 0) return Vec::Constant(n, s);
  if (direction.size() != n) throw std::invalid_argument("disturbance direction must have n_d entries");
  return s * direction;
}

Mat UncertaintySignal::eval(double t, const UncertaintyStructure& s) const {
  const int nq = s.nq();
  Mat D = Mat::Zero(nq, nq);
  if (kind == Kind::zero) return D;
  for (int k = 0; k < s.num_blocks(); ++k) {
    double v = k < static_cast<int>(value.size()) ? value[k] : 0.0;
    if (kind == Kind::sinusoid) {
      const double f = k < static_cast<int>(frequency.size()) ? frequency[k] : 1.0;
      const double ph = k < static_cast<int>(phase.size()) ? phase[k] : 0.0;
      v *= std::sin(f * t + ph);
    }
    const int o = s.block_offset(k), sz = s.block_size(k);
    if (s.block_is_scalar(k)) {
      D.block(o, o, sz, sz) = v * Mat::Identity(sz, sz);
    } else {
      const int j = k - static_cast<int>(s.scalar_blocks.size());
      const Mat U = j < static_cast<int>(full_dirs.size()) ? full_dirs[j] : Mat(Mat::Identity(sz, sz));
      if (U.rows() != sz || U.cols() != sz) throw std::invalid_argument("uncertainty direction has wrong size");
      D.block(o, o, sz, sz) = v * U;
    }
  }
  return D;
}

void Scenario::validate(const UncertaintyStructure& s) const {
  if (!(step > 0)) throw std::invalid_argument("scenario step must be positive");
  if (!(duration > step)) throw std::invalid_argument("scenario duration must exceed the step");
  if (disturbance.kind == Signal::Kind::samples &&
      (disturbance.times.size() != disturbance.values.size() || disturbance.times.empty()))
    throw std::invalid_argument("disturbance samples: times and values must be nonempty and equal length");
  if (uncertainty.kind == UncertaintySignal::Kind::zero || s.nq() == 0) return;
  const long n = static_cast<long>(std::ceil(duration / step));
  const double lim = s.bound * (1 + 1e-12);
  for (long i = 0; i <= n; ++i) {
    const Mat D = uncertainty.eval(i * step, s);
    const double nrm = D.size() ? Eigen::JacobiSVD<Mat>(D).singularValues()(0) : 0.0;
    if (nrm > lim)
      throw std::invalid_argument("uncertainty realization exceeds the bound b at t = " + std::to_string(i * step));
  }
}

SimModel make_sim_model(const SaturatedLFTPlant& plant, const Interconnection& ic, const Mat& F, const Mat& H) {
  SimModel m;
  const AugmentedPlant aug = loop_transform(plant);
  m.cl = close_loop(ic, F, H);
  m.Cq = hcat({aug.Cq, Mat::Zero(aug.nq(), ic.npsi)});
  m.Dqp = aug.Dqp;
  m.Dqw = aug.Dqw;
  m.Dqd = aug.Dqd;
  m.structure = plant.structure;
  m.u_bar = plant.u_bar;
  m.nx = plant.nx();
  m.nu = plant.nu();
  return m;
}

namespace {

struct Point {
  Vec xdot, u, w, p, q, e, d, zd, zn;
};

Point evaluate(const SimModel& m, const Scenario& sc, double t, const Vec& x) {
  const ClosedLoop& cl = m.cl;
  Point r;
  const int nq = static_cast<int>(cl.B0.cols()), nd = static_cast<int>(cl.B2.cols());
  r.u = x.segment(m.nx, m.nu);
  r.w = deadzone(r.u, m.u_bar);
  r.d = sc.disturbance.eval(t, nd);
  const Vec q0 = m.Cq * x + m.Dqw * r.w + m.Dqd * r.d;
  if (nq > 0) {
    const Mat D = sc.uncertainty.eval(t, m.structure);
    r.p = (Mat::Identity(nq, nq) - D * m.Dqp).partialPivLu().solve(D * q0);
  } else {
    r.p = Vec::Zero(0);
  }
  r.q = q0 + m.Dqp * r.p;
  r.xdot = cl.A * x + cl.B0 * r.p + cl.B1 * r.w + cl.B2 * r.d;
  r.e = cl.C2 * x + cl.D20 * r.p + cl.D21 * r.w + cl.D22 * r.d;
  int nz = 0, nn = 0;
  for (auto& c : cl.C_d1) nz += static_cast<int>(c.rows());
  for (auto& c : cl.C_n1) nn += static_cast<int>(c.rows());
  r.zd.resize(nz);
  for (size_t k = 0, o = 0; k < cl.C_d1.size(); ++k) {
    const Vec z = cl.C_d1[k] * x + cl.D_d10[k] * r.p + cl.D_d11[k] * r.w + cl.D_d12[k] * r.d;
    r.zd.segment(o, z.size()) = z;
    o += z.size();
  }
  r.zn.resize(nn);
  for (size_t l = 0, o = 0; l < cl.C_n1.size(); ++l) {
    const Vec z = cl.C_n1[l] * x + cl.D_n10[l] * r.p + cl.D_n11[l] * r.w + cl.D_n12[l] * r.d;
    r.zn.segment(o, z.size()) = z;
    o += z.size();
  }
  return r;
}

void record(SimTrace& tr, int i, double t, const Vec& x, const Point& pt, const Vec& u_bar) {
  tr.t(i) = t;
  tr.x_cl.row(i) = x.transpose();
  tr.xdot_cl.row(i) = pt.xdot.transpose();
  tr.u.row(i) = pt.u.transpose();
  tr.sat_u.row(i) = saturate(pt.u, u_bar).transpose();
  tr.w.row(i) = pt.w.transpose();
  tr.p.row(i) = pt.p.transpose();
  tr.q.row(i) = pt.q.transpose();
  tr.e.row(i) = pt.e.transpose();
  tr.d.row(i) = pt.d.transpose();
  tr.z_delta.row(i) = pt.zd.transpose();
  tr.z_n.row(i) = pt.zn.transpose();
}

void truncate(SimTrace& tr, int n) {
  auto cut = [n](Mat& M) { M.conservativeResize(n, M.cols()); };
  tr.t.conservativeResize(n);
  for (Mat* M : {&tr.x_cl, &tr.xdot_cl, &tr.u, &tr.sat_u, &tr.w, &tr.p, &tr.q, &tr.e, &tr.d, &tr.z_delta, &tr.z_n})
    cut(*M);
}

}  // namespace

SimTrace simulate(const SimModel& m, const Scenario& sc) {
  sc.validate(m.structure);
  const ClosedLoop& cl = m.cl;
  const int n = cl.n();
  Vec x = Vec::Zero(n);
  if (sc.x0.size() > 0) {
    if (sc.x0.size() != m.nx) throw std::invalid_argument("scenario x0 must have n_x entries");
    x.head(m.nx) = sc.x0;
  }
  const int steps = static_cast<int>(std::llround(sc.duration / sc.step));
  const double h = sc.step;
  const Point p0 = evaluate(m, sc, 0.0, x);
  SimTrace tr;
  tr.nx = m.nx;
  tr.nu = m.nu;
  tr.npsi = cl.npsi;
  const int N = steps + 1;
  tr.t.resize(N);
  tr.x_cl.resize(N, n);
  tr.xdot_cl.resize(N, n);
  tr.u.resize(N, m.nu);
  tr.sat_u.resize(N, m.nu);
  tr.w.resize(N, m.nu);
  tr.p.resize(N, p0.p.size());
  tr.q.resize(N, p0.q.size());
  tr.e.resize(N, p0.e.size());
  tr.d.resize(N, p0.d.size());
  tr.z_delta.resize(N, p0.zd.size());
  tr.z_n.resize(N, p0.zn.size());
  record(tr, 0, 0.0, x, p0, m.u_bar);
  Vec k1 = p0.xdot;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Vec k2 = evaluate(m, sc, t + h / 2, x + h / 2 * k1).xdot;
    const Vec k3 = evaluate(m, sc, t + h / 2, x + h / 2 * k2).xdot;
    const Vec k4 = evaluate(m, sc, t + h, x + h * k3).xdot;
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    const double tn = (i + 1) * h;
    const Point pt = evaluate(m, sc, tn, x);
    record(tr, i + 1, tn, x, pt, m.u_bar);
    if (!x.allFinite() || x.norm() > 1e9) {
      tr.diverged = true;
      tr.message = "state norm exceeded 1e9 at t = " + std::to_string(tn);
      truncate(tr, i + 2);
      return tr;
    }
    k1 = pt.xdot;
  }
  return tr;
}

std::vector<SimTrace> simulate_batch(const SimModel& m, const std::vector<Scenario>& scs) {
  std::vector<SimTrace> out(scs.size());
  std::vector<std::string> err(scs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(scs.size()); ++i) {
    try {
      out[i] = simulate(m, scs[i]);
    } catch (const std::exception& e) {
      err[i] = e.what();
    }
  }
  for (auto& e : err)
    if (!e.empty()) throw std::invalid_argument(e);
  return out;
}

std::vector<SimTrace> simulate_batch_serial(const SimModel& m, const std::vector<Scenario>& scs) {
  std::vector<SimTrace> out;
  out.reserve(scs.size());
  for (auto& s : scs) out.push_back(simulate(m, s));
  return out;
}

namespace {

double energy(const Vec& t, const Mat& s) {
  double acc = 0.0;
  for (int i = 1; i < t.size(); ++i)
    acc += 0.5 * (t(i) - t(i - 1)) * (s.row(i).squaredNorm() + s.row(i - 1).squaredNorm());
  return acc;
}

}  // namespace

double empirical_l2_gain(const SimTrace& tr) {
  const double ed = energy(tr.t, tr.d);
  if (!(ed > 0)) throw std::invalid_argument("disturbance has zero energy");
  return std::sqrt(energy(tr.t, tr.e) / ed);
}

DissipationReport check_dissipation(const SimTrace& tr, const SimModel& m, const SynthesisResult& res) {
  const ClosedLoop& cl = m.cl;
  if (tr.z_n.cols() != static_cast<int>(cl.C_n1.size()) * m.nu)
    throw std::invalid_argument("trace is missing nonlinearity filter channels");
  if (res.lambdas.size() != cl.C_n1.size()) throw std::invalid_argument("result does not match the filters");
  Mat P = res.Q.inverse();
  P = 0.5 * (P + P.transpose());
  const auto& st = m.structure;
  DissipationReport rep;
  rep.worst_relative = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < tr.samples(); ++i) {
    const Vec x = tr.x_cl.row(i).transpose(), xd = tr.xdot_cl.row(i).transpose();
    const double vdot = 2.0 * x.dot(P * xd);
    double s_delta = 0.0, mag = std::abs(vdot);
    for (int k = 0; k < st.num_blocks(); ++k) {
      const int o = st.block_offset(k), sz = st.block_size(k);
      const Mat Xk = res.Gamma.block(o, o, sz, sz);
      const Vec z1 = tr.z_delta.row(i).segment(o, sz).transpose();
      const Vec pk = tr.p.row(i).segment(o, sz).transpose();
      const double a = z1.dot(Xk * z1), b = pk.dot(Xk * pk);
      s_delta += a - b;
      mag += std::abs(a) + std::abs(b);
    }
    double s_n = 0.0;
    const Vec w = tr.w.row(i).transpose();
    for (size_t l = 0; l < res.lambdas.size(); ++l) {
      const Vec z1 = tr.z_n.row(i).segment(l * m.nu, m.nu).transpose();
      const double a = res.lambdas[l] * z1.squaredNorm(), b = res.lambdas[l] * w.squaredNorm();
      s_n += a - b;
      mag += a + b;
    }
    const double dd = res.gamma * tr.d.row(i).squaredNorm(), ee = tr.e.row(i).squaredNorm() / res.gamma;
    mag += dd + ee;
    const double margin = vdot + s_delta + s_n - (dd - ee);
    rep.margin.push_back(margin);
    rep.scale.push_back(mag);
    rep.worst_relative = std::max(rep.worst_relative, margin / (1.0 + mag));
  }
  if (rep.margin.empty()) rep.worst_relative = 0.0;
  return rep;
}

Scenario random_scenario(std::mt19937_64& rng, const UncertaintyStructure& s, int nd, double duration, double step) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Scenario sc;
  sc.duration = duration;
  sc.step = step;
  Signal& d = sc.disturbance;
  d.kind = U(rng) < 0.8 ? Signal::Kind::sinusoid : Signal::Kind::step;
  d.amplitude = 0.1 + 0.9 * U(rng);
  d.frequency = 0.1 + 4.9 * U(rng);
  d.phase = 2 * std::numbers::pi * U(rng);
  d.t_on = 0.3 * duration * U(rng);
  d.t_off = d.t_on + (0.15 + 0.35 * U(rng)) * duration;
  d.direction = Vec::Zero(nd);
  for (int j = 0; j < nd; ++j) d.direction(j) = 2 * U(rng) - 1;
  if (nd > 0 && d.direction.norm() > 0) d.direction /= d.direction.norm();
  UncertaintySignal& u = sc.uncertainty;
  if (s.num_blocks() > 0) {
    u.kind = U(rng) < 0.5 ? UncertaintySignal::Kind::constant : UncertaintySignal::Kind::sinusoid;
    for (int k = 0; k < s.num_blocks(); ++k) {
      u.value.push_back(u.kind == UncertaintySignal::Kind::constant ? s.bound * (2 * U(rng) - 1) : s.bound * U(rng));
      u.frequency.push_back(0.1 + 4.9 * U(rng));
      u.phase.push_back(2 * std::numbers::pi * U(rng));
    }
    for (size_t j = 0; j < s.full_blocks.size(); ++j) {
      const int r = s.full_blocks[j];
      Mat G(r, r);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) G(a, b) = 2 * U(rng) - 1;
      u.full_dirs.push_back(G / Eigen::JacobiSVD<Mat>(G).singularValues()(0));
    }
  }
  return sc;
}

void write_csv(std::ostream& os, const SimTrace& tr) {
  std::vector<std::pair<std::string, const Mat*>> cols;
  const Mat xp = tr.x_p();
  const Mat psi = tr.x_cl.rightCols(tr.npsi);
  cols.push_back({"x", &xp});
  cols.push_back({"u", &tr.u});
  cols.push_back({"sat_u", &tr.sat_u});
  cols.push_back({"w", &tr.w});
  cols.push_back({"p", &tr.p});
  cols.push_back({"q", &tr.q});
  cols.push_back({"e", &tr.e});
  cols.push_back({"d", &tr.d});
  cols.push_back({"psi", &psi});
  cols.push_back({"z_delta", &tr.z_delta});
  cols.push_back({"z_n", &tr.z_n});
  os << "t";
  for (auto& [name, M] : cols)
    for (int j = 0; j < M->cols(); ++j) os << ',' << name << j + 1;
  os << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < tr.samples(); ++i) {
    os << tr.t(i);
    for (auto& [name, M] : cols)
      for (int j = 0; j < M->cols(); ++j) os << ',' << (*M)(i, j);
    os << '\n';
  }
}

}  // namespace satiqc
