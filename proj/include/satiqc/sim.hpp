#pragma once

#include "satiqc/lft.hpp"
#include "satiqc/synthesis.hpp"

#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace satiqc {

// Scalar time profile times a fixed channel direction.
struct Signal {
  enum class Kind { zero, sinusoid, step, samples };
  Kind kind = Kind::zero;
  double amplitude = 0.0;
  double frequency = 0.0;  // rad/s
  double phase = 0.0;
  double t_on = 0.0;
  double t_off = std::numeric_limits<double>::infinity();
  std::vector<double> times, values;  // samples, linearly interpolated
  Vec direction;                      // empty means all ones

  double scalar(double t) const;
  Vec eval(double t, int n) const;
};

// Delta(t) = diag(delta_k(t) I) over scalar blocks, delta_k(t) U_k over full blocks.
struct UncertaintySignal {
  enum class Kind { zero, constant, sinusoid };
  Kind kind = Kind::zero;
  std::vector<double> value;       // per block (constant), or amplitude (sinusoid)
  std::vector<double> frequency;   // per block, rad/s
  std::vector<double> phase;
  std::vector<Mat> full_dirs;      // per full block, ||U_k|| <= 1; identity when empty

  Mat eval(double t, const UncertaintyStructure& s) const;
};

struct Scenario {
  std::string name;
  double duration = 30.0;
  double step = 1e-3;
  Signal disturbance;
  UncertaintySignal uncertainty;
  Vec x0;  // plant state; empty means zero

  // Throws std::invalid_argument; samples Delta on the step grid.
  void validate(const UncertaintyStructure& s) const;
};

// Closed loop plus the raw uncertainty channel needed to close p = Delta q.
struct SimModel {
  ClosedLoop cl;
  Mat Cq, Dqp, Dqw, Dqd;  // q over (x_cl, p, w, d)
  UncertaintyStructure structure;
  Vec u_bar;
  int nx = 0, nu = 0;
};

SimModel make_sim_model(const SaturatedLFTPlant& plant, const Interconnection& ic, const Mat& F, const Mat& H);

struct SimTrace {
  Vec t;
  Mat x_cl, xdot_cl;           // rows are samples
  Mat u, sat_u, w, p, q, e, d;
  Mat z_delta;                 // z_D1 per block, stacked
  Mat z_n;                     // z_N1 per filter, stacked
  int nx = 0, nu = 0, npsi = 0;
  bool diverged = false;
  std::string message;

  int samples() const { return static_cast<int>(t.size()); }
  Mat x_p() const { return x_cl.leftCols(nx); }
};

SimTrace simulate(const SimModel& m, const Scenario& sc);
std::vector<SimTrace> simulate_batch(const SimModel& m, const std::vector<Scenario>& scs);
std::vector<SimTrace> simulate_batch_serial(const SimModel& m, const std::vector<Scenario>& scs);

// ||e||_2 / ||d||_2 by trapezoid; throws std::invalid_argument on zero disturbance energy.
double empirical_l2_gain(const SimTrace& tr);

struct DissipationReport {
  std::vector<double> margin;  // lhs - rhs per sample
  std::vector<double> scale;   // sum of magnitudes of the terms per sample
  double worst_relative = 0.0; // max margin / (1 + scale)
  bool ok(double tol = 1e-4) const { return worst_relative < tol; }
};

// P and the scalings taken from the synthesis result (P = Q^{-1}, X_k from
// Gamma, lambda_l); V' = 2 x^T P x' from the stored derivative.
DissipationReport check_dissipation(const SimTrace& tr, const SimModel& m, const SynthesisResult& res);

// Admissible random scenario: zero initial state, a windowed sinusoid or step
// disturbance, and constant or sinusoidal Delta with |delta_k| <= b.
Scenario random_scenario(std::mt19937_64& rng, const UncertaintyStructure& s, int nd, double duration = 30.0,
                         double step = 1e-3);

void write_csv(std::ostream& os, const SimTrace& tr);

}  // namespace satiqc
