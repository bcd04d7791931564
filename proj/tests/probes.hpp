#pragma once

#include "satiqc/iqc.hpp"
#include "satiqc/lft.hpp"

#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace probes {

using satiqc::Mat;
using satiqc::Vec;

// Random sector-compliant probe for a multiplier: a sum of sinusoids drives
// u (through 1/(s+alpha) when the multiplier is loop-transformed, directly
// otherwise) and w = N(u) is the dead-zone with a random threshold. Returns
// the multiplier input pair (first input, w) sampled at dt.
inline std::pair<Mat, Mat> deadzone_probe(const satiqc::Multiplier& m, std::mt19937_64& rng, double dt,
                                          double horizon) {
  std::uniform_real_distribution<double> amp(0.2, 3.0), freq(0.05, 6.0), ph(0.0, 6.283185307179586),
      thr(0.05, 1.5);
  const int K = 4;
  double a[K], f[K], p[K];
  for (int k = 0; k < K; ++k) {
    a[k] = amp(rng);
    f[k] = freq(rng);
    p[k] = ph(rng);
  }
  auto src = [&](double t) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += a[k] * std::sin(f[k] * t + p[k]);
    return s;
  };
  const double ubar = thr(rng);
  const int N = static_cast<int>(std::floor(horizon / dt)) + 1;
  Mat first(N, 1), w(N, 1);
  double u = 0.0;
  const double al = m.alpha;
  for (int i = 0; i < N; ++i) {
    const double t = i * dt;
    double ui;
    if (m.transformed) {
      first(i, 0) = src(t);
      ui = u;
      // RK4 step of u' = -alpha u + v to the next sample
      const double k1 = -al * u + src(t), k2 = -al * (u + 0.5 * dt * k1) + src(t + 0.5 * dt);
      const double k3 = -al * (u + 0.5 * dt * k2) + src(t + 0.5 * dt), k4 = -al * (u + dt * k3) + src(t + dt);
      u += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    } else {
      ui = src(t);
      first(i, 0) = ui;
    }
    w(i, 0) = satiqc::deadzone(Vec::Constant(1, ui), Vec::Constant(1, ubar))(0);
  }
  return {first, w};
}

// Coefficient distance between the SISO channel (i, j) of g and num/den
// (highest power first, den monic). Constant expectations may be matched by
// a static channel or by num = c * den.
inline double tf_coeff_error(const satiqc::StateSpace& g, int i, int j, const std::vector<double>& num,
                             const std::vector<double>& den) {
  const satiqc::TransferFunction tf = satiqc::siso_tf(g, i, j);
  if (den.size() == 1 && tf.den.size() > 1) {
    // static expectation against a dynamic realization: num must equal c * den
    std::vector<double> n = tf.num;
    while (n.size() < tf.den.size()) n.insert(n.begin(), 0.0);
    double e = 0.0;
    for (size_t k = 0; k < n.size(); ++k) e = std::max(e, std::abs(n[k] - num[0] * tf.den[k]));
    return e;
  }
  if (tf.den.size() != den.size()) return INFINITY;
  std::vector<double> n = tf.num;
  while (n.size() < num.size()) n.insert(n.begin(), 0.0);
  if (n.size() != num.size()) return INFINITY;
  double e = 0.0;
  for (size_t k = 0; k < n.size(); ++k) e = std::max(e, std::abs(n[k] - num[k]));
  for (size_t k = 0; k < den.size(); ++k) e = std::max(e, std::abs(tf.den[k] - den[k]));
  return e;
}

}  // namespace probes
