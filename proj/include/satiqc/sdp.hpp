#pragma once

#include "satiqc/ss_core.hpp"

#include <string>
#include <utility>
#include <vector>

namespace satiqc {

// G(y) = F0 + sum_j y_j F_j must be PSD.
struct SdpBlock {
  Mat F0;
  std::vector<std::pair<int, Mat>> F;  // sparse list over variables
  int dim() const { return static_cast<int>(F0.rows()); }
};

// minimize c^T y  s.t.  every block PSD,  lb <= y <= ub
struct SdpProblem {
  int m = 0;
  Vec c;
  std::vector<SdpBlock> blocks;
  Vec lb, ub;  // optional; empty or +-inf entries mean unbounded
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iterations, numerical_error };
std::string to_string(SdpStatus s);

struct SdpOptions {
  double feas_tol = 1e-8;  // relative primal/dual infeasibility
  double gap_tol = 1e-8;   // relative duality gap
  int max_iter = 150;
  bool parallel = true;    // OpenMP Schur-complement assembly
  bool verbose = false;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_error;
  Vec y;
  double objective = 0.0;
  double primal_infeas = 0.0;  // of the dual-form constraints G(y) >= 0
  double dual_infeas = 0.0;
  double rel_gap = 0.0;
  double min_eig = 0.0;        // smallest eigenvalue over blocks of G(y)
  int iterations = 0;
  std::vector<Mat> certificate;  // X blocks with tr(F_j X) = 0, tr(F0 X) < 0 when infeasible
  std::string message;
};

class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) const = 0;
  virtual std::string name() const = 0;
};

// Primal-dual path following (HKM direction, Mehrotra predictor-corrector,
// infeasible start).
class InteriorPointSolver : public SdpBackend {
 public:
  SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) const override;
  std::string name() const override { return "satiqc-ipm"; }
};

// Schur complement O_ij = sum_k tr(A_i^k Zinv^k A_j^k X^k); the two variants
// must agree to rounding.
Mat schur_complement_serial(const std::vector<SdpBlock>& blocks, const std::vector<Mat>& Zinv,
                            const std::vector<Mat>& X, int m);
Mat schur_complement_omp(const std::vector<SdpBlock>& blocks, const std::vector<Mat>& Zinv,
                         const std::vector<Mat>& X, int m);

}  // namespace satiqc
