#pragma once

#include "satiqc/sdp.hpp"
#include "satiqc/ss_core.hpp"

#include <string>
#include <vector>

namespace satiqc {

enum class VarKind { symmetric, scalar, full };

struct VarInfo {
  std::string name;
  VarKind kind = VarKind::scalar;
  int rows = 1, cols = 1;
  int offset = 0;  // first index in the flattened decision vector
  int count = 1;   // number of scalar unknowns
};

// L * V * R, or L * V^T * R when transposed.
struct Term {
  int var = -1;
  Mat L, R;
  bool transposed = false;
};

struct Var;

// Affine matrix-valued expression: constant + sum of terms.
class Expr {
 public:
  Expr() = default;
  Expr(int rows, int cols) : c0_(Mat::Zero(rows, cols)) {}
  explicit Expr(const Mat& c) : c0_(c) {}
  static Expr zero(int rows, int cols) { return Expr(rows, cols); }
  static Expr identity(int n, double k = 1.0) { return Expr(Mat(k * Mat::Identity(n, n))); }

  int rows() const { return static_cast<int>(c0_.rows()); }
  int cols() const { return static_cast<int>(c0_.cols()); }
  const Mat& constant() const { return c0_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator-() const;
  Expr operator*(double k) const;
  Expr operator*(const Mat& R) const;
  friend Expr operator*(const Mat& L, const Expr& e);
  friend Expr operator*(double k, const Expr& e) { return e * k; }
  Expr T() const;
  // e + e^T
  Expr he() const { return *this + T(); }

  // Evaluate with one matrix value per declared variable.
  Mat eval(const std::vector<Mat>& values) const;

 private:
  friend class LmiProblem;
  friend Expr make_var_expr(int id, int rows, int cols);
  friend Expr scaled(const Var& s, const Mat& M);
  Mat c0_;
  std::vector<Term> terms_;
};

Expr make_var_expr(int id, int rows, int cols);

// Block assembly; every row of blocks must have consistent heights and every
// column consistent widths. Zero-size blocks are allowed.
Expr blocks(const std::vector<std::vector<Expr>>& grid);
// Symmetric assembly from the lower triangle (grid[i][j] for j <= i).
Expr sym_blocks(const std::vector<std::vector<Expr>>& lower);
Expr hstack(const std::vector<Expr>& parts);
Expr vstack(const std::vector<Expr>& parts);
Expr blkdiag(const std::vector<Expr>& parts);

struct Var {
  int id = -1;
  int rows = 0, cols = 0;
  Expr operator()() const { return make_var_expr(id, rows, cols); }
  bool valid() const { return id >= 0; }
};

// s * M for a scalar variable s
Expr scaled(const Var& s, const Mat& M);

enum class Sense { negative, positive };  // expr < 0 or expr > 0

struct LmiConstraint {
  std::string name;
  Expr expr;
  Sense sense = Sense::negative;
  bool strict = true;  // strict constraints get the -delta*I margin
};

struct LoweredProblem {
  SdpProblem sdp;
  std::vector<int> block_of_constraint;
  std::vector<double> delta;  // strictness margin used per constraint
  double objective_constant = 0.0;
};

class LmiProblem {
 public:
  Var add_symmetric(const std::string& name, int n);
  Var add_scalar(const std::string& name);
  Var add_full(const std::string& name, int rows, int cols);

  void add(const Expr& e, Sense s, const std::string& name, bool strict = true);
  void add_neg(const Expr& e, const std::string& name, bool strict = true) { add(e, Sense::negative, name, strict); }
  void add_pos(const Expr& e, const std::string& name, bool strict = true) { add(e, Sense::positive, name, strict); }
  // 1x1 objective expression to minimize
  void minimize(const Expr& e);

  const std::vector<VarInfo>& vars() const { return vars_; }
  const std::vector<LmiConstraint>& constraints() const { return cons_; }
  const Expr& objective() const { return obj_; }
  int num_scalars() const { return nscal_; }
  int find_var(const std::string& name) const;
  Var var(const std::string& name) const;

  // decision vector <-> variable values
  std::vector<Mat> unpack(const Vec& y) const;
  Vec pack(const std::vector<Mat>& values) const;

  // coefficient matrices F0, F_j of an expression in the flattened variables
  void coefficients(const Expr& e, Mat& F0, std::vector<std::pair<int, Mat>>& Fj) const;
  // lowered affine map evaluated at y
  Mat eval_lowered(const Expr& e, const Vec& y) const;

  // strict_margin: delta = strict_margin * max(1, scale of the constraint)
  LoweredProblem lower(double strict_margin = 1e-8) const;

  // max eigenvalue of each constraint (sign-adjusted so < 0 means satisfied)
  std::vector<double> margins(const std::vector<Mat>& values) const;

  double strict_margin = 1e-8;  // used by solve_lmi

 private:
  std::vector<VarInfo> vars_;
  std::vector<LmiConstraint> cons_;
  Expr obj_;
  int nscal_ = 0;
};

// Solves with the given backend and returns the variable values.
struct LmiSolution {
  SdpStatus status = SdpStatus::numerical_error;
  std::vector<Mat> values;
  Vec y;
  double objective = 0.0;
  SdpSolution raw;
};

LmiSolution solve_lmi(const LmiProblem& prob, const SdpBackend& backend, const SdpOptions& opts = {});
LmiSolution solve_lmi(const LmiProblem& prob, const SdpOptions& opts = {});

}  // namespace satiqc
