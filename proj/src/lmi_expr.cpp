#include "satiqc/lmi_expr.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace satiqc {

Expr make_var_expr(int id, int rows, int cols) {
  Expr e(rows, cols);
  e.terms_.push_back({id, Mat::Identity(rows, rows), Mat::Identity(cols, cols), false});
  return e;
}

Expr Expr::operator+(const Expr& o) const {
  if (rows() != o.rows() || cols() != o.cols())
    throw std::invalid_argument("Expr +: size mismatch " + std::to_string(rows()) + "x" + std::to_string(cols()) +
                                " vs " + std::to_string(o.rows()) + "x" + std::to_string(o.cols()));
  Expr r = *this;
  r.c0_ += o.c0_;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  return r;
}

Expr Expr::operator-() const {
  Expr r = *this;
  r.c0_ = -r.c0_;
  for (auto& t : r.terms_) t.L = -t.L;
  return r;
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

Expr Expr::operator*(double k) const {
  Expr r = *this;
  r.c0_ *= k;
  for (auto& t : r.terms_) t.L *= k;
  return r;
}

Expr Expr::operator*(const Mat& R) const {
  if (cols() != R.rows()) throw std::invalid_argument("Expr * Mat: size mismatch");
  Expr r;
  r.c0_ = c0_ * R;
  r.terms_ = terms_;
  for (auto& t : r.terms_) t.R = t.R * R;
  return r;
}

Expr operator*(const Mat& L, const Expr& e) {
  if (L.cols() != e.rows()) throw std::invalid_argument("Mat * Expr: size mismatch");
  Expr r;
  r.c0_ = L * e.c0_;
  r.terms_ = e.terms_;
  for (auto& t : r.terms_) t.L = L * t.L;
  return r;
}

Expr Expr::T() const {
  Expr r;
  r.c0_ = c0_.transpose();
  r.terms_ = terms_;
  for (auto& t : r.terms_) {
    Mat L = t.R.transpose();
    t.R = t.L.transpose();
    t.L = L;
    t.transposed = !t.transposed;
  }
  return r;
}

Mat Expr::eval(const std::vector<Mat>& values) const {
  Mat r = c0_;
  for (auto& t : terms_) {
    const Mat& V = values.at(t.var);
    r += t.transposed ? Mat(t.L * V.transpose() * t.R) : Mat(t.L * V * t.R);
  }
  return r;
}

Expr scaled(const Var& s, const Mat& M) {
  if (s.rows != 1 || s.cols != 1) throw std::invalid_argument("scaled: variable must be scalar");
  Expr e(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
  for (int i = 0; i < M.rows(); ++i) {
    if (M.row(i).isZero(0.0)) continue;
    Term t;
    t.var = s.id;
    t.L = Mat::Zero(M.rows(), 1);
    t.L(i, 0) = 1.0;
    t.R = M.row(i);
    e.terms_.push_back(std::move(t));
  }
  return e;
}

Expr blocks(const std::vector<std::vector<Expr>>& grid) {
  if (grid.empty()) return Expr(0, 0);
  const size_t nr = grid.size(), nc = grid[0].size();
  std::vector<int> h(nr), w(nc);
  for (size_t i = 0; i < nr; ++i) {
    if (grid[i].size() != nc) throw std::invalid_argument("blocks: ragged grid");
    h[i] = grid[i][0].rows();
  }
  for (size_t j = 0; j < nc; ++j) w[j] = grid[0][j].cols();
  int H = 0, W = 0;
  for (int x : h) H += x;
  for (int x : w) W += x;
  Expr out(H, W);
  int ro = 0;
  for (size_t i = 0; i < nr; ++i) {
    int co = 0;
    for (size_t j = 0; j < nc; ++j) {
      const Expr& b = grid[i][j];
      if (b.rows() != h[i] || b.cols() != w[j])
        throw std::invalid_argument("blocks: block (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") has inconsistent size");
      if (h[i] > 0 && w[j] > 0) {
        Mat El = Mat::Zero(H, h[i]);
        El.middleRows(ro, h[i]).setIdentity();
        Mat Er = Mat::Zero(w[j], W);
        Er.middleCols(co, w[j]).setIdentity();
        out = out + El * b * Er;
      }
      co += w[j];
    }
    ro += h[i];
  }
  return out;
}

Expr sym_blocks(const std::vector<std::vector<Expr>>& lower) {
  const size_t n = lower.size();
  for (size_t i = 0; i < n; ++i)
    if (lower[i].size() < i + 1) throw std::invalid_argument("sym_blocks: row too short");
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (j <= i) g[i][j] = lower[i][j];
      else g[i][j] = lower[j][i].T();
    }
  return blocks(g);
}

Expr hstack(const std::vector<Expr>& parts) { return blocks({parts}); }

Expr vstack(const std::vector<Expr>& parts) {
  std::vector<std::vector<Expr>> g;
  for (auto& p : parts) g.push_back({p});
  return blocks(g);
}

Expr blkdiag(const std::vector<Expr>& parts) {
  const size_t n = parts.size();
  std::vector<std::vector<Expr>> g(n, std::vector<Expr>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) g[i][j] = i == j ? parts[i] : Expr::zero(parts[i].rows(), parts[j].cols());
  return blocks(g);
}

Var LmiProblem::add_symmetric(const std::string& name, int n) {
  if (n < 0) throw std::invalid_argument("add_symmetric: negative size");
  if (find_var(name) >= 0) throw std::invalid_argument("duplicate variable " + name);
  VarInfo v{name, VarKind::symmetric, n, n, nscal_, n * (n + 1) / 2};
  vars_.push_back(v);
  nscal_ += v.count;
  return {static_cast<int>(vars_.size()) - 1, n, n};
}

Var LmiProblem::add_scalar(const std::string& name) {
  if (find_var(name) >= 0) throw std::invalid_argument("duplicate variable " + name);
  VarInfo v{name, VarKind::scalar, 1, 1, nscal_, 1};
  vars_.push_back(v);
  nscal_ += 1;
  return {static_cast<int>(vars_.size()) - 1, 1, 1};
}

Var LmiProblem::add_full(const std::string& name, int rows, int cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("add_full: negative size");
  if (find_var(name) >= 0) throw std::invalid_argument("duplicate variable " + name);
  VarInfo v{name, VarKind::full, rows, cols, nscal_, rows * cols};
  vars_.push_back(v);
  nscal_ += v.count;
  return {static_cast<int>(vars_.size()) - 1, rows, cols};
}

int LmiProblem::find_var(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

Var LmiProblem::var(const std::string& name) const {
  const int i = find_var(name);
  if (i < 0) throw std::invalid_argument("unknown variable " + name);
  return {i, vars_[i].rows, vars_[i].cols};
}

void LmiProblem::add(const Expr& e, Sense s, const std::string& name, bool strict) {
  if (e.rows() != e.cols()) throw std::invalid_argument("constraint " + name + " is not square");
  for (auto& t : e.terms())
    if (t.var < 0 || t.var >= static_cast<int>(vars_.size()))
      throw std::invalid_argument("constraint " + name + " references an undeclared variable");
  // symmetry of the constant part and of the variable part (probed at a random point)
  Mat c = e.constant();
  if ((c - c.transpose()).norm() > 1e-9 * std::max(1.0, c.norm()))
    throw std::invalid_argument("constraint " + name + " is not symmetric");
  cons_.push_back({name, e, s, strict});
}

void LmiProblem::minimize(const Expr& e) {
  if (e.rows() != 1 || e.cols() != 1) throw std::invalid_argument("objective must be 1x1");
  obj_ = e;
}

std::vector<Mat> LmiProblem::unpack(const Vec& y) const {
  std::vector<Mat> out;
  for (auto& v : vars_) {
    Mat M(v.rows, v.cols);
    int k = v.offset;
    if (v.kind == VarKind::symmetric) {
      for (int j = 0; j < v.cols; ++j)
        for (int i = j; i < v.rows; ++i) {
          M(i, j) = M(j, i) = y(k++);
        }
    } else {
      for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i < v.rows; ++i) M(i, j) = y(k++);
    }
    out.push_back(M);
  }
  return out;
}

Vec LmiProblem::pack(const std::vector<Mat>& values) const {
  Vec y(nscal_);
  for (size_t vi = 0; vi < vars_.size(); ++vi) {
    const auto& v = vars_[vi];
    const Mat& M = values.at(vi);
    int k = v.offset;
    if (v.kind == VarKind::symmetric) {
      for (int j = 0; j < v.cols; ++j)
        for (int i = j; i < v.rows; ++i) y(k++) = 0.5 * (M(i, j) + M(j, i));
    } else {
      for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i < v.rows; ++i) y(k++) = M(i, j);
    }
  }
  return y;
}

void LmiProblem::coefficients(const Expr& e, Mat& F0, std::vector<std::pair<int, Mat>>& Fj) const {
  F0 = e.constant();
  std::vector<Mat> acc(nscal_);
  std::vector<bool> used(nscal_, false);
  for (auto& t : e.terms()) {
    const auto& v = vars_.at(t.var);
    int k = v.offset;
    // L * E_ab * R = L.col(a) * R.row(b); transposed swaps a and b
    auto add = [&](int idx, int a, int b) {
      if (t.transposed) std::swap(a, b);
      Mat contrib = t.L.col(a) * t.R.row(b);
      if (!used[idx]) {
        acc[idx] = contrib;
        used[idx] = true;
      } else {
        acc[idx] += contrib;
      }
    };
    if (v.kind == VarKind::symmetric) {
      for (int j = 0; j < v.cols; ++j)
        for (int i = j; i < v.rows; ++i) {
          add(k, i, j);
          if (i != j) add(k, j, i);
          ++k;
        }
    } else {
      for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i < v.rows; ++i) add(k++, i, j);
    }
  }
  Fj.clear();
  for (int i = 0; i < nscal_; ++i)
    if (used[i] && acc[i].norm() > 0.0) Fj.emplace_back(i, acc[i]);
}

Mat LmiProblem::eval_lowered(const Expr& e, const Vec& y) const {
  Mat F0;
  std::vector<std::pair<int, Mat>> Fj;
  coefficients(e, F0, Fj);
  Mat r = F0;
  for (auto& [j, F] : Fj) r += y(j) * F;
  return r;
}

LoweredProblem LmiProblem::lower(double strict_margin) const {
  LoweredProblem lp;
  lp.sdp.m = nscal_;
  lp.sdp.c = Vec::Zero(nscal_);
  {
    Mat F0;
    std::vector<std::pair<int, Mat>> Fj;
    if (obj_.rows() == 1) {
      coefficients(obj_, F0, Fj);
      for (auto& [j, F] : Fj) lp.sdp.c(j) = F(0, 0);
      lp.objective_constant = F0(0, 0);
    }
  }
  for (auto& c : cons_) {
    Mat F0;
    std::vector<std::pair<int, Mat>> Fj;
    coefficients(c.expr, F0, Fj);
    // nonsymmetric coefficients would mean a construction bug
    for (auto& [j, F] : Fj)
      if ((F - F.transpose()).norm() > 1e-9 * std::max(1.0, F.norm()))
        throw std::logic_error("constraint " + c.name + " is not symmetric in variable " + std::to_string(j));
    double scale = 1.0;
    for (auto& [j, F] : Fj) scale = std::max(scale, F.norm());
    const double delta = c.strict ? strict_margin * scale : 0.0;
    const double sgn = c.sense == Sense::negative ? -1.0 : 1.0;
    SdpBlock b;
    const int n = c.expr.rows();
    b.F0 = sgn * 0.5 * (F0 + F0.transpose()) - delta * Mat::Identity(n, n);
    for (auto& [j, F] : Fj) b.F.emplace_back(j, sgn * 0.5 * (F + F.transpose()));
    lp.block_of_constraint.push_back(static_cast<int>(lp.sdp.blocks.size()));
    lp.delta.push_back(delta);
    lp.sdp.blocks.push_back(std::move(b));
  }
  return lp;
}

std::vector<double> LmiProblem::margins(const std::vector<Mat>& values) const {
  std::vector<double> out;
  for (auto& c : cons_) {
    Mat M = c.expr.eval(values);
    M = 0.5 * (M + M.transpose());
    if (c.sense == Sense::positive) M = -M;
    if (M.rows() == 0) {
      out.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    out.push_back(es.eigenvalues()(M.rows() - 1));
  }
  return out;
}

LmiSolution solve_lmi(const LmiProblem& prob, const SdpBackend& backend, const SdpOptions& opts) {
  LoweredProblem lp = prob.lower(prob.strict_margin);
  LmiSolution s;
  s.raw = backend.solve(lp.sdp, opts);
  s.status = s.raw.status;
  s.y = s.raw.y;
  if (s.y.size() == prob.num_scalars()) {
    s.values = prob.unpack(s.y);
    s.objective = s.raw.objective + lp.objective_constant;
  }
  return s;
}

LmiSolution solve_lmi(const LmiProblem& prob, const SdpOptions& opts) {
  InteriorPointSolver ipm;
  return solve_lmi(prob, ipm, opts);
}

}  // namespace satiqc
