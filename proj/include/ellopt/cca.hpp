#pragma once

#include "ellopt/product.hpp"
#include "ellopt/sketch.hpp"
#include "ellopt/solve.hpp"

namespace ellopt {

struct CCAResult {
  double sigma1 = 0.0;  // leading canonical correlation (estimate)
  Vector u, v;          // canonical weights, uᵀΣxx u = vᵀΣyy v = 1
  ConvergenceTrace trace;  // empty for the dense oracle
};

/// Top-1 regularized CCA over stacked coordinates z = [u; v]:
///   minimize f(z) = −uᵀΣxy v  on  S^Σxx × S^Σyy,
/// Σxx = XᵀX + λx I, Σyy = YᵀY + λy I, Σxy = XᵀY, all applied implicitly.
/// The instance owns the pass ledger; problems and manifolds built from it
/// borrow its state, so keep it alive while they are in use, and give each
/// concurrent solver run its own instance.
class CCAProblem {
 public:
  CCAProblem(SparseMatrix x, SparseMatrix y, double lambda_x, double lambda_y);

  CCAProblem(const CCAProblem&) = delete;
  CCAProblem& operator=(const CCAProblem&) = delete;

  Index samples() const { return x_->rows(); }
  Index dim_x() const { return x_->cols(); }
  Index dim_y() const { return y_->cols(); }
  Index dim() const { return dim_x() + dim_y(); }
  double lambda_x() const { return lx_; }
  double lambda_y() const { return ly_; }
  const SparseMatrix& x() const { return *x_; }
  const SparseMatrix& y() const { return *y_; }
  PassCounter& passes() const { return *passes_; }

  double objective(const Vector& z) const;
  Vector euclidean_gradient(const Vector& z) const;
  Vector euclidean_hessian_vec(const Vector& z, const Vector& eta) const;

  /// S^Σxx × S^Σyy with the given metric blocks.
  ProductEllipsoid manifold(PrecondPtr m_xx, PrecondPtr m_yy) const;
  Problem make_problem(const ProductEllipsoid& manifold) const;

  Vector stack(const Vector& u, const Vector& v) const;
  Vector block_u(const Vector& z) const { return z.head(dim_x()); }
  Vector block_v(const Vector& z) const { return z.tail(dim_y()); }

  /// Feasible deterministic start (blockwise-normalized all-ones vector).
  Vector default_start(const ProductEllipsoid& manifold) const;

  /// Dense Σ = diag(Σxx, Σyy) and Σxy; desk-scale diagnostics, not counted
  /// in the pass ledger.
  Matrix dense_sigma() const;
  Matrix dense_cross() const;

 private:
  SparsePtr x_, y_;
  double lx_, ly_;
  std::shared_ptr<PassCounter> passes_;
  CrossGram cross_;
};

/// Dense CCA solve from the Gram pieces: all canonical correlations plus the
/// constraint-normalized, sign-fixed leading weight pair.
struct CCADenseSolution {
  Vector sigmas;  // descending
  Vector u, v;
};
CCADenseSolution cca_dense_solve(const Matrix& sxx, const Matrix& syy,
                                 const Matrix& sxy);

/// Exact oracle through Σxx^{-1/2} Σxy Σyy^{-1/2}; desk scale only.
CCAResult exact_cca(const SparseMatrix& x, const SparseMatrix& y,
                    double lambda_x, double lambda_y);
CCAResult exact_cca(const Matrix& x, const Matrix& y, double lambda_x,
                    double lambda_y);

struct SketchedSolveOptions {
  SolverConfig solver{};
  bool warm_start = true;
  bool use_rgd = false;  // default is conjugate gradient
};

/// End-to-end sketched solve: CountSketch both matrices, warm-start from the
/// exact solution of the sketched problem, precondition with the sketched
/// Grams, then run the Riemannian solver on the true problem.
/// Requires s ≥ max(d_x, d_y).
CCAResult sketched_cca(const SparseMatrix& x, const SparseMatrix& y,
                       double lambda_x, double lambda_y, Index s,
                       std::uint64_t seed,
                       const SketchedSolveOptions& opts = {});

/// 2σ₁/(σ₁−σ₂) · κ(Σ, M) with M = diag(m_xx, m_yy): the bound on the
/// condition number of the Riemannian Hessian at the optimum.
double cca_condition_bound(const CCAProblem& p, const Preconditioner& m_xx,
                           const Preconditioner& m_yy);

}  // namespace ellopt
