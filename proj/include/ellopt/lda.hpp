#pragma once

#include "ellopt/cca.hpp"
#include "ellopt/geometry.hpp"
#include "ellopt/sketch.hpp"
#include "ellopt/solve.hpp"

namespace ellopt {

/// Per-class counts and means; the within/between scatter operators are
/// built from these plus the data.
struct ClassStats {
  Index n_classes = 0;
  std::vector<Index> counts;  // length l, all positive
  Matrix means;               // l×d, row k is the mean of class k+1
  Vector global_mean;
};

/// One sweep over X. Labels must be dense 1-based integers in {1..l}; throws
/// on out-of-range labels or an empty class.
ClassStats compute_class_stats(const SparseMatrix& x,
                               const std::vector<int>& labels, Index n_classes,
                               PassCounter* passes = nullptr);

struct LDAResult {
  double rho1 = 0.0;  // leading generalized eigenvalue (estimate)
  Vector w;           // wᵀ(S_w + λI)w = 1
  ConvergenceTrace trace;
  bool degenerate = false;  // S_B vanishes; any feasible w is optimal
};

/// Top-1 regularized LDA:
///   minimize f(w) = −½ wᵀS_B w  on  S^{S_w+λI},
/// with S_w = X̂ᵀX̂ applied through the centered rows of X (one sweep each
/// way) and S_B = ŶᵀŶ applied through the l×d between-class factor (no data
/// sweeps). Lifetime and concurrency notes as for CCAProblem.
class LDAProblem {
 public:
  /// Arbitrary label values; they are remapped to dense 1..l by sorted value.
  LDAProblem(SparseMatrix x, const std::vector<double>& labels, double lambda);

  LDAProblem(const LDAProblem&) = delete;
  LDAProblem& operator=(const LDAProblem&) = delete;

  Index samples() const { return x_->rows(); }
  Index dim() const { return x_->cols(); }
  Index n_classes() const { return stats_->n_classes; }
  double lambda() const { return lambda_; }
  const SparseMatrix& x() const { return *x_; }
  const std::vector<int>& labels() const { return *labels_; }
  const ClassStats& stats() const { return *stats_; }
  /// Ŷ: l×d with row k equal to √n_k (m_k − m)ᵀ, so S_B = ŶᵀŶ.
  const Matrix& between_factor() const { return between_factor_; }
  PassCounter& passes() const { return *passes_; }

  Vector centered_apply(const Vector& v) const;            // X̂ v
  Vector centered_apply_transpose(const Vector& r) const;  // X̂ᵀ r
  Vector scatter_within_reg_apply(const Vector& v) const;  // (S_w + λI) v
  Vector scatter_between_apply(const Vector& v) const;     // S_B v

  double objective(const Vector& w) const;
  Vector euclidean_gradient(const Vector& w) const;
  Vector euclidean_hessian_vec(const Vector& w, const Vector& eta) const;

  Ellipsoid manifold(PrecondPtr metric) const;
  Problem make_problem(const Ellipsoid& manifold) const;
  Vector default_start(const Ellipsoid& manifold) const;

  /// S·X̂ in one sweep over X: S·X minus the (bucket × class) signed-count
  /// matrix times the mean table.
  Matrix sketch_centered(const CountSketch& s) const;

  /// Dense scatter matrices; desk-scale diagnostics, not counted.
  Matrix dense_scatter_within() const;
  Matrix dense_scatter_between() const;
  Matrix dense_centered() const;  // X̂

  static std::vector<int> remap_labels(const std::vector<double>& raw);

 private:
  SparsePtr x_;
  std::shared_ptr<const std::vector<int>> labels_;
  double lambda_;
  std::shared_ptr<const ClassStats> stats_;
  Matrix between_factor_;
  std::shared_ptr<PassCounter> passes_;
};

/// Generalized eigenvalues of (S_B, S_w+λI), descending; desk scale.
Vector lda_spectrum(const LDAProblem& p);

/// Dense oracle: leading eigenpair of the pencil (S_B, S_w+λI).
LDAResult exact_lda(const SparseMatrix& x, const std::vector<double>& labels,
                    double lambda);

/// End-to-end sketched solve: CountSketch the centered rows, precondition
/// with the sketched Gram, warm-start from the leading generalized
/// eigenvector of (S_B, M), run the Riemannian solver. Requires s ≥ d.
LDAResult sketched_lda(const SparseMatrix& x, const std::vector<double>& labels,
                       double lambda, Index s, std::uint64_t seed,
                       const SketchedSolveOptions& opts = {});

/// ρ₁/(ρ₁−ρ₂) · κ(S_w+λI, M); refuses degenerate gaps.
double lda_condition_bound(const LDAProblem& p, const Preconditioner& m);

}  // namespace ellopt
