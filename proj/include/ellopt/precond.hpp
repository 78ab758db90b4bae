#pragma once

#include "ellopt/linops.hpp"

namespace ellopt {

/// SPD metric operator M with a fast inverse. Used both as the Riemannian
/// metric and as the preconditioner; immutable after construction, reentrant.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Index dim() const = 0;
  virtual Vector apply(const Vector& v) const = 0;          // M v
  virtual Vector apply_inverse(const Vector& v) const = 0;  // M⁻¹ v

  /// Upper-triangular R with M = RᵀR when the variant stores one, else null.
  virtual const Matrix* triangular_factor() const { return nullptr; }

  /// Dense materialization by applying to identity columns (diagnostics).
  Matrix to_dense() const;
};

using PrecondPtr = std::shared_ptr<const Preconditioner>;

/// The no-preconditioning baseline.
PrecondPtr identity_precond(Index d);

/// Explicit dense SPD matrix, inverted through a Cholesky factor (tests and
/// small baselines).
PrecondPtr dense_spd_precond(Matrix m);

/// M = ZSᵀZS + λI for a sketched matrix ZS (s×d), represented by the
/// triangular factor R of a QR factorization of [ZS; √λ I] so that M = RᵀR.
/// apply and apply_inverse are both O(d²) triangular work.
/// Throws NumericalError when λ=0 and ZS is column rank deficient.
PrecondPtr build_sketched_gram(const Matrix& zs, double lambda);

/// Exact Gram baseline M = ZᵀZ + λI, built densely in one sweep over Z and
/// factored once.
PrecondPtr build_exact_gram(const SparseMatrix& z, double lambda,
                            PassCounter* passes = nullptr);

/// Rank-k spectral preconditioner for A + λI with A SPD. With A = UΛUᵀ and
/// eigenvalues sorted descending,
///   M = U_k(Λ_k − λ_tail I)U_kᵀ + (λ_tail + λ) I,   λ_tail = Λ_{k+1},
/// i.e. the top-k eigendirections are matched exactly and the tail is
/// flattened to its largest eigenvalue. Requires 1 ≤ k < d.
PrecondPtr build_dominant_subspace(const Matrix& a, double lambda, Index k);

/// Same, with A = ZᵀZ formed densely in one sweep over Z.
PrecondPtr build_dominant_subspace(const SparseMatrix& z, double lambda,
                                   Index k, PassCounter* passes = nullptr);

}  // namespace ellopt
