#pragma once

#include "ellopt/linops.hpp"
#include "ellopt/precond.hpp"

namespace ellopt {

/// A manifold cut out by one or more quadratic equality constraints
/// xᵢᵀBᵢxᵢ = 1, carried in ambient coordinates and endowed with the constant
/// metric g(ξ, η) = ξᵀMη. All operations are pure functions of immutable
/// state and safe to call concurrently.
class Manifold {
 public:
  virtual ~Manifold() = default;

  /// Ambient dimension.
  virtual Index dim() const = 0;
  /// Number of constraint blocks (1 for a single ellipsoid).
  virtual Index components() const = 0;
  /// Dimension of the tangent space: dim() − components().
  Index tangent_dim() const { return dim() - components(); }

  /// Orthogonal projection of an ambient vector onto T_x, with respect to
  /// the metric.
  virtual Vector project(const Vector& x, const Vector& v) const = 0;
  /// Projection onto the normal space; project + project_normal = identity.
  virtual Vector project_normal(const Vector& x, const Vector& v) const = 0;
  /// R_x(ξ) = (x+ξ)/‖x+ξ‖_B, blockwise.
  virtual Vector retract(const Vector& x, const Vector& xi) const = 0;
  /// Transport of ξ from T_x to T_{R_x(η)}, the differential of the
  /// retraction.
  virtual Vector transport(const Vector& x, const Vector& eta,
                           const Vector& xi) const = 0;
  /// Riemannian gradient P_x M⁻¹ ∇f̄(x) from the Euclidean gradient.
  virtual Vector egrad_to_rgrad(const Vector& x, const Vector& eg) const = 0;
  /// Riemannian Hessian applied to a tangent η:
  ///   P_x M⁻¹ [∇²f̄(x)η − c·Bη],  c = xᵀ∇f̄(x) − g_x(x, grad f(x))
  /// (blockwise scalars for products). `ehess_eta` is ∇²f̄(x)·η supplied by
  /// the caller and `rgrad` the Riemannian gradient at x.
  virtual Vector hess_apply(const Vector& x, const Vector& eg,
                            const Vector& ehess_eta, const Vector& eta,
                            const Vector& rgrad) const = 0;
  /// Shape operator W_x(η, u) = −P_x(α M⁻¹B)η with α = xᵀMu per block; u must
  /// be a normal vector at x.
  virtual Vector weingarten(const Vector& x, const Vector& eta,
                            const Vector& u) const = 0;

  /// Metric inner product ξᵀMη (independent of the base point).
  virtual double inner(const Vector& xi, const Vector& eta) const = 0;
  virtual Vector metric_apply(const Vector& v) const = 0;    // M v
  virtual Vector metric_solve(const Vector& v) const = 0;    // M⁻¹ v

  /// Scale an ambient vector onto the manifold, blockwise v/‖v‖_B.
  virtual Vector normalize(const Vector& v) const = 0;
  /// max over blocks of |xᵢᵀBᵢxᵢ − 1|.
  virtual double constraint_residual(const Vector& x) const = 0;
  /// Columns form a basis of T_x viewed as a subspace of the ambient space.
  virtual Matrix tangent_basis(const Vector& x) const = 0;

  /// Alternate Hessian route through the Weingarten map:
  ///   P_x M⁻¹ ∇²f̄(x)η + W_x(η, P⊥_x M⁻¹ ∇f̄(x)).
  /// Agrees with hess_apply; kept as an independent formula for testing.
  Vector hess_apply_weingarten(const Vector& x, const Vector& eg,
                               const Vector& ehess_eta,
                               const Vector& eta) const;
};

/// The ellipsoid {x : xᵀBx = 1} for an SPD constraint operator B, with
/// metric operator M.
class Ellipsoid final : public Manifold {
 public:
  Ellipsoid(LinOpPtr constraint, PrecondPtr metric);

  const LinOp& constraint() const { return *constraint_; }
  const Preconditioner& metric() const { return *metric_; }

  Index dim() const override { return d_; }
  Index components() const override { return 1; }

  Vector project(const Vector& x, const Vector& v) const override;
  Vector project_normal(const Vector& x, const Vector& v) const override;
  Vector retract(const Vector& x, const Vector& xi) const override;
  Vector transport(const Vector& x, const Vector& eta,
                   const Vector& xi) const override;
  Vector egrad_to_rgrad(const Vector& x, const Vector& eg) const override;
  Vector hess_apply(const Vector& x, const Vector& eg, const Vector& ehess_eta,
                    const Vector& eta, const Vector& rgrad) const override;
  Vector weingarten(const Vector& x, const Vector& eta,
                    const Vector& u) const override;

  double inner(const Vector& xi, const Vector& eta) const override;
  Vector metric_apply(const Vector& v) const override;
  Vector metric_solve(const Vector& v) const override;

  /// ‖v‖_B = √(vᵀBv).
  double b_norm(const Vector& v) const;

  Vector normalize(const Vector& v) const override;
  double constraint_residual(const Vector& x) const override;
  Matrix tangent_basis(const Vector& x) const override;

 private:
  // M⁻¹Bx and the normalizer γ = xᵀBM⁻¹Bx shared by both projections.
  struct ProjectionData {
    Vector bx;
    Vector minv_bx;
    double gamma;
  };
  ProjectionData projection_data(const Vector& x) const;

  LinOpPtr constraint_;
  PrecondPtr metric_;
  Index d_;
};

}  // namespace ellopt
