#pragma once

#include "ellopt/geometry.hpp"

namespace ellopt {

/// Product of k ellipsoids over one contiguous ambient vector, with
/// block-diagonal constraint and metric. Every operation applies the
/// component operation on its block; the metric is the sum over blocks.
class ProductEllipsoid final : public Manifold {
 public:
  explicit ProductEllipsoid(std::vector<Ellipsoid> parts);

  Index dim() const override { return d_; }
  Index components() const override { return static_cast<Index>(parts_.size()); }
  const Ellipsoid& part(Index i) const { return parts_.at(i); }
  /// Block i occupies [offset(i), offset(i+1)).
  Index offset(Index i) const { return offsets_.at(i); }

  Vector stack(const std::vector<Vector>& blocks) const;
  std::vector<Vector> split(const Vector& v) const;

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

  Vector normalize(const Vector& v) const override;
  double constraint_residual(const Vector& x) const override;
  Matrix tangent_basis(const Vector& x) const override;

 private:
  template <typename Fn>
  Vector blockwise(const Fn& fn) const;

  std::vector<Ellipsoid> parts_;
  std::vector<Index> offsets_;  // k+1 entries, contiguous partition of [0, d)
  Index d_;
};

}  // namespace ellopt
