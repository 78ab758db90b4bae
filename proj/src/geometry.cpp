#include "ellopt/geometry.hpp"

#include <Eigen/QR>

#include <cmath>
#include <utility>

namespace ellopt {

namespace {
constexpr double kDegenerateNorm = 1e-14;
}

Vector Manifold::hess_apply_weingarten(const Vector& x, const Vector& eg,
                                       const Vector& ehess_eta,
                                       const Vector& eta) const {
  const Vector minv_eg = metric_solve(eg);
  const Vector normal = project_normal(x, minv_eg);
  return project(x, metric_solve(ehess_eta)) + weingarten(x, eta, normal);
}

Ellipsoid::Ellipsoid(LinOpPtr constraint, PrecondPtr metric)
    : constraint_(std::move(constraint)), metric_(std::move(metric)) {
  if (!constraint_ || !metric_)
    throw std::invalid_argument("Ellipsoid: null operator");
  if (constraint_->rows() != constraint_->cols())
    throw std::invalid_argument("Ellipsoid: constraint operator not square");
  if (metric_->dim() != constraint_->rows())
    throw std::invalid_argument("Ellipsoid: metric/constraint dimensions differ");
  d_ = constraint_->rows();
}

Ellipsoid::ProjectionData Ellipsoid::projection_data(const Vector& x) const {
  ProjectionData data;
  data.bx = constraint_->apply(x);
  data.minv_bx = metric_->apply_inverse(data.bx);
  data.gamma = data.bx.dot(data.minv_bx);
  if (!std::isfinite(data.gamma) || data.gamma <= 0.0)
    throw NumericalError("metric/constraint not SPD");
  return data;
}

Vector Ellipsoid::project(const Vector& x, const Vector& v) const {
  const ProjectionData p = projection_data(x);
  return v - (p.bx.dot(v) / p.gamma) * p.minv_bx;
}

Vector Ellipsoid::project_normal(const Vector& x, const Vector& v) const {
  const ProjectionData p = projection_data(x);
  return (p.bx.dot(v) / p.gamma) * p.minv_bx;
}

Vector Ellipsoid::retract(const Vector& x, const Vector& xi) const {
  Vector y = x + xi;
  const double nb = b_norm(y);
  if (nb < kDegenerateNorm)
    throw NumericalError("degenerate retraction step");
  return y / nb;
}

Vector Ellipsoid::transport(const Vector& x, const Vector& eta,
                            const Vector& xi) const {
  const Vector y = x + eta;
  const double nb = b_norm(y);
  if (nb < kDegenerateNorm)
    throw NumericalError("degenerate transport step");
  const Vector by = constraint_->apply(y);
  return (xi - (by.dot(xi) / (nb * nb)) * y) / nb;
}

Vector Ellipsoid::egrad_to_rgrad(const Vector& x, const Vector& eg) const {
  return project(x, metric_->apply_inverse(eg));
}

Vector Ellipsoid::hess_apply(const Vector& x, const Vector& eg,
                             const Vector& ehess_eta, const Vector& eta,
                             const Vector& rgrad) const {
  // c = xᵀ∇f̄ − g_x(x, grad f); both scalars computed once.
  const double c = x.dot(eg) - x.dot(metric_->apply(rgrad));
  const Vector v = ehess_eta - c * constraint_->apply(eta);
  return project(x, metric_->apply_inverse(v));
}

Vector Ellipsoid::weingarten(const Vector& x, const Vector& eta,
                             const Vector& u) const {
  const double alpha = x.dot(metric_->apply(u));
  return -alpha * project(x, metric_->apply_inverse(constraint_->apply(eta)));
}

double Ellipsoid::inner(const Vector& xi, const Vector& eta) const {
  return xi.dot(metric_->apply(eta));
}

Vector Ellipsoid::metric_apply(const Vector& v) const {
  return metric_->apply(v);
}

Vector Ellipsoid::metric_solve(const Vector& v) const {
  return metric_->apply_inverse(v);
}

double Ellipsoid::b_norm(const Vector& v) const {
  const double q = v.dot(constraint_->apply(v));
  if (!std::isfinite(q) || q < 0.0)
    throw NumericalError("metric/constraint not SPD");
  return std::sqrt(q);
}

Vector Ellipsoid::normalize(const Vector& v) const {
  const double nb = b_norm(v);
  if (nb < kDegenerateNorm) throw NumericalError("cannot normalize zero vector");
  return v / nb;
}

double Ellipsoid::constraint_residual(const Vector& x) const {
  return std::abs(x.dot(constraint_->apply(x)) - 1.0);
}

Matrix Ellipsoid::tangent_basis(const Vector& x) const {
  // T_x = {v : (Bx)ᵀv = 0}; a Householder QR of Bx gives an orthonormal
  // basis of its complement in columns 2..d.
  Matrix w = constraint_->apply(x);
  Eigen::HouseholderQR<Matrix> qr(w);
  Matrix q = qr.householderQ();
  return q.rightCols(d_ - 1);
}

}  // namespace ellopt
