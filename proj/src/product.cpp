#include "ellopt/product.hpp"

#include <utility>

namespace ellopt {

ProductEllipsoid::ProductEllipsoid(std::vector<Ellipsoid> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty())
    throw std::invalid_argument("ProductEllipsoid: no components");
  offsets_.push_back(0);
  for (const auto& p : parts_) offsets_.push_back(offsets_.back() + p.dim());
  d_ = offsets_.back();
}

template <typename Fn>
Vector ProductEllipsoid::blockwise(const Fn& fn) const {
  Vector out(d_);
  for (Index i = 0; i < components(); ++i) {
    const Index o = offsets_[i];
    const Index len = parts_[i].dim();
    out.segment(o, len) = fn(parts_[i], o, len);
  }
  return out;
}

Vector ProductEllipsoid::stack(const std::vector<Vector>& blocks) const {
  if (static_cast<Index>(blocks.size()) != components())
    throw std::invalid_argument("stack: wrong number of blocks");
  Vector out(d_);
  for (Index i = 0; i < components(); ++i) {
    if (blocks[i].size() != parts_[i].dim())
      throw std::invalid_argument("stack: block length mismatch");
    out.segment(offsets_[i], parts_[i].dim()) = blocks[i];
  }
  return out;
}

std::vector<Vector> ProductEllipsoid::split(const Vector& v) const {
  if (v.size() != d_) throw std::invalid_argument("split: length mismatch");
  std::vector<Vector> out;
  out.reserve(parts_.size());
  for (Index i = 0; i < components(); ++i)
    out.push_back(v.segment(offsets_[i], parts_[i].dim()));
  return out;
}

Vector ProductEllipsoid::project(const Vector& x, const Vector& v) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.project(x.segment(o, len), v.segment(o, len));
  });
}

Vector ProductEllipsoid::project_normal(const Vector& x, const Vector& v) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.project_normal(x.segment(o, len), v.segment(o, len));
  });
}

Vector ProductEllipsoid::retract(const Vector& x, const Vector& xi) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.retract(x.segment(o, len), xi.segment(o, len));
  });
}

Vector ProductEllipsoid::transport(const Vector& x, const Vector& eta,
                                   const Vector& xi) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.transport(x.segment(o, len), eta.segment(o, len),
                       xi.segment(o, len));
  });
}

Vector ProductEllipsoid::egrad_to_rgrad(const Vector& x, const Vector& eg) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.egrad_to_rgrad(x.segment(o, len), eg.segment(o, len));
  });
}

Vector ProductEllipsoid::hess_apply(const Vector& x, const Vector& eg,
                                    const Vector& ehess_eta, const Vector& eta,
                                    const Vector& rgrad) const {
  // The curvature scalar is per block, so the component formula applies with
  // the coupled ∇²f̄·η restricted to the block.
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.hess_apply(x.segment(o, len), eg.segment(o, len),
                        ehess_eta.segment(o, len), eta.segment(o, len),
                        rgrad.segment(o, len));
  });
}

Vector ProductEllipsoid::weingarten(const Vector& x, const Vector& eta,
                                    const Vector& u) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.weingarten(x.segment(o, len), eta.segment(o, len),
                        u.segment(o, len));
  });
}

double ProductEllipsoid::inner(const Vector& xi, const Vector& eta) const {
  double acc = 0.0;
  for (Index i = 0; i < components(); ++i) {
    const Index o = offsets_[i];
    const Index len = parts_[i].dim();
    acc += parts_[i].inner(xi.segment(o, len), eta.segment(o, len));
  }
  return acc;
}

Vector ProductEllipsoid::metric_apply(const Vector& v) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.metric_apply(v.segment(o, len));
  });
}

Vector ProductEllipsoid::metric_solve(const Vector& v) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.metric_solve(v.segment(o, len));
  });
}

Vector ProductEllipsoid::normalize(const Vector& v) const {
  return blockwise([&](const Ellipsoid& e, Index o, Index len) {
    return e.normalize(v.segment(o, len));
  });
}

double ProductEllipsoid::constraint_residual(const Vector& x) const {
  double worst = 0.0;
  for (Index i = 0; i < components(); ++i) {
    worst = std::max(worst, parts_[i].constraint_residual(
                                x.segment(offsets_[i], parts_[i].dim())));
  }
  return worst;
}

Matrix ProductEllipsoid::tangent_basis(const Vector& x) const {
  Matrix basis = Matrix::Zero(d_, tangent_dim());
  Index col = 0;
  for (Index i = 0; i < components(); ++i) {
    const Index o = offsets_[i];
    const Index len = parts_[i].dim();
    Matrix part = parts_[i].tangent_basis(x.segment(o, len));
    basis.block(o, col, len, part.cols()) = part;
    col += part.cols();
  }
  return basis;
}

}  // namespace ellopt
