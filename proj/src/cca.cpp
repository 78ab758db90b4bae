#include "ellopt/cca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <utility>

namespace ellopt {

namespace {

Matrix spd_inverse_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on a Gram matrix");
  const Vector& ev = es.eigenvalues();
  const double top = ev[ev.size() - 1];
  if (!(top > 0.0) || ev[0] <= 1e-13 * top)
    throw NumericalError("singular Gram matrix (lambda=0 with rank-deficient data?)");
  const Vector inv_sqrt = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

// First entry of u above noise is made positive; v flips with it so that
// uᵀΣxy v keeps its sign.
void fix_sign(Vector& u, Vector& v) {
  const double scale = u.cwiseAbs().maxCoeff();
  for (Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-12 * scale) {
      if (u[i] < 0.0) {
        u = -u;
        v = -v;
      }
      return;
    }
  }
}

}  // namespace

CCAProblem::CCAProblem(SparseMatrix x, SparseMatrix y, double lambda_x,
                       double lambda_y)
    : x_(std::make_shared<const SparseMatrix>(std::move(x))),
      y_(std::make_shared<const SparseMatrix>(std::move(y))),
      lx_(lambda_x),
      ly_(lambda_y),
      passes_(std::make_shared<PassCounter>()),
      cross_(x_, y_, passes_.get()) {
  if (x_->rows() != y_->rows())
    throw std::invalid_argument("CCAProblem: X and Y row counts differ");
  if (lx_ < 0.0 || ly_ < 0.0)
    throw std::invalid_argument("CCAProblem: negative regularizer");
}

double CCAProblem::objective(const Vector& z) const {
  return -block_u(z).dot(cross_.apply(block_v(z)));
}

Vector CCAProblem::euclidean_gradient(const Vector& z) const {
  Vector g(dim());
  g.head(dim_x()) = -cross_.apply(block_v(z));
  g.tail(dim_y()) = -cross_.apply_transpose(block_u(z));
  return g;
}

Vector CCAProblem::euclidean_hessian_vec(const Vector& z,
                                         const Vector& eta) const {
  (void)z;  // f̄ is a quadratic form; its Hessian is constant
  Vector h(dim());
  h.head(dim_x()) = -cross_.apply(eta.tail(dim_y()));
  h.tail(dim_y()) = -cross_.apply_transpose(eta.head(dim_x()));
  return h;
}

ProductEllipsoid CCAProblem::manifold(PrecondPtr m_xx, PrecondPtr m_yy) const {
  std::vector<Ellipsoid> parts;
  parts.emplace_back(gram_op(x_, lx_, passes_.get()), std::move(m_xx));
  parts.emplace_back(gram_op(y_, ly_, passes_.get()), std::move(m_yy));
  return ProductEllipsoid(std::move(parts));
}

Problem CCAProblem::make_problem(const ProductEllipsoid& manifold) const {
  Problem p;
  p.manifold = &manifold;
  p.objective = [this](const Vector& z) { return objective(z); };
  p.euclidean_gradient = [this](const Vector& z) {
    return euclidean_gradient(z);
  };
  p.euclidean_hessian_vec = [this](const Vector& z, const Vector& eta) {
    return euclidean_hessian_vec(z, eta);
  };
  // Along a retracted ray both constraint norms and the coupling term are
  // quadratics in τ:
  //   f(R_z(τd)) = −n(τ)/√(nu(τ)·nv(τ)),
  // so backtracking trials cost no extra data passes. The decrease
  // f(R_z(τd)) − f(z) is returned through the rationalized form
  //   Q(τ) / (W(τ)·√(a0·b0·nu·nv)),  Q = n0²·nu·nv − n(τ)²·a0·b0,
  // whose constant term cancels symbolically, so it stays accurate far below
  // the rounding floor of f itself.
  p.line_decrease = [this](const Vector& z, const Vector& d) {
    const Vector u = block_u(z), v = block_v(z);
    const Vector du = block_u(d), dv = block_v(d);
    const Vector p0 = cross_.apply(v);   // Σxy v
    const Vector p1 = cross_.apply(dv);  // Σxy dv
    const double n0 = u.dot(p0);
    const double n1 = du.dot(p0) + u.dot(p1);
    const double n2 = du.dot(p1);
    const Vector su = gram_apply(*x_, lx_, u, passes_.get());
    const Vector sdu = gram_apply(*x_, lx_, du, passes_.get());
    const double a0 = u.dot(su), a1 = 2.0 * du.dot(su), a2 = du.dot(sdu);
    const Vector sv = gram_apply(*y_, ly_, v, passes_.get());
    const Vector sdv = gram_apply(*y_, ly_, dv, passes_.get());
    const double b0 = v.dot(sv), b1 = 2.0 * dv.dot(sv), b2 = dv.dot(sdv);
    // τ-coefficients of Q = n0²·nu·nv − n²·a0·b0 (the τ⁰ term is zero)
    const double q1 = n0 * n0 * (a0 * b1 + a1 * b0) - a0 * b0 * 2.0 * n0 * n1;
    const double q2 = n0 * n0 * (a0 * b2 + a1 * b1 + a2 * b0) -
                      a0 * b0 * (n1 * n1 + 2.0 * n0 * n2);
    const double q3 =
        n0 * n0 * (a1 * b2 + a2 * b1) - a0 * b0 * 2.0 * n1 * n2;
    const double q4 = n0 * n0 * a2 * b2 - a0 * b0 * n2 * n2;
    const double f0 = -n0 / std::sqrt(a0 * b0);
    return [=](double t) {
      const double nu = a0 + t * (a1 + t * a2);
      const double nv = b0 + t * (b1 + t * b2);
      if (!(nu > 0.0) || !(nv > 0.0))
        return std::numeric_limits<double>::infinity();
      const double n_t = n0 + t * (n1 + t * n2);
      const double root_t = std::sqrt(nu * nv);
      const double root_0 = std::sqrt(a0 * b0);
      const double w = n0 * root_t + n_t * root_0;
      const double w_scale =
          std::abs(n0) * root_t + std::abs(n_t) * root_0;
      if (std::abs(w) <= 1e-8 * w_scale || w_scale == 0.0)
        return -n_t / root_t - f0;  // sign change: plain difference is fine
      const double q = t * (q1 + t * (q2 + t * (q3 + t * q4)));
      return q / (w * root_0 * root_t);
    };
  };
  p.quality_from_objective = [](double f) { return -f; };
  p.passes = passes_.get();
  return p;
}

Vector CCAProblem::stack(const Vector& u, const Vector& v) const {
  if (u.size() != dim_x() || v.size() != dim_y())
    throw std::invalid_argument("CCAProblem::stack: block size mismatch");
  Vector z(dim());
  z.head(dim_x()) = u;
  z.tail(dim_y()) = v;
  return z;
}

Vector CCAProblem::default_start(const ProductEllipsoid& manifold) const {
  return manifold.normalize(Vector::Ones(dim()));
}

Matrix CCAProblem::dense_sigma() const {
  const Matrix xd = x_->to_dense();
  const Matrix yd = y_->to_dense();
  Matrix sigma = Matrix::Zero(dim(), dim());
  sigma.topLeftCorner(dim_x(), dim_x()) = xd.transpose() * xd;
  sigma.topLeftCorner(dim_x(), dim_x()).diagonal().array() += lx_;
  sigma.bottomRightCorner(dim_y(), dim_y()) = yd.transpose() * yd;
  sigma.bottomRightCorner(dim_y(), dim_y()).diagonal().array() += ly_;
  return sigma;
}

Matrix CCAProblem::dense_cross() const {
  return x_->to_dense().transpose() * y_->to_dense();
}

CCADenseSolution cca_dense_solve(const Matrix& sxx, const Matrix& syy,
                                 const Matrix& sxy) {
  const Matrix wx = spd_inverse_sqrt(sxx);
  const Matrix wy = spd_inverse_sqrt(syy);
  const Matrix r = wx * sxy * wy;
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  CCADenseSolution out;
  out.sigmas = svd.singularValues();
  out.u = wx * svd.matrixU().col(0);
  out.v = wy * svd.matrixV().col(0);
  fix_sign(out.u, out.v);
  return out;
}

CCAResult exact_cca(const Matrix& x, const Matrix& y, double lambda_x,
                    double lambda_y) {
  if (x.rows() != y.rows())
    throw std::invalid_argument("exact_cca: X and Y row counts differ");
  Matrix sxx = x.transpose() * x;
  sxx.diagonal().array() += lambda_x;
  Matrix syy = y.transpose() * y;
  syy.diagonal().array() += lambda_y;
  const CCADenseSolution sol = cca_dense_solve(sxx, syy, x.transpose() * y);
  CCAResult out;
  out.sigma1 = sol.sigmas[0];
  out.u = sol.u;
  out.v = sol.v;
  return out;
}

CCAResult exact_cca(const SparseMatrix& x, const SparseMatrix& y,
                    double lambda_x, double lambda_y) {
  return exact_cca(x.to_dense(), y.to_dense(), lambda_x, lambda_y);
}

CCAResult sketched_cca(const SparseMatrix& x, const SparseMatrix& y,
                       double lambda_x, double lambda_y, Index s,
                       std::uint64_t seed, const SketchedSolveOptions& opts) {
  if (s < std::max(x.cols(), y.cols()))
    throw std::invalid_argument("sketched_cca: need s >= max(d_x, d_y)");
  CCAProblem p(x, y, lambda_x, lambda_y);
  const CountSketch sketch(p.samples(), s, seed);
  const Matrix xs = sketch_apply(sketch, x, &p.passes());
  const Matrix ys = sketch_apply(sketch, y, &p.passes());

  PrecondPtr m_xx, m_yy;
  CCAResult warm;
  try {
    m_xx = build_sketched_gram(xs, lambda_x);
    m_yy = build_sketched_gram(ys, lambda_y);
    if (opts.warm_start) warm = exact_cca(xs, ys, lambda_x, lambda_y);
  } catch (const NumericalError&) {
    throw NumericalError(
        "sketched_cca: singular sketched preconditioner; rebuild with a new "
        "seed or a positive regularizer");
  }

  const ProductEllipsoid manifold = p.manifold(m_xx, m_yy);
  Vector z0;
  if (opts.warm_start) {
    // Normalize the sketched solution onto the true constraints.
    const Vector u0 =
        warm.u / std::sqrt(warm.u.dot(gram_apply(x, lambda_x, warm.u, &p.passes())));
    const Vector v0 =
        warm.v / std::sqrt(warm.v.dot(gram_apply(y, lambda_y, warm.v, &p.passes())));
    z0 = p.stack(u0, v0);
  } else {
    z0 = p.default_start(manifold);
  }

  const double setup_passes = p.passes().passes;
  const Problem prob = p.make_problem(manifold);
  SolveResult run = opts.use_rgd ? rgd(prob, z0, opts.solver)
                                 : rcg(prob, z0, opts.solver);
  run.trace.setup_passes = setup_passes;

  CCAResult out;
  out.u = p.block_u(run.x);
  out.v = p.block_v(run.x);
  out.sigma1 = out.u.dot(cross_gram_apply(x, y, out.v, false, &p.passes()));
  out.trace = std::move(run.trace);
  return out;
}

double cca_condition_bound(const CCAProblem& p, const Preconditioner& m_xx,
                           const Preconditioner& m_yy) {
  if (m_xx.dim() != p.dim_x() || m_yy.dim() != p.dim_y())
    throw std::invalid_argument("cca_condition_bound: metric dimension mismatch");
  const Matrix sigma = p.dense_sigma();
  const CCADenseSolution sol =
      cca_dense_solve(sigma.topLeftCorner(p.dim_x(), p.dim_x()),
                      sigma.bottomRightCorner(p.dim_y(), p.dim_y()),
                      p.dense_cross());
  if (sol.sigmas.size() < 2)
    throw NumericalError("cca_condition_bound: needs at least two correlations");
  const double gap = sol.sigmas[0] - sol.sigmas[1];
  if (gap < 1e-12)
    throw NumericalError("cca_condition_bound: degenerate correlation gap");
  Matrix m = Matrix::Zero(p.dim(), p.dim());
  m.topLeftCorner(p.dim_x(), p.dim_x()) = m_xx.to_dense();
  m.bottomRightCorner(p.dim_y(), p.dim_y()) = m_yy.to_dense();
  return 2.0 * sol.sigmas[0] / gap * pencil_condition_number(sigma, m);
}

}  // namespace ellopt
