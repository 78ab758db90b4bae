#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "checks.hpp"
#include "ellopt/cca.hpp"

using namespace ellopt;
using test::Rng;

namespace {

struct DenseCCAView {
  Matrix sxx, syy, sxy;
  Matrix mxx, myy;

  static DenseCCAView of(const CCAProblem& p, const Preconditioner& m_xx,
                         const Preconditioner& m_yy) {
    DenseCCAView v;
    const Matrix sigma = p.dense_sigma();
    v.sxx = sigma.topLeftCorner(p.dim_x(), p.dim_x());
    v.syy = sigma.bottomRightCorner(p.dim_y(), p.dim_y());
    v.sxy = p.dense_cross();
    v.mxx = m_xx.to_dense();
    v.myy = m_yy.to_dense();
    return v;
  }

  // Eq.-level Riemannian gradient: −[Pu Mxx⁻¹ Σxy v; Pv Myy⁻¹ Σxyᵀ u]
  Vector grad_formula(const Vector& u, const Vector& v) const {
    const Matrix pu = test::dense_projection_matrix(sxx, mxx, u);
    const Matrix pv = test::dense_projection_matrix(syy, myy, v);
    Vector out(u.size() + v.size());
    out.head(u.size()) = -(pu * mxx.llt().solve(sxy * v));
    out.tail(v.size()) = -(pv * myy.llt().solve(sxy.transpose() * u));
    return out;
  }

  // Eq.-level Riemannian Hessian with blockwise curvature scalars
  Vector hess_formula(const Vector& u, const Vector& v,
                      const Vector& eta) const {
    const Index du = u.size(), dv = v.size();
    const Matrix pu = test::dense_projection_matrix(sxx, mxx, u);
    const Matrix pv = test::dense_projection_matrix(syy, myy, v);
    const Matrix pu_perp = Matrix::Identity(du, du) - pu;
    const Matrix pv_perp = Matrix::Identity(dv, dv) - pv;
    const double cu = u.dot(mxx * (pu_perp * mxx.llt().solve(sxy * v)));
    const double cv =
        v.dot(myy * (pv_perp * myy.llt().solve(sxy.transpose() * u)));
    Vector mid(du + dv);
    mid.head(du) = cu * (sxx * eta.head(du)) - sxy * eta.tail(dv);
    mid.tail(dv) = cv * (syy * eta.tail(dv)) - sxy.transpose() * eta.head(du);
    Vector out(du + dv);
    out.head(du) = pu * mxx.llt().solve(mid.head(du));
    out.tail(dv) = pv * myy.llt().solve(mid.tail(dv));
    return out;
  }
};

}  // namespace

TEST_SUITE_BEGIN("cca");

TEST_CASE("euclidean pieces on degenerate data") {
  Rng rng(81);
  // disjoint row supports make Σxy = 0: the objective is identically zero
  Matrix xd = Matrix::Zero(8, 3), yd = Matrix::Zero(8, 2);
  for (Index i = 0; i < 8; ++i) {
    if (i % 2 == 0)
      xd(i, i % 3) = 1.0 + static_cast<double>(i);
    else
      yd(i, i % 2) = 2.0;
  }
  CCAProblem p(SparseMatrix::from_dense(xd), SparseMatrix::from_dense(yd), 0.1,
               0.1);
  const auto manifold = p.manifold(identity_precond(3), identity_precond(2));
  const Vector z = test::random_point(manifold, rng);
  CHECK(p.objective(z) == 0.0);
  CHECK(p.euclidean_gradient(z).norm() == 0.0);

  // X == Y with orthonormal columns and λ = 0: f(z) = −uᵀv
  Matrix q = test::random_matrix(rng, 30, 4);
  q = Eigen::HouseholderQR<Matrix>(q).householderQ() * Matrix::Identity(30, 4);
  CCAProblem same(SparseMatrix::from_dense(q), SparseMatrix::from_dense(q), 0.0,
                  0.0);
  const auto sphere = same.manifold(identity_precond(4), identity_precond(4));
  const Vector zz = test::random_point(sphere, rng);
  CHECK(same.objective(zz) ==
        doctest::Approx(-zz.head(4).dot(zz.tail(4))).epsilon(1e-12));
}

TEST_CASE("generic assembly matches the specialized formulas") {
  Rng rng(82);
  for (int rep = 0; rep < 10; ++rep) {
    CCAProblem p(test::random_sparse(rng, 40, 5, 0.7),
                 test::random_sparse(rng, 40, 4, 0.7), 0.3, 0.2);
    const PrecondPtr m_xx = dense_spd_precond(test::random_spd(rng, 5));
    const PrecondPtr m_yy = dense_spd_precond(test::random_spd(rng, 4));
    const auto manifold = p.manifold(m_xx, m_yy);
    const auto view = DenseCCAView::of(p, *m_xx, *m_yy);

    const Vector z = test::random_point(manifold, rng);
    const Vector u = p.block_u(z), v = p.block_v(z);
    const Vector eg = p.euclidean_gradient(z);
    const Vector rgrad = manifold.egrad_to_rgrad(z, eg);
    CHECK(test::rel_err(rgrad, view.grad_formula(u, v)) < 1e-10);

    const Vector eta = test::random_tangent(manifold, z, rng);
    const Vector hess =
        manifold.hess_apply(z, eg, p.euclidean_hessian_vec(z, eta), eta, rgrad);
    CHECK(test::rel_err(hess, view.hess_formula(u, v, eta)) < 1e-10);

    // the route through the Weingarten map agrees as well
    const Vector hess_w = manifold.hess_apply_weingarten(
        z, eg, p.euclidean_hessian_vec(z, eta), eta);
    CHECK(test::rel_err(hess_w, hess) < 1e-10);
  }
}

TEST_CASE("line decrease model equals the direct objective difference") {
  Rng rng(83);
  CCAProblem p(test::random_sparse(rng, 25, 4, 0.8),
               test::random_sparse(rng, 25, 3, 0.8), 0.2, 0.4);
  const auto manifold =
      p.manifold(dense_spd_precond(test::random_spd(rng, 4)),
                 dense_spd_precond(test::random_spd(rng, 3)));
  const Problem prob = p.make_problem(manifold);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector z = test::random_point(manifold, rng);
    const Vector d = test::random_tangent(manifold, z, rng);
    const auto decrease = prob.line_decrease(z, d);
    const double f0 = p.objective(z);
    for (double t : {1e-3, 0.05, 0.3, 1.0}) {
      const double direct = p.objective(manifold.retract(z, t * d)) - f0;
      CHECK(std::abs(decrease(t) - direct) <=
            1e-12 * std::max(1.0, std::abs(f0)));
    }
  }
}

TEST_CASE("exact oracle on hand instances") {
  Rng rng(84);
  // perfectly correlated: Y == X of full column rank, no ridge
  const SparseMatrix x = test::random_sparse(rng, 20, 4, 0.9);
  const CCAResult same = exact_cca(x, x, 0.0, 0.0);
  CHECK(same.sigma1 == doctest::Approx(1.0).epsilon(1e-10));

  // orthogonal datasets: every correlation vanishes
  Matrix xd = Matrix::Zero(6, 2), yd = Matrix::Zero(6, 2);
  xd(0, 0) = 1;
  xd(1, 1) = 1;
  yd(2, 0) = 1;
  yd(3, 1) = 1;
  const CCAResult zero = exact_cca(SparseMatrix::from_dense(xd),
                                   SparseMatrix::from_dense(yd), 0.0, 0.0);
  CHECK(zero.sigma1 == doctest::Approx(0.0));

  // 2×2 / 2×1 fixture against an independently assembled dense solve
  Matrix x2(2, 2), y2(2, 1);
  x2 << 1, 0, 0, 1;
  y2 << 1, 1;
  const CCAResult small = exact_cca(SparseMatrix::from_dense(x2),
                                    SparseMatrix::from_dense(y2), 0.0, 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es_x(Matrix(x2.transpose() * x2));
  Eigen::SelfAdjointEigenSolver<Matrix> es_y(Matrix(y2.transpose() * y2));
  const Matrix r = es_x.operatorInverseSqrt() * (x2.transpose() * y2) *
                   es_y.operatorInverseSqrt();
  Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CHECK(small.sigma1 == doctest::Approx(svd.singularValues()[0]).epsilon(1e-12));
  Vector u_exp = es_x.operatorInverseSqrt() * svd.matrixU().col(0);
  Vector v_exp = es_y.operatorInverseSqrt() * svd.matrixV().col(0);
  if (u_exp[0] < 0) {
    u_exp = -u_exp;
    v_exp = -v_exp;
  }
  CHECK(test::rel_err(small.u, u_exp) < 1e-12);
  CHECK(test::rel_err(small.v, v_exp) < 1e-12);

  // result constraints and maximality over random feasible probes
  const auto [xd3, yd3] = test::correlated_pair(rng, 60, 5, 4);
  const SparseMatrix x3 = SparseMatrix::from_dense(xd3);
  const SparseMatrix y3 = SparseMatrix::from_dense(yd3);
  const CCAResult best = exact_cca(x3, y3, 0.15, 0.25);
  CHECK(std::abs(best.u.dot(gram_apply(x3, 0.15, best.u)) - 1.0) < 1e-8);
  CHECK(std::abs(best.v.dot(gram_apply(y3, 0.25, best.v)) - 1.0) < 1e-8);
  CHECK(std::abs(best.u.dot(cross_gram_apply(x3, y3, best.v, false)) -
                 best.sigma1) < 1e-8);
  for (int probe = 0; probe < 100; ++probe) {
    Vector pu = test::random_vector(rng, 5);
    Vector pv = test::random_vector(rng, 4);
    pu /= std::sqrt(pu.dot(gram_apply(x3, 0.15, pu)));
    pv /= std::sqrt(pv.dot(gram_apply(y3, 0.25, pv)));
    CHECK(pu.dot(cross_gram_apply(x3, y3, pv, false)) <= best.sigma1 + 1e-10);
  }

  // λ = 0 with a rank-deficient Gram is refused
  Matrix deficient = test::random_matrix(rng, 10, 3);
  deficient.col(2).setZero();
  const SparseMatrix y_ok = test::random_sparse(rng, 10, 2, 0.9);
  CHECK_THROWS_AS(
      exact_cca(SparseMatrix::from_dense(deficient), y_ok, 0.0, 0.1),
      NumericalError);
}

TEST_CASE("signed permutation sketch reproduces the exact preconditioner") {
  Rng rng(85);
  const auto [xd, yd] = test::correlated_pair(rng, 24, 4, 3);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const SparseMatrix y = SparseMatrix::from_dense(yd);
  const double lx = 0.2, ly = 0.3;

  std::vector<Index> perm(24);
  std::vector<int> sign(24);
  for (Index i = 0; i < 24; ++i) {
    perm[i] = (i * 7 + 3) % 24;  // fixed permutation: every bucket distinct
    sign[i] = (i % 3 == 0) ? -1 : 1;
  }
  const CountSketch s = CountSketch::from_maps(24, 24, perm, sign);

  CCAProblem p(x, y, lx, ly);
  const Matrix xs = sketch_apply(s, x);
  const Matrix ys = sketch_apply(s, y);
  const auto m_sketch_x = build_sketched_gram(xs, lx);
  const auto m_sketch_y = build_sketched_gram(ys, ly);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector v = test::random_vector(rng, 4);
    CHECK(test::rel_err(m_sketch_x->apply(v), gram_apply(x, lx, v)) < 1e-10);
    const Vector w = test::random_vector(rng, 3);
    CHECK(test::rel_err(m_sketch_y->apply(w), gram_apply(y, ly, w)) < 1e-10);
  }

  // same start, sketched-exact metric vs. true exact metric: same answer
  SolverConfig cfg;
  cfg.max_iters = 500;
  cfg.grad_tol = 1e-10;
  const auto manifold_sketch = p.manifold(m_sketch_x, m_sketch_y);
  const Vector z0 = p.default_start(manifold_sketch);
  const SolveResult run_sketch = rcg(p.make_problem(manifold_sketch), z0, cfg);

  CCAProblem p2(x, y, lx, ly);
  const auto manifold_exact =
      p2.manifold(build_exact_gram(x, lx), build_exact_gram(y, ly));
  const SolveResult run_exact = rcg(p2.make_problem(manifold_exact), z0, cfg);

  CHECK(run_sketch.trace.status == SolveStatus::converged);
  CHECK(run_exact.trace.status == SolveStatus::converged);
  const double s1 = -p.objective(run_sketch.x);
  const double s2 = -p2.objective(run_exact.x);
  CHECK(std::abs(s1 - s2) < 1e-8);
}

TEST_CASE("sketched solve reaches the oracle") {
  Rng rng(86);
  const auto [xd, yd] = test::correlated_pair(rng, 600, 10, 8);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const SparseMatrix y = SparseMatrix::from_dense(yd);
  const CCAResult oracle = exact_cca(x, y, 0.1, 0.1);

  SketchedSolveOptions opts;
  opts.solver.max_iters = 300;
  opts.solver.grad_tol = 1e-10;
  opts.solver.reference_quality = oracle.sigma1;
  const CCAResult run = sketched_cca(x, y, 0.1, 0.1, 200, 7, opts);
  CHECK(run.trace.status == SolveStatus::converged);
  CHECK(std::abs(run.sigma1 - oracle.sigma1) / oracle.sigma1 <= 1e-6);
  CHECK(std::abs(run.u.dot(gram_apply(x, 0.1, run.u)) - 1.0) < 1e-8);
  CHECK(std::abs(run.v.dot(gram_apply(y, 0.1, run.v)) - 1.0) < 1e-8);
  CHECK(run.trace.setup_passes > 0.0);

  CHECK_THROWS_AS(sketched_cca(x, y, 0.1, 0.1, 5, 7), std::invalid_argument);
}

TEST_CASE("warm start is feasible on both constraints") {
  Rng rng(91);
  const auto [xd, yd] = test::correlated_pair(rng, 200, 6, 5);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const SparseMatrix y = SparseMatrix::from_dense(yd);
  SketchedSolveOptions opts;
  opts.solver.max_iters = 0;  // stop at the warm start itself
  opts.solver.grad_tol = 1e-300;
  const CCAResult warm = sketched_cca(x, y, 0.05, 0.05, 60, 21, opts);
  CHECK(std::abs(warm.u.dot(gram_apply(x, 0.05, warm.u)) - 1.0) <= 1e-10);
  CHECK(std::abs(warm.v.dot(gram_apply(y, 0.05, warm.v)) - 1.0) <= 1e-10);
}

TEST_CASE("tied top correlations terminate by budget") {
  Rng rng(87);
  Matrix q = test::random_matrix(rng, 30, 4);
  q = Eigen::HouseholderQR<Matrix>(q).householderQ() * Matrix::Identity(30, 4);
  const SparseMatrix x = SparseMatrix::from_dense(q);
  // Y spans two of X's columns: σ₁ = σ₂ = 1, so there is no convergence
  // guarantee and the run must stop at its budget without failing
  const SparseMatrix y = SparseMatrix::from_dense(Matrix(q.leftCols(2)));
  SketchedSolveOptions opts;
  opts.warm_start = false;  // the warm start would land on an optimum
  opts.solver.max_iters = 3;
  opts.solver.grad_tol = 1e-16;
  const CCAResult run = sketched_cca(x, y, 0.0, 0.0, 30, 11, opts);
  CHECK(run.trace.status == SolveStatus::max_iters);
  CHECK(std::abs(run.u.dot(gram_apply(x, 0.0, run.u)) - 1.0) < 1e-8);
}

TEST_CASE("rebuild advice on a singular sketched preconditioner") {
  Rng rng(88);
  Matrix xd = test::random_matrix(rng, 12, 3);
  xd.col(2).setZero();  // rank deficient, so the sketched Gram is singular
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const SparseMatrix y = test::random_sparse(rng, 12, 2, 0.9);
  CHECK_THROWS_AS(sketched_cca(x, y, 0.0, 0.1, 12, 3), NumericalError);
}

TEST_CASE("condition bound dominates the measured hessian spectrum") {
  Rng rng(89);
  const auto [xd, yd] = test::correlated_pair(rng, 80, 6, 5, 10.0);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const SparseMatrix y = SparseMatrix::from_dense(yd);
  const double lx = 0.2, ly = 0.2;
  CCAProblem p(x, y, lx, ly);
  const CCAResult oracle = exact_cca(x, y, lx, ly);
  const Vector z_star = p.stack(oracle.u, oracle.v);

  const Matrix sigma = p.dense_sigma();
  const PrecondPtr exact_x =
      dense_spd_precond(Matrix(sigma.topLeftCorner(6, 6)));
  const PrecondPtr exact_y =
      dense_spd_precond(Matrix(sigma.bottomRightCorner(5, 5)));

  // with M = Σ the pencil term is 1 and the bound is the pure gap term
  const CCADenseSolution sol =
      cca_dense_solve(sigma.topLeftCorner(6, 6), sigma.bottomRightCorner(5, 5),
                      p.dense_cross());
  const double gap_bound = 2.0 * sol.sigmas[0] / (sol.sigmas[0] - sol.sigmas[1]);
  CHECK(cca_condition_bound(p, *exact_x, *exact_y) ==
        doctest::Approx(gap_bound).epsilon(1e-9));
  // scale invariance of the pencil term
  const PrecondPtr scaled_x =
      dense_spd_precond(Matrix(3.0 * sigma.topLeftCorner(6, 6)));
  const PrecondPtr scaled_y =
      dense_spd_precond(Matrix(3.0 * sigma.bottomRightCorner(5, 5)));
  CHECK(cca_condition_bound(p, *scaled_x, *scaled_y) ==
        doctest::Approx(gap_bound).epsilon(1e-9));

  const CountSketch sketch(80, 30, 13);
  const PrecondPtr sk_x = build_sketched_gram(sketch_apply(sketch, x), lx);
  const PrecondPtr sk_y = build_sketched_gram(sketch_apply(sketch, y), ly);

  const std::vector<std::pair<PrecondPtr, PrecondPtr>> metrics = {
      {identity_precond(6), identity_precond(5)},
      {exact_x, exact_y},
      {sk_x, sk_y},
      {build_dominant_subspace(x, lx, 3), build_dominant_subspace(y, ly, 3)},
      {dense_spd_precond(test::random_spd(rng, 6)),
       dense_spd_precond(test::random_spd(rng, 5))},
  };
  for (const auto& [m_xx, m_yy] : metrics) {
    const auto manifold = p.manifold(m_xx, m_yy);
    const Problem prob = p.make_problem(manifold);
    const HessianSpectrum spec = hessian_condition_at(prob, z_star);
    CHECK(!spec.indefinite);
    const double bound = cca_condition_bound(p, *m_xx, *m_yy);
    CHECK(spec.kappa <= bound * 1.01);
  }

  // the objective value at the optimum is −σ₁
  CHECK(std::abs(p.objective(z_star) + oracle.sigma1) < 1e-10);
}

TEST_CASE("per-iteration data passes are constant") {
  Rng rng(90);
  const auto [xd, yd] = test::correlated_pair(rng, 120, 6, 5);
  for (bool use_rgd : {false, true}) {
    CCAProblem p(SparseMatrix::from_dense(xd), SparseMatrix::from_dense(yd),
                 0.1, 0.1);
    const CountSketch sketch(120, 40, 3);
    const Matrix xs = sketch_apply(sketch, p.x(), &p.passes());
    const Matrix ys = sketch_apply(sketch, p.y(), &p.passes());
    CHECK(p.passes().passes == 2.0);  // sketching is one pass per matrix
    const auto manifold =
        p.manifold(build_sketched_gram(xs, 0.1), build_sketched_gram(ys, 0.1));
    SolverConfig cfg;
    cfg.max_iters = 25;
    cfg.grad_tol = 1e-14;
    const Problem prob = p.make_problem(manifold);
    const Vector z0 = p.default_start(manifold);
    const SolveResult run = use_rgd ? rgd(prob, z0, cfg) : rcg(prob, z0, cfg);
    const auto& rec = run.trace.records;
    REQUIRE(rec.size() >= 4);
    const double delta = rec[1].passes - rec[0].passes;
    CHECK(delta > 0.0);
    for (std::size_t k = 0; k + 1 < rec.size(); ++k)
      CHECK(rec[k + 1].passes - rec[k].passes == delta);
  }
}

TEST_SUITE_END();
