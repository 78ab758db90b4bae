#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "checks.hpp"
#include "ellopt/lda.hpp"

using namespace ellopt;
using test::Rng;

namespace {

// Scatter matrices straight from their definitions, as an independent oracle.
std::pair<Matrix, Matrix> scatter_by_definition(const Matrix& x,
                                                const std::vector<int>& labels,
                                                Index l) {
  const Index d = x.cols();
  std::vector<Index> counts(l, 0);
  Matrix means = Matrix::Zero(l, d);
  for (Index i = 0; i < x.rows(); ++i) {
    ++counts[labels[i] - 1];
    means.row(labels[i] - 1) += x.row(i);
  }
  Vector global = Vector::Zero(d);
  for (Index k = 0; k < l; ++k) {
    global += means.row(k).transpose();
    means.row(k) /= static_cast<double>(counts[k]);
  }
  global /= static_cast<double>(x.rows());
  Matrix sw = Matrix::Zero(d, d);
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector c = x.row(i).transpose() - means.row(labels[i] - 1).transpose();
    sw += c * c.transpose();
  }
  Matrix sb = Matrix::Zero(d, d);
  for (Index k = 0; k < l; ++k) {
    const Vector c = means.row(k).transpose() - global;
    sb += counts[k] * (c * c.transpose());
  }
  return {sw, sb};
}

// Four classes at tetrahedron vertices, two points per class with a common
// offset: S_B ∝ I₃ exactly, so the top two pencil eigenvalues tie.
std::pair<Matrix, std::vector<double>> tied_lda_instance() {
  Matrix verts(4, 3);
  verts << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  verts /= std::sqrt(3.0);
  Vector e(3);
  e << 0.3, 0.1, -0.2;
  Matrix x(8, 3);
  std::vector<double> labels(8);
  for (Index k = 0; k < 4; ++k) {
    x.row(2 * k) = verts.row(k) + e.transpose();
    x.row(2 * k + 1) = verts.row(k) - e.transpose();
    labels[2 * k] = labels[2 * k + 1] = static_cast<double>(k + 1);
  }
  return {x, labels};
}

}  // namespace

TEST_SUITE_BEGIN("lda");

TEST_CASE("label remapping squeezes arbitrary values to 1..l") {
  const std::vector<double> raw{7.5, -2.0, 7.5, 3.0};
  const auto mapped = LDAProblem::remap_labels(raw);
  CHECK(mapped == std::vector<int>{3, 1, 3, 2});
  CHECK_THROWS_AS(
      LDAProblem::remap_labels({1.0, std::numeric_limits<double>::quiet_NaN()}),
      DataError);
}

TEST_CASE("class statistics validation") {
  Rng rng(101);
  const SparseMatrix x = test::random_sparse(rng, 6, 3, 0.8);
  CHECK_THROWS_AS(compute_class_stats(x, {1, 1, 2, 2, 3, 9}, 3), DataError);
  CHECK_THROWS_AS(compute_class_stats(x, {1, 1, 1, 1, 1, 1}, 2), DataError);
  PassCounter counter;
  compute_class_stats(x, {1, 1, 2, 2, 1, 2}, 2, &counter);
  CHECK(counter.passes == 1.0);
}

TEST_CASE("scatter operators on degenerate data") {
  // every point identical: both scatters vanish
  Matrix same = Matrix::Ones(5, 3) * 2.5;
  LDAProblem p(SparseMatrix::from_dense(same), {1, 1, 2, 2, 1}, 0.7);
  CHECK(p.dense_scatter_within().norm() == doctest::Approx(0.0));
  CHECK(p.dense_scatter_between().norm() == doctest::Approx(0.0));

  // a single class: no between-class scatter, S_w is the centered Gram
  Rng rng(102);
  const Matrix xd = test::random_matrix(rng, 12, 4);
  LDAProblem single(SparseMatrix::from_dense(xd),
                    std::vector<double>(12, 1.0), 0.0);
  CHECK(single.dense_scatter_between().norm() < 1e-12);
  const Eigen::RowVectorXd col_mean = xd.colwise().mean();
  const Matrix centered = xd.rowwise() - col_mean;
  CHECK(test::rel_err(single.dense_scatter_within(),
                      Matrix(centered.transpose() * centered)) < 1e-12);
}

TEST_CASE("two classes on a line") {
  Matrix x(4, 1);
  x << 0, 0, 2, 2;
  const std::vector<double> labels{1, 1, 2, 2};
  LDAProblem p(SparseMatrix::from_dense(x), labels, 1.0);
  CHECK(p.dense_scatter_between()(0, 0) == doctest::Approx(4.0));
  CHECK(p.dense_scatter_within()(0, 0) == doctest::Approx(0.0));

  const LDAResult r = exact_lda(SparseMatrix::from_dense(x), labels, 1.0);
  CHECK(r.rho1 == doctest::Approx(4.0));
  CHECK(!r.degenerate);
  CHECK(std::abs(r.w[0] * (0.0 + 1.0) * r.w[0] - 1.0) < 1e-12);
}

TEST_CASE("scatter matrices match their summation definitions") {
  Rng rng(103);
  const auto [xd, labels] = test::labeled_blobs(rng, 50, 5, 3);
  LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.0);
  const auto [sw, sb] = scatter_by_definition(xd, p.labels(), 3);
  CHECK(test::rel_err(p.dense_scatter_within(), sw) < 1e-9);
  CHECK(test::rel_err(p.dense_scatter_between(), sb) < 1e-9);

  // the √n_k-weighted rows of the between-class factor sum to zero
  Vector weighted = Vector::Zero(5);
  for (Index k = 0; k < 3; ++k)
    weighted += std::sqrt(static_cast<double>(p.stats().counts[k])) *
                p.between_factor().row(k).transpose();
  CHECK(weighted.norm() < 1e-10 * xd.norm());
}

TEST_CASE("centered operator equals the dense centered matrix") {
  Rng rng(104);
  const auto [xd, labels] = test::labeled_blobs(rng, 30, 4, 2);
  LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.3);
  const Matrix xhat = p.dense_centered();

  const double before = p.passes().passes;
  const Vector v = test::random_vector(rng, 4);
  CHECK(test::rel_err(p.centered_apply(v), Vector(xhat * v)) < 1e-10);
  CHECK(p.passes().passes == before + 1.0);

  const Vector r = test::random_vector(rng, 30);
  CHECK(test::rel_err(p.centered_apply_transpose(r),
                      Vector(xhat.transpose() * r)) < 1e-10);

  Matrix sw_reg = xhat.transpose() * xhat;
  sw_reg.diagonal().array() += 0.3;
  CHECK(test::rel_err(p.scatter_within_reg_apply(v), Vector(sw_reg * v)) <
        1e-10);
  CHECK(test::rel_err(p.scatter_between_apply(v),
                      Vector(p.dense_scatter_between() * v)) < 1e-10);
}

TEST_CASE("generic assembly matches the specialized gradient and hessian") {
  Rng rng(105);
  for (int rep = 0; rep < 8; ++rep) {
    const auto [xd, labels] = test::labeled_blobs(rng, 40, 5, 3);
    LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.4);
    const Matrix m_dense = test::random_spd(rng, 5);
    const auto manifold = p.manifold(dense_spd_precond(m_dense));
    Matrix b_dense = p.dense_scatter_within();
    b_dense.diagonal().array() += 0.4;
    const Matrix sb = p.dense_scatter_between();

    const Vector w = test::random_point(manifold, rng);
    const Vector eg = p.euclidean_gradient(w);
    const Vector rgrad = manifold.egrad_to_rgrad(w, eg);

    const Matrix proj = test::dense_projection_matrix(b_dense, m_dense, w);
    CHECK(test::rel_err(rgrad, Vector(-(proj * m_dense.llt().solve(sb * w)))) <
          1e-10);

    // curvature scalar wᵀS_B w + g_w(w, grad f); the printed specialization
    // flips the sign of the metric term, which only holds where grad f = 0
    const Vector eta = test::random_tangent(manifold, w, rng);
    const double scalar = w.dot(sb * w) + w.dot(m_dense * rgrad);
    const Vector expected =
        proj * m_dense.llt().solve(Vector(-(sb * eta) + scalar * (b_dense * eta)));
    const Vector hess =
        manifold.hess_apply(w, eg, p.euclidean_hessian_vec(w, eta), eta, rgrad);
    CHECK(test::rel_err(hess, expected) < 1e-10);
  }
}

TEST_CASE("line decrease model equals the direct objective difference") {
  Rng rng(106);
  const auto [xd, labels] = test::labeled_blobs(rng, 25, 4, 2);
  LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.5);
  const auto manifold = p.manifold(dense_spd_precond(test::random_spd(rng, 4)));
  const Problem prob = p.make_problem(manifold);
  for (int rep = 0; rep < 8; ++rep) {
    const Vector w = test::random_point(manifold, rng);
    const Vector d = test::random_tangent(manifold, w, rng);
    const auto decrease = prob.line_decrease(w, d);
    const double f0 = p.objective(w);
    for (double t : {1e-3, 0.05, 0.4, 1.2}) {
      const double direct = p.objective(manifold.retract(w, t * d)) - f0;
      CHECK(std::abs(decrease(t) - direct) <=
            1e-12 * std::max(1.0, std::abs(f0)));
    }
  }
}

TEST_CASE("exact oracle against an independent eigensolver") {
  Rng rng(107);
  const auto [xd, labels] = test::labeled_blobs(rng, 60, 6, 3);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const LDAResult r = exact_lda(x, labels, 0.5);

  LDAProblem p(x, labels, 0.5);
  Matrix a = p.dense_scatter_within();
  a.diagonal().array() += 0.5;
  // independent route: eigenvalues of (S_w+λI)⁻¹ S_B
  const Eigen::EigenSolver<Matrix> es(a.inverse() * p.dense_scatter_between());
  CHECK(r.rho1 ==
        doctest::Approx(es.eigenvalues().real().maxCoeff()).epsilon(1e-9));
  CHECK(std::abs(r.w.dot(a * r.w) - 1.0) < 1e-8);
  CHECK(std::abs(r.w.dot(p.dense_scatter_between() * r.w) - r.rho1) < 1e-8);

  // gradient vanishes at the oracle optimum
  const auto manifold = p.manifold(identity_precond(6));
  const Vector grad =
      manifold.egrad_to_rgrad(r.w, p.euclidean_gradient(r.w));
  CHECK(std::sqrt(manifold.inner(grad, grad)) <= 1e-8);

  // S_B = 0 is reported as degenerate
  Matrix same = Matrix::Ones(6, 2);
  const LDAResult degen =
      exact_lda(SparseMatrix::from_dense(same), {1, 1, 2, 2, 1, 2}, 1.0);
  CHECK(degen.degenerate);
  CHECK(degen.rho1 == doctest::Approx(0.0));

  // λ = 0 with singular within-class scatter is refused
  Matrix flat(4, 2);
  flat << 0, 0, 0, 0, 1, 0, 1, 0;
  CHECK_THROWS_AS(
      exact_lda(SparseMatrix::from_dense(flat), {1, 1, 2, 2}, 0.0),
      NumericalError);
}

TEST_CASE("signed permutation sketch reproduces the exact metric") {
  Rng rng(108);
  const auto [xd, labels] = test::labeled_blobs(rng, 20, 4, 2);
  LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.6);
  std::vector<Index> perm(20);
  std::vector<int> sign(20);
  for (Index i = 0; i < 20; ++i) {
    perm[i] = (i * 3 + 5) % 20;
    sign[i] = (i % 2 == 0) ? 1 : -1;
  }
  const CountSketch s = CountSketch::from_maps(20, 20, perm, sign);
  const auto m = build_sketched_gram(p.sketch_centered(s), 0.6);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector v = test::random_vector(rng, 4);
    CHECK(test::rel_err(m->apply(v), p.scatter_within_reg_apply(v)) < 1e-10);
  }
}

TEST_CASE("sketched solve reaches the oracle") {
  Rng rng(109);
  const auto [xd, labels] = test::labeled_blobs(rng, 800, 10, 3);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const LDAResult oracle = exact_lda(x, labels, 0.1);

  SketchedSolveOptions opts;
  opts.solver.max_iters = 300;
  opts.solver.grad_tol = 1e-10;
  opts.solver.reference_quality = oracle.rho1;
  const LDAResult run = sketched_lda(x, labels, 0.1, 150, 5, opts);
  CHECK(run.trace.status == SolveStatus::converged);
  CHECK(std::abs(run.rho1 - oracle.rho1) / oracle.rho1 <= 1e-6);

  LDAProblem p(x, labels, 0.1);
  CHECK(std::abs(run.w.dot(p.scatter_within_reg_apply(run.w)) - 1.0) < 1e-8);

  CHECK_THROWS_AS(sketched_lda(x, labels, 0.1, 5, 5), std::invalid_argument);
}

TEST_CASE("tied leading eigenvalues terminate by budget") {
  const auto [xd, labels] = tied_lda_instance();
  const SparseMatrix x = SparseMatrix::from_dense(xd);

  LDAProblem p(x, labels, 0.2);
  const Vector rho = lda_spectrum(p);
  CHECK(rho[0] == doctest::Approx(rho[1]).epsilon(1e-12));

  SketchedSolveOptions opts;
  opts.warm_start = false;
  opts.solver.max_iters = 3;
  opts.solver.grad_tol = 1e-16;
  const LDAResult run = sketched_lda(x, labels, 0.2, 8, 17, opts);
  CHECK(run.trace.status == SolveStatus::max_iters);
  CHECK(std::abs(run.w.dot(p.scatter_within_reg_apply(run.w)) - 1.0) < 1e-8);

  CHECK_THROWS_AS(lda_condition_bound(p, *identity_precond(3)),
                  NumericalError);
}

TEST_CASE("condition bound dominates the measured hessian spectrum") {
  Rng rng(110);
  // l ≤ d keeps S_B rank deficient, so the smallest pencil eigenvalue is 0
  const auto [xd, labels] = test::labeled_blobs(rng, 70, 6, 3);
  const SparseMatrix x = SparseMatrix::from_dense(xd);
  const double lambda = 0.3;
  LDAProblem p(x, labels, lambda);
  const Vector rho = lda_spectrum(p);
  CHECK(rho[rho.size() - 1] == doctest::Approx(0.0));

  const LDAResult oracle = exact_lda(x, labels, lambda);
  Matrix sw_reg = p.dense_scatter_within();
  sw_reg.diagonal().array() += lambda;

  const PrecondPtr exact = dense_spd_precond(sw_reg);
  const double gap_bound = rho[0] / (rho[0] - rho[1]);
  CHECK(lda_condition_bound(p, *exact) ==
        doctest::Approx(gap_bound).epsilon(1e-9));
  const PrecondPtr scaled = dense_spd_precond(Matrix(4.0 * sw_reg));
  CHECK(lda_condition_bound(p, *scaled) ==
        doctest::Approx(gap_bound).epsilon(1e-9));

  const CountSketch sketch(70, 30, 23);
  const std::vector<PrecondPtr> metrics = {
      identity_precond(6),
      exact,
      build_sketched_gram(p.sketch_centered(sketch), lambda),
      build_dominant_subspace(p.dense_scatter_within(), lambda, 3),
      dense_spd_precond(test::random_spd(rng, 6)),
  };
  for (const auto& m : metrics) {
    const auto manifold = p.manifold(m);
    const Problem prob = p.make_problem(manifold);
    const HessianSpectrum spec = hessian_condition_at(prob, oracle.w);
    CHECK(!spec.indefinite);
    CHECK(spec.kappa <= lda_condition_bound(p, *m) * 1.01);
  }
}

TEST_CASE("per-iteration data passes are constant") {
  Rng rng(111);
  const auto [xd, labels] = test::labeled_blobs(rng, 150, 6, 3);
  for (bool use_rgd : {false, true}) {
    LDAProblem p(SparseMatrix::from_dense(xd), labels, 0.2);
    const double stats_pass = p.passes().passes;
    CHECK(stats_pass == 1.0);  // class statistics take one sweep
    const CountSketch sketch(150, 30, 9);
    const Matrix xs = p.sketch_centered(sketch);
    CHECK(p.passes().passes == stats_pass + 1.0);
    const auto manifold = p.manifold(build_sketched_gram(xs, 0.2));
    SolverConfig cfg;
    cfg.max_iters = 25;
    cfg.grad_tol = 1e-14;
    const Problem prob = p.make_problem(manifold);
    const Vector w0 = p.default_start(manifold);
    const SolveResult run = use_rgd ? rgd(prob, w0, cfg) : rcg(prob, w0, cfg);
    const auto& rec = run.trace.records;
    REQUIRE(rec.size() >= 4);
    const double delta = rec[1].passes - rec[0].passes;
    CHECK(delta > 0.0);
    for (std::size_t k = 0; k + 1 < rec.size(); ++k)
      CHECK(rec[k + 1].passes - rec[k].passes == delta);
  }
}

TEST_SUITE_END();
