#include "ellopt/lda.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace ellopt {

namespace {

void fix_sign(Vector& w) {
  const double scale = w.cwiseAbs().maxCoeff();
  for (Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) > 1e-12 * scale) {
      if (w[i] < 0.0) w = -w;
      return;
    }
  }
}

}  // namespace

ClassStats compute_class_stats(const SparseMatrix& x,
                               const std::vector<int>& labels, Index n_classes,
                               PassCounter* passes) {
  if (static_cast<Index>(labels.size()) != x.rows())
    throw DataError("label count does not match row count");
  if (n_classes < 1) throw DataError("need at least one class");
  if (passes) passes->add(1.0);

  ClassStats stats;
  stats.n_classes = n_classes;
  stats.counts.assign(n_classes, 0);
  stats.means = Matrix::Zero(n_classes, x.cols());
  const auto& offsets = x.offsets();
  const auto& cols = x.col_indices();
  const auto& vals = x.values();
  for (Index i = 0; i < x.rows(); ++i) {
    const int label = labels[i];
    if (label < 1 || label > n_classes)
      throw DataError("label out of range at row " + std::to_string(i));
    const Index k = label - 1;
    ++stats.counts[k];
    for (Index p = offsets[i]; p < offsets[i + 1]; ++p)
      stats.means(k, cols[p]) += vals[p];
  }
  stats.global_mean = Vector::Zero(x.cols());
  for (Index k = 0; k < n_classes; ++k) {
    if (stats.counts[k] == 0)
      throw DataError("empty class " + std::to_string(k + 1));
    stats.global_mean += stats.means.row(k).transpose();
    stats.means.row(k) /= static_cast<double>(stats.counts[k]);
  }
  stats.global_mean /= static_cast<double>(x.rows());
  return stats;
}

std::vector<int> LDAProblem::remap_labels(const std::vector<double>& raw) {
  std::map<double, int> ids;
  for (double v : raw) {
    if (!std::isfinite(v)) throw DataError("non-finite label");
    ids.emplace(v, 0);
  }
  int next = 1;
  for (auto& [value, id] : ids) id = next++;
  std::vector<int> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(ids[v]);
  return out;
}

LDAProblem::LDAProblem(SparseMatrix x, const std::vector<double>& labels,
                       double lambda)
    : x_(std::make_shared<const SparseMatrix>(std::move(x))),
      lambda_(lambda),
      passes_(std::make_shared<PassCounter>()) {
  if (lambda_ < 0.0) throw std::invalid_argument("LDAProblem: negative lambda");
  if (x_->rows() < 1) throw DataError("LDAProblem: no rows");
  auto mapped = remap_labels(labels);
  const int l = *std::max_element(mapped.begin(), mapped.end());
  labels_ = std::make_shared<const std::vector<int>>(std::move(mapped));
  stats_ = std::make_shared<const ClassStats>(
      compute_class_stats(*x_, *labels_, l, passes_.get()));
  between_factor_ = Matrix(l, dim());
  for (Index k = 0; k < l; ++k) {
    between_factor_.row(k) =
        std::sqrt(static_cast<double>(stats_->counts[k])) *
        (stats_->means.row(k) - stats_->global_mean.transpose());
  }
}

Vector LDAProblem::centered_apply(const Vector& v) const {
  passes_->add(1.0);
  Vector out = x_->multiply(v);
  const Vector mean_dots = stats_->means * v;  // l values, O(ld)
  const auto& labels = *labels_;
  for (Index i = 0; i < out.size(); ++i) out[i] -= mean_dots[labels[i] - 1];
  return out;
}

Vector LDAProblem::centered_apply_transpose(const Vector& r) const {
  passes_->add(1.0);
  Vector out = x_->multiply_transpose(r);
  Vector class_sums = Vector::Zero(n_classes());
  const auto& labels = *labels_;
  for (Index i = 0; i < r.size(); ++i) class_sums[labels[i] - 1] += r[i];
  out -= stats_->means.transpose() * class_sums;
  return out;
}

Vector LDAProblem::scatter_within_reg_apply(const Vector& v) const {
  Vector out = centered_apply_transpose(centered_apply(v));
  if (lambda_ != 0.0) out += lambda_ * v;
  return out;
}

Vector LDAProblem::scatter_between_apply(const Vector& v) const {
  return between_factor_.transpose() * (between_factor_ * v);
}

double LDAProblem::objective(const Vector& w) const {
  return -0.5 * w.dot(scatter_between_apply(w));
}

Vector LDAProblem::euclidean_gradient(const Vector& w) const {
  return -scatter_between_apply(w);
}

Vector LDAProblem::euclidean_hessian_vec(const Vector& w,
                                         const Vector& eta) const {
  (void)w;
  return -scatter_between_apply(eta);
}

Ellipsoid LDAProblem::manifold(PrecondPtr metric) const {
  auto constraint = function_op(
      dim(), dim(), [this](const Vector& v) { return scatter_within_reg_apply(v); });
  return Ellipsoid(std::move(constraint), std::move(metric));
}

Problem LDAProblem::make_problem(const Ellipsoid& manifold) const {
  Problem p;
  p.manifold = &manifold;
  p.objective = [this](const Vector& w) { return objective(w); };
  p.euclidean_gradient = [this](const Vector& w) {
    return euclidean_gradient(w);
  };
  p.euclidean_hessian_vec = [this](const Vector& w, const Vector& eta) {
    return euclidean_hessian_vec(w, eta);
  };
  // f(R_w(τd)) = −½·n(τ)/b(τ) with both pieces quadratic in τ; the decrease
  // −½(n·b0 − n0·b)/(b·b0) has its constant term cancelled symbolically.
  p.line_decrease = [this](const Vector& w, const Vector& d) {
    const Vector sb_w = scatter_between_apply(w);
    const Vector sb_d = scatter_between_apply(d);
    const double n0 = w.dot(sb_w), n1 = 2.0 * d.dot(sb_w), n2 = d.dot(sb_d);
    const Vector sw_w = scatter_within_reg_apply(w);
    const Vector sw_d = scatter_within_reg_apply(d);
    const double b0 = w.dot(sw_w), b1 = 2.0 * d.dot(sw_w), b2 = d.dot(sw_d);
    const double c1 = n1 * b0 - n0 * b1;
    const double c2 = n2 * b0 - n0 * b2;
    return [=](double t) {
      const double denom = b0 + t * (b1 + t * b2);
      if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
      return -0.5 * t * (c1 + t * c2) / (denom * b0);
    };
  };
  p.quality_from_objective = [](double f) { return -2.0 * f; };
  p.passes = passes_.get();
  return p;
}

Vector LDAProblem::default_start(const Ellipsoid& manifold) const {
  return manifold.normalize(Vector::Ones(dim()));
}

Matrix LDAProblem::sketch_centered(const CountSketch& s) const {
  if (s.input_rows() != samples())
    throw std::invalid_argument("sketch_centered: row count mismatch");
  Matrix out = sketch_apply(s, *x_, passes_.get());
  // S·(mean-lookup rows) groups into signed counts per (bucket, class).
  Matrix signed_counts = Matrix::Zero(s.sketch_rows(), n_classes());
  const auto& labels = *labels_;
  for (Index i = 0; i < samples(); ++i)
    signed_counts(s.bucket()[i], labels[i] - 1) += s.sign()[i];
  out.noalias() -= signed_counts * stats_->means;
  return out;
}

Matrix LDAProblem::dense_centered() const {
  Matrix xd = x_->to_dense();
  const auto& labels = *labels_;
  for (Index i = 0; i < xd.rows(); ++i)
    xd.row(i) -= stats_->means.row(labels[i] - 1);
  return xd;
}

Matrix LDAProblem::dense_scatter_within() const {
  const Matrix c = dense_centered();
  return c.transpose() * c;
}

Matrix LDAProblem::dense_scatter_between() const {
  return between_factor_.transpose() * between_factor_;
}

Vector lda_spectrum(const LDAProblem& p) {
  Matrix a = p.dense_scatter_within();
  a.diagonal().array() += p.lambda();
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("singular within-class scatter (lambda=0?)");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
      p.dense_scatter_between(), a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("lda_spectrum: eigensolver failed");
  return es.eigenvalues().reverse();
}

LDAResult exact_lda(const SparseMatrix& x, const std::vector<double>& labels,
                    double lambda) {
  LDAProblem p(x, labels, lambda);
  Matrix a = p.dense_scatter_within();
  a.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("singular within-class scatter (lambda=0?)");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(p.dense_scatter_between(),
                                                      a);
  if (es.info() != Eigen::Success)
    throw NumericalError("exact_lda: eigensolver failed");
  const Index d = p.dim();
  LDAResult out;
  out.rho1 = es.eigenvalues()[d - 1];
  out.w = es.eigenvectors().col(d - 1);
  out.w /= std::sqrt(out.w.dot(a * out.w));
  fix_sign(out.w);
  const double scale = p.dense_scatter_between().cwiseAbs().maxCoeff();
  out.degenerate = out.rho1 <= 1e-14 * std::max(1.0, scale);
  return out;
}

LDAResult sketched_lda(const SparseMatrix& x, const std::vector<double>& labels,
                       double lambda, Index s, std::uint64_t seed,
                       const SketchedSolveOptions& opts) {
  if (s < x.cols())
    throw std::invalid_argument("sketched_lda: need s >= d");
  LDAProblem p(x, labels, lambda);
  const CountSketch sketch(p.samples(), s, seed);
  const Matrix xs = p.sketch_centered(sketch);

  PrecondPtr metric;
  try {
    metric = build_sketched_gram(xs, lambda);
  } catch (const NumericalError&) {
    throw NumericalError(
        "sketched_lda: singular sketched preconditioner; rebuild with a new "
        "seed or a positive regularizer");
  }

  const Ellipsoid manifold = p.manifold(metric);
  Vector w0;
  if (opts.warm_start) {
    // Leading generalized eigenvector of (S_B, M) through the factor of M:
    // with M = RᵀR this is the top eigenpair of R⁻ᵀ S_B R⁻¹.
    const Matrix sb = p.dense_scatter_between();
    Vector w_tilde;
    if (const Matrix* r = metric->triangular_factor()) {
      const Matrix t =
          r->transpose().triangularView<Eigen::Lower>().solve(sb);
      const Matrix reduced =
          r->transpose().triangularView<Eigen::Lower>().solve(t.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          Matrix(0.5 * (reduced + reduced.transpose())));
      if (es.info() != Eigen::Success)
        throw NumericalError("sketched_lda: warm-start eigensolver failed");
      const Vector y = es.eigenvectors().col(p.dim() - 1);
      w_tilde = r->triangularView<Eigen::Upper>().solve(y);
    } else {
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sb,
                                                          metric->to_dense());
      if (es.info() != Eigen::Success)
        throw NumericalError("sketched_lda: warm-start eigensolver failed");
      w_tilde = es.eigenvectors().col(p.dim() - 1);
    }
    w0 = w_tilde /
         std::sqrt(w_tilde.dot(p.scatter_within_reg_apply(w_tilde)));
  } else {
    w0 = p.default_start(manifold);
  }

  const double setup_passes = p.passes().passes;
  const Problem prob = p.make_problem(manifold);
  SolveResult run = opts.use_rgd ? rgd(prob, w0, opts.solver)
                                 : rcg(prob, w0, opts.solver);
  run.trace.setup_passes = setup_passes;

  LDAResult out;
  out.w = run.x;
  out.rho1 = out.w.dot(p.scatter_between_apply(out.w));
  out.trace = std::move(run.trace);
  return out;
}

double lda_condition_bound(const LDAProblem& p, const Preconditioner& m) {
  if (m.dim() != p.dim())
    throw std::invalid_argument("lda_condition_bound: metric dimension mismatch");
  const Vector rho = lda_spectrum(p);
  if (rho.size() < 2)
    throw NumericalError("lda_condition_bound: needs at least two eigenvalues");
  const double gap = rho[0] - rho[1];
  if (gap < 1e-12)
    throw NumericalError("lda_condition_bound: degenerate eigenvalue gap");
  Matrix a = p.dense_scatter_within();
  a.diagonal().array() += p.lambda();
  return rho[0] / gap * pencil_condition_number(a, m.to_dense());
}

}  // namespace ellopt
