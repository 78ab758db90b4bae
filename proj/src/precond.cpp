#include "ellopt/precond.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <utility>

namespace ellopt {

Matrix Preconditioner::to_dense() const {
  const Index d = dim();
  Matrix out(d, d);
  Vector e = Vector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    out.col(j) = apply(e);
    e[j] = 0.0;
  }
  return out;
}

namespace {

void check_dim(Index expected, Index got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

class IdentityPrecond final : public Preconditioner {
 public:
  explicit IdentityPrecond(Index d) : d_(d) {}
  Index dim() const override { return d_; }
  Vector apply(const Vector& v) const override {
    check_dim(d_, v.size(), "identity preconditioner");
    return v;
  }
  Vector apply_inverse(const Vector& v) const override {
    check_dim(d_, v.size(), "identity preconditioner");
    return v;
  }

 private:
  Index d_;
};

class DenseSpdPrecond final : public Preconditioner {
 public:
  explicit DenseSpdPrecond(Matrix m) : m_(std::move(m)), llt_(m_) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("dense_spd_precond: not square");
    if (llt_.info() != Eigen::Success)
      throw NumericalError("dense_spd_precond: matrix is not SPD");
  }
  Index dim() const override { return m_.rows(); }
  Vector apply(const Vector& v) const override {
    check_dim(m_.rows(), v.size(), "dense preconditioner");
    return m_.selfadjointView<Eigen::Lower>() * v;
  }
  Vector apply_inverse(const Vector& v) const override {
    check_dim(m_.rows(), v.size(), "dense preconditioner");
    return llt_.solve(v);
  }

 private:
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
};

// M = RᵀR for an upper-triangular factor R.
class FactoredGramPrecond final : public Preconditioner {
 public:
  explicit FactoredGramPrecond(Matrix r) : r_(std::move(r)) {
    const double dmax = r_.diagonal().cwiseAbs().maxCoeff();
    const double dmin = r_.diagonal().cwiseAbs().minCoeff();
    if (!(dmax > 0.0) || dmin <= 1e-13 * dmax)
      throw NumericalError("singular preconditioner");
  }
  Index dim() const override { return r_.rows(); }
  Vector apply(const Vector& v) const override {
    check_dim(r_.rows(), v.size(), "factored preconditioner");
    return r_.transpose().triangularView<Eigen::Lower>() *
           (r_.triangularView<Eigen::Upper>() * v).eval();
  }
  Vector apply_inverse(const Vector& v) const override {
    check_dim(r_.rows(), v.size(), "factored preconditioner");
    Vector w = r_.transpose().triangularView<Eigen::Lower>().solve(v);
    return r_.triangularView<Eigen::Upper>().solve(w);
  }
  const Matrix* triangular_factor() const override { return &r_; }

 private:
  Matrix r_;  // d×d upper triangular
};

class DominantSubspacePrecond final : public Preconditioner {
 public:
  DominantSubspacePrecond(Matrix u_k, Vector eigs_k, double tail_eig,
                          double lambda)
      : u_k_(std::move(u_k)),
        eigs_k_(std::move(eigs_k)),
        tail_eig_(tail_eig),
        lambda_(lambda) {
    if (tail_eig_ + lambda_ <= 0.0)
      throw NumericalError("dominant-subspace preconditioner is not SPD");
  }
  Index dim() const override { return u_k_.rows(); }
  Vector apply(const Vector& v) const override {
    check_dim(u_k_.rows(), v.size(), "dominant-subspace preconditioner");
    Vector c = u_k_.transpose() * v;
    c.array() *= (eigs_k_.array() - tail_eig_);
    return u_k_ * c + (tail_eig_ + lambda_) * v;
  }
  Vector apply_inverse(const Vector& v) const override {
    check_dim(u_k_.rows(), v.size(), "dominant-subspace preconditioner");
    const double tail = 1.0 / (tail_eig_ + lambda_);
    Vector c = u_k_.transpose() * v;
    c.array() *= (eigs_k_.array() + lambda_).inverse() - tail;
    return u_k_ * c + tail * v;
  }

 private:
  Matrix u_k_;      // d×k, orthonormal columns
  Vector eigs_k_;   // top-k eigenvalues of A, descending
  double tail_eig_;  // (k+1)-th eigenvalue of A
  double lambda_;
};

}  // namespace

PrecondPtr identity_precond(Index d) {
  return std::make_shared<IdentityPrecond>(d);
}

PrecondPtr dense_spd_precond(Matrix m) {
  return std::make_shared<DenseSpdPrecond>(std::move(m));
}

PrecondPtr build_sketched_gram(const Matrix& zs, double lambda) {
  if (zs.rows() < 1) throw std::invalid_argument("build_sketched_gram: s < 1");
  if (lambda < 0.0) throw std::invalid_argument("build_sketched_gram: lambda < 0");
  const Index s = zs.rows();
  const Index d = zs.cols();
  // QR of the stacked matrix [ZS; √λ I] instead of a Cholesky of the normal
  // equations; the factor satisfies RᵀR = ZSᵀZS + λI.
  Matrix stacked(s + d, d);
  stacked.topRows(s) = zs;
  stacked.bottomRows(d) = std::sqrt(lambda) * Matrix::Identity(d, d);
  Eigen::HouseholderQR<Matrix> qr(stacked);
  Matrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  return std::make_shared<FactoredGramPrecond>(std::move(r));
}

PrecondPtr build_exact_gram(const SparseMatrix& z, double lambda,
                            PassCounter* passes) {
  if (lambda < 0.0) throw std::invalid_argument("build_exact_gram: lambda < 0");
  if (passes) passes->add(1.0);
  const Matrix zd = z.to_dense();
  Matrix gram = zd.transpose() * zd;
  gram.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError("singular preconditioner");
  Matrix r = llt.matrixU();
  return std::make_shared<FactoredGramPrecond>(std::move(r));
}

PrecondPtr build_dominant_subspace(const Matrix& a, double lambda, Index k) {
  const Index d = a.rows();
  if (a.cols() != d)
    throw std::invalid_argument("build_dominant_subspace: not square");
  if (k < 1 || k >= d)
    throw std::invalid_argument("build_dominant_subspace: need 1 <= k < d");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("build_dominant_subspace: eigensolver failed");
  // Eigen sorts ascending; flip to descending.
  Matrix u_k(d, k);
  Vector eigs_k(k);
  for (Index j = 0; j < k; ++j) {
    u_k.col(j) = es.eigenvectors().col(d - 1 - j);
    eigs_k[j] = es.eigenvalues()[d - 1 - j];
  }
  const double tail_eig = es.eigenvalues()[d - 1 - k];
  return std::make_shared<DominantSubspacePrecond>(
      std::move(u_k), std::move(eigs_k), tail_eig, lambda);
}

PrecondPtr build_dominant_subspace(const SparseMatrix& z, double lambda,
                                   Index k, PassCounter* passes) {
  if (passes) passes->add(1.0);
  const Matrix zd = z.to_dense();
  return build_dominant_subspace(Matrix(zd.transpose() * zd), lambda, k);
}

}  // namespace ellopt
