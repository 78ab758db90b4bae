#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ellopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Dense matrices are Eigen::MatrixXd, column-major.
using Matrix = Eigen::MatrixXd;

/// Input data is malformed (bad file, inconsistent dimensions, bad labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation cannot proceed numerically (singular factor, non-SPD
/// operator, degenerate spectral gap).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cost ledger counting sweeps over the input data matrices. One unit is one
/// full pass over one data matrix (X, Y or the centered rows of X). Small
/// derived objects (class-mean tables, sketched matrices, preconditioner
/// factors) are free to apply.
///
/// A counter belongs to one problem instance and is read by one solver run at
/// a time; for concurrent runs, give each its own problem instance.
struct PassCounter {
  double passes = 0.0;
  void add(double p) { passes += p; }
  void reset() { passes = 0.0; }
};

/// Compressed sparse row matrix. Within each row the column indices are
/// strictly increasing; explicit zeros are allowed but from_dense drops them.
class SparseMatrix {
 public:
  SparseMatrix() : rows_(0), cols_(0), offsets_{0} {}
  SparseMatrix(Index rows, Index cols, std::vector<Index> offsets,
               std::vector<Index> cols_idx, std::vector<double> values);

  static SparseMatrix from_dense(const Matrix& a, double drop_tol = 0.0);
  /// Entries (i, j, v); duplicates are summed.
  static SparseMatrix from_triplets(
      Index rows, Index cols,
      const std::vector<std::tuple<Index, Index, double>>& entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  /// Z x. One sweep over the stored entries.
  Vector multiply(const Vector& x) const;
  /// Zᵀ y. One sweep over the stored entries.
  Vector multiply_transpose(const Vector& y) const;

  Matrix to_dense() const;

  const std::vector<Index>& offsets() const { return offsets_; }
  const std::vector<Index>& col_indices() const { return cols_idx_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const SparseMatrix& other) const = default;

 private:
  void validate() const;

  Index rows_, cols_;
  std::vector<Index> offsets_;    // rows_ + 1, nondecreasing, last == nnz
  std::vector<Index> cols_idx_;   // strictly increasing within each row
  std::vector<double> values_;
};

using SparsePtr = std::shared_ptr<const SparseMatrix>;

/// Abstract "apply to a vector" object. Implementations are immutable after
/// construction and safe to share across threads; the ones that touch input
/// data report sweeps to an optional PassCounter.
class LinOp {
 public:
  virtual ~LinOp() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
};

using LinOpPtr = std::shared_ptr<const LinOp>;

LinOpPtr identity_op(Index d);
LinOpPtr dense_op(Matrix a);
/// Z as an operator; each apply is one sweep over Z.
LinOpPtr sparse_op(SparsePtr z, PassCounter* passes = nullptr);
/// (ZᵀZ + λI) x computed as Zᵀ(Z x) + λx; two sweeps over Z per apply, the
/// d×d Gram matrix is never materialized.
LinOpPtr gram_op(SparsePtr z, double lambda, PassCounter* passes = nullptr);
LinOpPtr block_diag_op(std::vector<LinOpPtr> blocks);
/// A⁻¹ x for SPD A via a Cholesky factor computed once.
LinOpPtr dense_inverse_op(const Matrix& a);
/// Wrap a callable as an operator. The callable must be pure; any cost
/// accounting is its own business.
LinOpPtr function_op(Index rows, Index cols,
                     std::function<Vector(const Vector&)> fn);

/// A x with a dimension check.
Vector matvec(const LinOp& a, const Vector& x);

/// (ZᵀZ + λI) x as Zᵀ(Z x) + λx. Two sweeps over Z.
Vector gram_apply(const SparseMatrix& z, double lambda, const Vector& x,
                  PassCounter* passes = nullptr);

/// transpose == false: (XᵀY) v as Xᵀ(Y v).
/// transpose == true:  (XᵀY)ᵀ u = (YᵀX) u as Yᵀ(X u).
/// One sweep over each of X and Y.
Vector cross_gram_apply(const SparseMatrix& x, const SparseMatrix& y,
                        const Vector& v, bool transpose,
                        PassCounter* passes = nullptr);

/// Xᵀ(Y ·) and its transpose with shared row dimension; wraps
/// cross_gram_apply behind a reusable object.
class CrossGram {
 public:
  CrossGram(SparsePtr x, SparsePtr y, PassCounter* passes = nullptr);

  Index rows() const { return x_->cols(); }
  Index cols() const { return y_->cols(); }
  Vector apply(const Vector& v) const;             // XᵀY v
  Vector apply_transpose(const Vector& u) const;   // YᵀX u

 private:
  SparsePtr x_, y_;
  PassCounter* passes_;
};

}  // namespace ellopt
