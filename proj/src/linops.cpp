#include "ellopt/linops.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace ellopt {

namespace {

void check_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(expected) + ", got " +
                                std::to_string(got));
  }
}

}  // namespace

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> offsets,
                           std::vector<Index> cols_idx,
                           std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      cols_idx_(std::move(cols_idx)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (rows_ < 0 || cols_ < 0) throw DataError("negative dimension");
  if (static_cast<Index>(offsets_.size()) != rows_ + 1)
    throw DataError("offset array must have rows+1 entries");
  if (offsets_.front() != 0) throw DataError("first offset must be 0");
  if (offsets_.back() != static_cast<Index>(values_.size()))
    throw DataError("last offset must equal nnz");
  if (cols_idx_.size() != values_.size())
    throw DataError("column index / value length mismatch");
  for (Index i = 0; i < rows_; ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw DataError("offsets decrease");
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (cols_idx_[k] < 0 || cols_idx_[k] >= cols_)
        throw DataError("column index out of range");
      if (k > offsets_[i] && cols_idx_[k] <= cols_idx_[k - 1])
        throw DataError("column indices must strictly increase within a row");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DataError("non-finite entry");
  }
}

SparseMatrix SparseMatrix::from_dense(const Matrix& a, double drop_tol) {
  std::vector<Index> offsets{0};
  std::vector<Index> cols_idx;
  std::vector<double> values;
  offsets.reserve(a.rows() + 1);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (std::abs(a(i, j)) > drop_tol) {
        cols_idx.push_back(j);
        values.push_back(a(i, j));
      }
    }
    offsets.push_back(static_cast<Index>(values.size()));
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(offsets),
                      std::move(cols_idx), std::move(values));
}

SparseMatrix SparseMatrix::from_triplets(
    Index rows, Index cols,
    const std::vector<std::tuple<Index, Index, double>>& entries) {
  std::map<std::pair<Index, Index>, double> acc;
  for (const auto& [i, j, v] : entries) {
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw DataError("triplet index out of range");
    acc[{i, j}] += v;
  }
  std::vector<Index> offsets(rows + 1, 0);
  std::vector<Index> cols_idx;
  std::vector<double> values;
  cols_idx.reserve(acc.size());
  values.reserve(acc.size());
  Index row = 0;
  for (const auto& [key, v] : acc) {
    while (row < key.first) offsets[++row] = static_cast<Index>(values.size());
    cols_idx.push_back(key.second);
    values.push_back(v);
  }
  while (row < rows) offsets[++row] = static_cast<Index>(values.size());
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_idx),
                      std::move(values));
}

Vector SparseMatrix::multiply(const Vector& x) const {
  check_dim(cols_, x.size(), "SparseMatrix::multiply");
  Vector out = Vector::Zero(rows_);
  for (Index i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k)
      acc += values_[k] * x[cols_idx_[k]];
    out[i] = acc;
  }
  return out;
}

Vector SparseMatrix::multiply_transpose(const Vector& y) const {
  check_dim(rows_, y.size(), "SparseMatrix::multiply_transpose");
  Vector out = Vector::Zero(cols_);
  for (Index i = 0; i < rows_; ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k)
      out[cols_idx_[k]] += values_[k] * yi;
  }
  return out;
}

Matrix SparseMatrix::to_dense() const {
  Matrix out = Matrix::Zero(rows_, cols_);
  for (Index i = 0; i < rows_; ++i)
    for (Index k = offsets_[i]; k < offsets_[i + 1]; ++k)
      out(i, cols_idx_[k]) = values_[k];
  return out;
}

namespace {

class IdentityOp final : public LinOp {
 public:
  explicit IdentityOp(Index d) : d_(d) {}
  Index rows() const override { return d_; }
  Index cols() const override { return d_; }
  Vector apply(const Vector& x) const override {
    check_dim(d_, x.size(), "identity_op");
    return x;
  }

 private:
  Index d_;
};

class DenseOp final : public LinOp {
 public:
  explicit DenseOp(Matrix a) : a_(std::move(a)) {}
  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  Vector apply(const Vector& x) const override {
    check_dim(a_.cols(), x.size(), "dense_op");
    return a_ * x;
  }

 private:
  Matrix a_;
};

class SparseOp final : public LinOp {
 public:
  SparseOp(SparsePtr z, PassCounter* passes) : z_(std::move(z)), passes_(passes) {}
  Index rows() const override { return z_->rows(); }
  Index cols() const override { return z_->cols(); }
  Vector apply(const Vector& x) const override {
    if (passes_) passes_->add(1.0);
    return z_->multiply(x);
  }

 private:
  SparsePtr z_;
  PassCounter* passes_;
};

class GramOp final : public LinOp {
 public:
  GramOp(SparsePtr z, double lambda, PassCounter* passes)
      : z_(std::move(z)), lambda_(lambda), passes_(passes) {
    if (lambda_ < 0.0) throw std::invalid_argument("gram_op: lambda < 0");
  }
  Index rows() const override { return z_->cols(); }
  Index cols() const override { return z_->cols(); }
  Vector apply(const Vector& x) const override {
    return gram_apply(*z_, lambda_, x, passes_);
  }

 private:
  SparsePtr z_;
  double lambda_;
  PassCounter* passes_;
};

class BlockDiagOp final : public LinOp {
 public:
  explicit BlockDiagOp(std::vector<LinOpPtr> blocks)
      : blocks_(std::move(blocks)) {
    rows_ = cols_ = 0;
    for (const auto& b : blocks_) {
      if (!b) throw std::invalid_argument("block_diag_op: null block");
      rows_ += b->rows();
      cols_ += b->cols();
    }
  }
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Vector apply(const Vector& x) const override {
    check_dim(cols_, x.size(), "block_diag_op");
    Vector out(rows_);
    Index ri = 0, ci = 0;
    for (const auto& b : blocks_) {
      out.segment(ri, b->rows()) = b->apply(x.segment(ci, b->cols()));
      ri += b->rows();
      ci += b->cols();
    }
    return out;
  }

 private:
  std::vector<LinOpPtr> blocks_;
  Index rows_, cols_;
};

class FunctionOp final : public LinOp {
 public:
  FunctionOp(Index rows, Index cols, std::function<Vector(const Vector&)> fn)
      : rows_(rows), cols_(cols), fn_(std::move(fn)) {
    if (!fn_) throw std::invalid_argument("function_op: null callable");
  }
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Vector apply(const Vector& x) const override {
    check_dim(cols_, x.size(), "function_op");
    return fn_(x);
  }

 private:
  Index rows_, cols_;
  std::function<Vector(const Vector&)> fn_;
};

class DenseInverseOp final : public LinOp {
 public:
  explicit DenseInverseOp(const Matrix& a) : d_(a.rows()), llt_(a) {
    if (a.rows() != a.cols())
      throw std::invalid_argument("dense_inverse_op: matrix not square");
    if (llt_.info() != Eigen::Success)
      throw NumericalError("dense_inverse_op: matrix is not SPD");
  }
  Index rows() const override { return d_; }
  Index cols() const override { return d_; }
  Vector apply(const Vector& x) const override {
    check_dim(d_, x.size(), "dense_inverse_op");
    return llt_.solve(x);
  }

 private:
  Index d_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace

LinOpPtr identity_op(Index d) { return std::make_shared<IdentityOp>(d); }

LinOpPtr dense_op(Matrix a) { return std::make_shared<DenseOp>(std::move(a)); }

LinOpPtr sparse_op(SparsePtr z, PassCounter* passes) {
  return std::make_shared<SparseOp>(std::move(z), passes);
}

LinOpPtr gram_op(SparsePtr z, double lambda, PassCounter* passes) {
  return std::make_shared<GramOp>(std::move(z), lambda, passes);
}

LinOpPtr block_diag_op(std::vector<LinOpPtr> blocks) {
  return std::make_shared<BlockDiagOp>(std::move(blocks));
}

LinOpPtr dense_inverse_op(const Matrix& a) {
  return std::make_shared<DenseInverseOp>(a);
}

LinOpPtr function_op(Index rows, Index cols,
                     std::function<Vector(const Vector&)> fn) {
  return std::make_shared<FunctionOp>(rows, cols, std::move(fn));
}

Vector matvec(const LinOp& a, const Vector& x) {
  check_dim(a.cols(), x.size(), "matvec");
  return a.apply(x);
}

Vector gram_apply(const SparseMatrix& z, double lambda, const Vector& x,
                  PassCounter* passes) {
  check_dim(z.cols(), x.size(), "gram_apply");
  if (passes) passes->add(2.0);
  Vector zx = z.multiply(x);
  Vector out = z.multiply_transpose(zx);
  if (lambda != 0.0) out += lambda * x;
  return out;
}

Vector cross_gram_apply(const SparseMatrix& x, const SparseMatrix& y,
                        const Vector& v, bool transpose, PassCounter* passes) {
  if (x.rows() != y.rows())
    throw std::invalid_argument("cross_gram_apply: row counts differ");
  if (passes) passes->add(2.0);  // one sweep over each matrix
  if (transpose) {
    check_dim(x.cols(), v.size(), "cross_gram_apply");
    return y.multiply_transpose(x.multiply(v));
  }
  check_dim(y.cols(), v.size(), "cross_gram_apply");
  return x.multiply_transpose(y.multiply(v));
}

CrossGram::CrossGram(SparsePtr x, SparsePtr y, PassCounter* passes)
    : x_(std::move(x)), y_(std::move(y)), passes_(passes) {
  if (x_->rows() != y_->rows())
    throw std::invalid_argument("CrossGram: row counts differ");
}

Vector CrossGram::apply(const Vector& v) const {
  return cross_gram_apply(*x_, *y_, v, false, passes_);
}

Vector CrossGram::apply_transpose(const Vector& u) const {
  return cross_gram_apply(*x_, *y_, u, true, passes_);
}

}  // namespace ellopt
