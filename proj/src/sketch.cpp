#include "ellopt/sketch.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace ellopt {

CountSketch::CountSketch(Index n, Index s, std::uint64_t seed)
    : n_(n), s_(s), seed_(seed) {
  if (n < 1) throw std::invalid_argument("CountSketch: n < 1");
  if (s < 1) throw std::invalid_argument("CountSketch: s < 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> row(0, s - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  bucket_.resize(n);
  sign_.resize(n);
  for (Index i = 0; i < n; ++i) {
    bucket_[i] = row(rng);
    sign_[i] = coin(rng) == 0 ? 1 : -1;
  }
}

CountSketch CountSketch::from_maps(Index n, Index s, std::vector<Index> bucket,
                                   std::vector<int> sign) {
  if (s < 1) throw std::invalid_argument("CountSketch: s < 1");
  if (static_cast<Index>(bucket.size()) != n ||
      static_cast<Index>(sign.size()) != n)
    throw std::invalid_argument("CountSketch: map length != n");
  for (Index i = 0; i < n; ++i) {
    if (bucket[i] < 0 || bucket[i] >= s)
      throw std::invalid_argument("CountSketch: bucket out of range");
    if (sign[i] != 1 && sign[i] != -1)
      throw std::invalid_argument("CountSketch: sign must be +1 or -1");
  }
  CountSketch out;
  out.n_ = n;
  out.s_ = s;
  out.bucket_ = std::move(bucket);
  out.sign_ = std::move(sign);
  return out;
}

Matrix CountSketch::to_dense() const {
  Matrix s = Matrix::Zero(s_, n_);
  for (Index j = 0; j < n_; ++j) s(bucket_[j], j) = sign_[j];
  return s;
}

Matrix sketch_apply(const CountSketch& s, const SparseMatrix& z,
                    PassCounter* passes) {
  if (z.rows() != s.input_rows())
    throw std::invalid_argument("sketch_apply: row count mismatch");
  if (passes) passes->add(1.0);
  Matrix out = Matrix::Zero(s.sketch_rows(), z.cols());
  const auto& offsets = z.offsets();
  const auto& cols = z.col_indices();
  const auto& vals = z.values();
  for (Index i = 0; i < z.rows(); ++i) {
    const Index b = s.bucket()[i];
    const double sgn = s.sign()[i];
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k)
      out(b, cols[k]) += sgn * vals[k];
  }
  return out;
}

Matrix sketch_apply(const CountSketch& s, const Matrix& z, PassCounter* passes) {
  if (z.rows() != s.input_rows())
    throw std::invalid_argument("sketch_apply: row count mismatch");
  if (passes) passes->add(1.0);
  Matrix out = Matrix::Zero(s.sketch_rows(), z.cols());
  for (Index i = 0; i < z.rows(); ++i)
    out.row(s.bucket()[i]) += s.sign()[i] * z.row(i);
  return out;
}

double effective_dimension(const Matrix& z, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("effective_dimension: lambda < 0");
  Eigen::JacobiSVD<Matrix> svd(z);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (lambda == 0.0) {
    // (ZᵀZ)⁻¹ must exist, so Z needs full column rank; each σᵢ²/σᵢ²
    // contributes 1 and the trace is exactly the rank.
    const bool full_rank = z.rows() >= z.cols() && sv.size() == z.cols() &&
                           smax > 0.0 && sv[sv.size() - 1] > 1e-12 * smax;
    if (!full_rank)
      throw NumericalError("effective_dimension: singular Z'Z with lambda=0");
    return static_cast<double>(z.cols());
  }
  double acc = 0.0;
  for (Index i = 0; i < sv.size(); ++i) {
    const double s2 = sv[i] * sv[i];
    acc += s2 / (s2 + lambda);
  }
  return acc;
}

Index recommended_sketch_size(double s_eff, double delta, SketchProblem kind) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("recommended_sketch_size: delta must be in (0,1)");
  if (s_eff < 0.0)
    throw std::invalid_argument("recommended_sketch_size: s_eff < 0");
  const double c = (kind == SketchProblem::cca) ? 40.0 : 20.0;
  return static_cast<Index>(std::ceil(c * s_eff * s_eff / delta));
}

double pencil_condition_number(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("pencil_condition_number: shape mismatch");
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success)
    throw NumericalError("pencil_condition_number: B is not SPD");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, b,
                                                      Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("pencil_condition_number: eigensolver failed");
  const Vector ev = es.eigenvalues().cwiseAbs();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (lo <= 0.0)
    throw NumericalError("pencil_condition_number: zero generalized eigenvalue");
  return hi / lo;
}

}  // namespace ellopt
