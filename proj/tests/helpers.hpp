#pragma once

#include <random>
#include <utility>

#include "ellopt/geometry.hpp"
#include "ellopt/product.hpp"

namespace ellopt::test {

using Rng = std::mt19937_64;

inline Vector random_vector(Rng& rng, Index d) {
  std::normal_distribution<double> g;
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = g(rng);
  return a;
}

// SPD with eigenvalues log-spaced in [1, cond], random orientation.
inline Matrix random_spd(Rng& rng, Index d, double cond = 10.0) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d, d));
  const Matrix q = qr.householderQ();
  Vector eigs(d);
  for (Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : static_cast<double>(i) / (d - 1);
    eigs[i] = std::pow(cond, t);
  }
  Matrix a = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

inline SparseMatrix random_sparse(Rng& rng, Index rows, Index cols,
                                  double density = 0.4) {
  std::normal_distribution<double> g;
  std::bernoulli_distribution keep(density);
  std::vector<std::tuple<Index, Index, double>> entries;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (keep(rng)) entries.emplace_back(i, j, g(rng));
  return SparseMatrix::from_triplets(rows, cols, entries);
}

inline Ellipsoid make_ellipsoid(Matrix b, Matrix m) {
  return Ellipsoid(dense_op(std::move(b)), dense_spd_precond(std::move(m)));
}

inline Vector random_point(const Manifold& m, Rng& rng) {
  return m.normalize(random_vector(rng, m.dim()));
}

inline Vector random_tangent(const Manifold& m, const Vector& x, Rng& rng) {
  return m.project(x, random_vector(rng, m.dim()));
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());  // Frobenius
}

// Dense oracle for the tangent projection matrix I − γ⁻¹ M⁻¹Bx (Bx)ᵀ.
inline Matrix dense_projection_matrix(const Matrix& b, const Matrix& m,
                                      const Vector& x) {
  const Index d = x.size();
  const Vector bx = b * x;
  const Vector minv_bx = m.llt().solve(bx);
  const double gamma = bx.dot(minv_bx);
  return Matrix::Identity(d, d) - minv_bx * bx.transpose() / gamma;
}

// Smooth test objective f̄(x) = ½xᵀAx + bᵀx with A symmetric.
struct QuadraticObjective {
  Matrix a;
  Vector b;

  static QuadraticObjective random(Rng& rng, Index d) {
    Matrix m = random_matrix(rng, d, d);
    QuadraticObjective q;
    q.a = 0.5 * (m + m.transpose());
    q.b = random_vector(rng, d);
    return q;
  }

  double value(const Vector& x) const { return 0.5 * x.dot(a * x) + b.dot(x); }
  Vector grad(const Vector& x) const { return a * x + b; }
  Vector hess_vec(const Vector& eta) const { return a * eta; }
};

// Two data matrices sharing a strong latent direction plus independent
// noise; the top canonical correlation is well separated from the rest.
inline std::pair<Matrix, Matrix> correlated_pair(Rng& rng, Index n, Index dx,
                                                 Index dy,
                                                 double column_spread = 1.0) {
  const Vector shared = random_vector(rng, n);
  const Vector weak = random_vector(rng, n);
  Matrix x = random_matrix(rng, n, dx);
  Matrix y = random_matrix(rng, n, dy);
  x.col(0) = shared + 0.2 * x.col(0);
  y.col(0) = shared + 0.2 * y.col(0);
  if (dx > 1) x.col(1) = weak + 1.5 * x.col(1);
  if (dy > 1) y.col(1) = weak + 1.5 * y.col(1);
  if (column_spread != 1.0) {
    for (Index j = 0; j < dx; ++j)
      x.col(j) *= std::pow(column_spread, static_cast<double>(j) / std::max<Index>(1, dx - 1));
    for (Index j = 0; j < dy; ++j)
      y.col(j) *= std::pow(column_spread, static_cast<double>(j) / std::max<Index>(1, dy - 1));
  }
  return {x, y};
}

// Gaussian class blobs; labels are 1..l.
inline std::pair<Matrix, std::vector<double>> labeled_blobs(
    Rng& rng, Index n, Index d, Index l, double separation = 4.0) {
  Matrix means = separation * random_matrix(rng, l, d);
  Matrix x(n, d);
  std::vector<double> labels(n);
  std::uniform_int_distribution<Index> pick(0, l - 1);
  for (Index i = 0; i < n; ++i) {
    const Index k = i < l ? i : pick(rng);  // every class nonempty
    x.row(i) = means.row(k) + random_vector(rng, d).transpose();
    labels[static_cast<std::size_t>(i)] = static_cast<double>(k + 1);
  }
  return {x, labels};
}

}  // namespace ellopt::test
