#pragma once

#include <cstdint>

#include "ellopt/linops.hpp"

namespace ellopt {

/// CountSketch embedding S of size s×n. Column j of S has a single nonzero,
/// sign(j) in row bucket(j); both maps are materialized as length-n arrays and
/// reconstructed deterministically from the seed. Applying S costs one sweep
/// over the input.
class CountSketch {
 public:
  CountSketch(Index n, Index s, std::uint64_t seed);

  /// Explicit maps (test fixtures, e.g. signed permutations). `bucket`
  /// entries are 0-based rows in [0, s); `sign` entries are ±1.
  static CountSketch from_maps(Index n, Index s, std::vector<Index> bucket,
                               std::vector<int> sign);

  Index input_rows() const { return n_; }
  Index sketch_rows() const { return s_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Index>& bucket() const { return bucket_; }
  const std::vector<int>& sign() const { return sign_; }

  /// Dense s×n form, for small oracles only.
  Matrix to_dense() const;

 private:
  CountSketch() = default;
  Index n_ = 0, s_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Index> bucket_;
  std::vector<int> sign_;
};

/// S·Z for CSR Z; one sweep over Z.
Matrix sketch_apply(const CountSketch& s, const SparseMatrix& z,
                    PassCounter* passes = nullptr);
/// S·Z for dense Z; one sweep over Z.
Matrix sketch_apply(const CountSketch& s, const Matrix& z,
                    PassCounter* passes = nullptr);

/// Effective dimension Tr((ZᵀZ+λI)⁻¹ ZᵀZ) = Σ σᵢ²/(σᵢ²+λ). Dense diagnostic;
/// requires λ>0 or Z of full column rank.
double effective_dimension(const Matrix& z, double lambda);

enum class SketchProblem { cca, lda };

/// Sketch-size rule: ⌈20 s_eff²/δ⌉ for LDA, ⌈40 s_eff²/δ⌉ for CCA. Advisory:
/// these are worst-case sizes, far above what works in practice.
Index recommended_sketch_size(double s_eff, double delta, SketchProblem kind);

/// Condition number of the symmetric pencil (A, B) with B SPD: the ratio of
/// the extreme generalized eigenvalues in absolute value.
double pencil_condition_number(const Matrix& a, const Matrix& b);

}  // namespace ellopt
