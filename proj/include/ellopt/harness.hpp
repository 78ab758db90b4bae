#pragma once

#include <iosfwd>

#include "ellopt/cca.hpp"
#include "ellopt/lda.hpp"

namespace ellopt {

/// Parsed libsvm text: "label idx:val idx:val ..." per line, 1-based strictly
/// increasing indices. The column count is the largest index seen.
struct LibsvmData {
  SparseMatrix x;
  std::vector<double> labels;
  bool no_rows = false;
};

LibsvmData parse_libsvm(const std::string& path);
LibsvmData parse_libsvm(std::istream& in);
void write_libsvm(std::ostream& out, const SparseMatrix& x,
                  const std::vector<double>& labels);

/// Partition columns into [0, left) and [left, d). left == 0 picks the
/// default rule: the left block gets ⌈d/2⌉ columns.
std::pair<SparseMatrix, SparseMatrix> split_columns(const SparseMatrix& x,
                                                    Index left = 0);

enum class TaskKind { cca, lda };
enum class PrecondKind { identity, exact, countsketch, dominant };
enum class SolverKind { rgd, rcg };

const char* to_string(TaskKind k);
const char* to_string(PrecondKind k);
const char* to_string(SolverKind k);

struct ExperimentConfig {
  TaskKind task = TaskKind::cca;
  SparseMatrix x;               // CCA left block / LDA features
  SparseMatrix y;               // CCA right block
  std::vector<double> labels;   // LDA
  double lambda_x = 0.0;
  double lambda_y = 0.0;
  double lambda = 0.0;
  PrecondKind precond = PrecondKind::countsketch;
  Index sketch_size = 0;  // countsketch: required, ≥ max data dimension
  Index rank_k = 0;       // dominant: required, 1 ≤ k < d
  SolverKind solver = SolverKind::rcg;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t max_iters = 1000;
  bool warm_start = true;
  /// The dense oracle (for the suboptimality column) runs only when the data
  /// dimension is at most this cap.
  Index oracle_cap = 500;
  std::string out_path;  // CSV trace destination; empty writes nothing
};

struct ExperimentResult {
  ConvergenceTrace trace;
  SolveStatus status = SolveStatus::max_iters;
  double final_value = 0.0;  // σ̂ (CCA) or ρ̂ (LDA) at the returned iterate
  double reference = 0.0;    // oracle value when available
  bool have_reference = false;
  std::string csv;      // the exact CSV text (also written to out_path)
  std::string warning;  // set when the oracle was skipped
  std::string summary;  // one-line human-readable result
};

/// Run one configuration end to end; deterministic given the config (the
/// seed fixes the sketch). Throws DataError / NumericalError /
/// std::invalid_argument on bad inputs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV schema: header iter,passes,objective,gradnorm[,suboptimality],step;
/// the passes column includes setup passes.
std::string trace_to_csv(const ConvergenceTrace& trace,
                         bool include_suboptimality);

}  // namespace ellopt
