#pragma once

#include <functional>
#include <optional>

#include "ellopt/geometry.hpp"

namespace ellopt {

enum class SolveStatus { converged, max_iters, line_search_failure };

const char* to_string(SolveStatus status);

struct TraceRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;   // metric norm of the Riemannian gradient
  double passes = 0.0;      // data passes since the solver started
  double step = 0.0;        // step size that produced this iterate (0 at k=0)
  double suboptimality = 0.0;  // NaN when no reference is supplied
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::max_iters;
  double setup_passes = 0.0;  // sketching / warm start, before iteration 0

  std::size_t iterations() const {
    return records.empty() ? 0 : records.back().iter;
  }
  double solver_passes() const {
    return records.empty() ? 0.0 : records.back().passes;
  }
  double total_passes() const { return setup_passes + solver_passes(); }
};

struct ArmijoOptions {
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 50;
};

struct SolverConfig {
  std::size_t max_iters = 1000;
  /// Stop when ‖grad‖_M ≤ grad_tol · max(1, |f|).
  double grad_tol = 1e-8;
  ArmijoOptions armijo{};
  /// Conjugate-gradient restart period; 0 means the ambient dimension.
  std::size_t cg_restart = 0;
  /// When set, τ_k = fixed_step(k, x_k) and no line search is performed.
  std::function<double(std::size_t, const Vector&)> fixed_step;
  /// Reference value of the problem's quality functional; enables the
  /// suboptimality column |ref − q(x)|/|ref| in the trace.
  std::optional<double> reference_quality;
  /// Also stop once suboptimality falls below this (requires a reference).
  std::optional<double> target_suboptimality;
  /// Called with (k, x_k) for every recorded iterate.
  std::function<void(std::size_t, const Vector&)> observer;
};

/// A smooth objective over a manifold, given through its Euclidean pieces.
/// euclidean_hessian_vec is only needed by hessian_condition_at.
/// line_decrease(x, d), when supplied, returns τ ↦ f(R_x(τ d)) − f(x) with a
/// fixed setup cost, so backtracking trials touch no input data; computing
/// the difference in closed form also keeps it meaningful below the rounding
/// floor of f itself, which is what lets the solvers push the gradient norm
/// to 1e-8 and beyond. Without it the solvers fall back to
/// retract-and-evaluate differences.
struct Problem {
  const Manifold* manifold = nullptr;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> euclidean_gradient;
  std::function<Vector(const Vector&, const Vector&)> euclidean_hessian_vec;
  std::function<std::function<double(double)>(const Vector&, const Vector&)>
      line_decrease;
  /// Maps an objective value to the problem's quality functional (the value
  /// whose gap to the reference defines suboptimality). Defaults to −f.
  std::function<double(double)> quality_from_objective;
  PassCounter* passes = nullptr;
};

struct SolveResult {
  Vector x;
  ConvergenceTrace trace;
};

/// Riemannian gradient descent with Armijo backtracking (or a fixed step
/// schedule). The objective is nonincreasing along accepted steps.
SolveResult rgd(const Problem& problem, const Vector& x0,
                const SolverConfig& config);

/// Riemannian conjugate gradient, Polak–Ribière⁺ with the previous gradient
/// and direction moved by vector transport; resets to steepest descent on
/// non-descent directions and every cg_restart iterations.
SolveResult rcg(const Problem& problem, const Vector& x0,
                const SolverConfig& config);

struct HessianSpectrum {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;  // ratio of the extreme |eigenvalues|
  bool indefinite = false;
};

/// Extreme eigenvalues of the Riemannian Hessian at x restricted to the
/// tangent space, from the symmetric generalized eigenproblem on an explicit
/// tangent basis with the metric Gram on the right. Desk scale.
HessianSpectrum hessian_condition_at(const Problem& problem, const Vector& x);

}  // namespace ellopt
