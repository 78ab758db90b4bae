#include "ellopt/solve.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace ellopt {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void validate_problem(const Problem& p, const Vector& x0) {
  if (!p.manifold) throw std::invalid_argument("solver: no manifold");
  if (!p.objective || !p.euclidean_gradient)
    throw std::invalid_argument("solver: objective and gradient are required");
  if (x0.size() != p.manifold->dim())
    throw std::invalid_argument("solver: x0 has wrong dimension");
  if (p.manifold->constraint_residual(x0) > 1e-6)
    throw std::invalid_argument("solver: x0 is not on the manifold");
}

double passes_now(const Problem& p) {
  return p.passes ? p.passes->passes : 0.0;
}

double suboptimality_of(const Problem& p, const SolverConfig& c, double f) {
  if (!c.reference_quality) return kNan;
  const double q = p.quality_from_objective ? p.quality_from_objective(f) : -f;
  const double ref = *c.reference_quality;
  const double denom = std::abs(ref) > 0.0 ? std::abs(ref) : 1.0;
  return std::abs(ref - q) / denom;
}

struct IterState {
  double f = 0.0;
  Vector eg;
  Vector rg;
  double grad_norm = 0.0;
};

IterState eval_state(const Problem& p, const Vector& x) {
  IterState s;
  s.f = p.objective(x);
  s.eg = p.euclidean_gradient(x);
  s.rg = p.manifold->egrad_to_rgrad(x, s.eg);
  s.grad_norm = std::sqrt(std::max(0.0, p.manifold->inner(s.rg, s.rg)));
  return s;
}

// Rough 1-D minimizer of a closed-form decrease model: doubling/halving
// bracket around the seed step followed by a golden-section refinement. Only
// used when trial evaluations are free of data passes.
double minimize_line_model(const std::function<double(double)>& dec,
                           double seed) {
  double best_t = seed;
  double best_v = dec(seed);
  double t = seed;
  for (int i = 0; i < 60; ++i) {  // the model can approach an asymptote
    t *= 2.0;
    const double v = dec(t);
    if (!std::isfinite(v) || v >= best_v) break;
    best_t = t;
    best_v = v;
  }
  if (best_t == seed) {
    t = seed;
    for (int i = 0; i < 40; ++i) {
      t *= 0.5;
      const double v = dec(t);
      if (!std::isfinite(v) || v >= best_v) break;
      best_t = t;
      best_v = v;
    }
  }
  double lo = 0.5 * best_t, hi = 2.0 * best_t;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - phi * (hi - lo), g = lo + phi * (hi - lo);
  double fc = dec(c), fg = dec(g);
  for (int i = 0; i < 40; ++i) {
    if (fc < fg) {
      hi = g;
      g = c;
      fg = fc;
      c = hi - phi * (hi - lo);
      fc = dec(c);
    } else {
      lo = c;
      c = g;
      fc = fg;
      g = lo + phi * (hi - lo);
      fg = dec(g);
    }
  }
  const double mid = 0.5 * (lo + hi);
  return dec(mid) <= best_v ? mid : best_t;
}

// Backtracking on the decrease f(R_x(τ d)) − f(x); returns the accepted step
// or nothing after max_halvings failures. With a line model the seed step is
// first moved to the model minimizer, which the Armijo test then verifies.
std::optional<double> armijo_search(const Problem& p, const Vector& x,
                                    const Vector& d, double f0, double g_dot_d,
                                    double tau0, const ArmijoOptions& opt) {
  if (!(g_dot_d < 0.0) || !std::isfinite(tau0) || tau0 <= 0.0)
    return std::nullopt;
  std::function<double(double)> decrease;
  if (p.line_decrease) {
    decrease = p.line_decrease(x, d);
    tau0 = minimize_line_model(decrease, tau0);
    if (!(tau0 > 0.0) || !std::isfinite(tau0)) return std::nullopt;
  } else {
    const Manifold* m = p.manifold;
    decrease = [&p, m, &x, &d, f0](double t) {
      return p.objective(m->retract(x, t * d)) - f0;
    };
  }
  double tau = tau0;
  for (int h = 0; h <= opt.max_halvings; ++h) {
    const double dt = decrease(tau);
    if (std::isfinite(dt) && dt <= opt.sufficient_decrease * tau * g_dot_d)
      return tau;
    tau *= opt.backtrack;
  }
  return std::nullopt;
}

}  // namespace

SolveResult rgd(const Problem& problem, const Vector& x0,
                const SolverConfig& config) {
  validate_problem(problem, x0);
  const Manifold& m = *problem.manifold;
  const double run_start = passes_now(problem);

  SolveResult out;
  out.x = x0;
  double last_step = 0.0;
  double prev_tau = 0.0;

  for (std::size_t k = 0;; ++k) {
    const IterState s = eval_state(problem, out.x);
    const double sub = suboptimality_of(problem, config, s.f);
    out.trace.records.push_back(
        {k, s.f, s.grad_norm, passes_now(problem) - run_start, last_step, sub});
    if (config.observer) config.observer(k, out.x);
    if (s.grad_norm <= config.grad_tol * std::max(1.0, std::abs(s.f))) {
      out.trace.status = SolveStatus::converged;
      break;
    }
    if (config.target_suboptimality && !std::isnan(sub) &&
        sub <= *config.target_suboptimality) {
      out.trace.status = SolveStatus::converged;
      break;
    }
    if (k >= config.max_iters) {
      out.trace.status = SolveStatus::max_iters;
      break;
    }

    const Vector d = -s.rg;
    double tau;
    if (config.fixed_step) {
      tau = config.fixed_step(k, out.x);
    } else {
      const double tau0 = k == 0 ? 1.0 / s.grad_norm : 2.0 * prev_tau;
      const auto accepted =
          armijo_search(problem, out.x, d, s.f,
                        -s.grad_norm * s.grad_norm, tau0, config.armijo);
      if (!accepted) {
        out.trace.status = SolveStatus::line_search_failure;
        break;
      }
      tau = *accepted;
    }
    out.x = m.retract(out.x, tau * d);
    prev_tau = tau;
    last_step = tau;
  }
  return out;
}

SolveResult rcg(const Problem& problem, const Vector& x0,
                const SolverConfig& config) {
  validate_problem(problem, x0);
  const Manifold& m = *problem.manifold;
  const double run_start = passes_now(problem);
  const std::size_t restart =
      config.cg_restart > 0 ? config.cg_restart
                            : static_cast<std::size_t>(m.dim());

  SolveResult out;
  out.x = x0;
  IterState s = eval_state(problem, out.x);
  Vector d = -s.rg;
  double last_step = 0.0;
  double prev_tau = 0.0;
  Vector best_x = out.x;
  double best_f = s.f;

  for (std::size_t k = 0;; ++k) {
    const double sub = suboptimality_of(problem, config, s.f);
    out.trace.records.push_back(
        {k, s.f, s.grad_norm, passes_now(problem) - run_start, last_step, sub});
    if (config.observer) config.observer(k, out.x);
    if (s.f < best_f) {
      best_f = s.f;
      best_x = out.x;
    }
    if (s.grad_norm <= config.grad_tol * std::max(1.0, std::abs(s.f))) {
      out.trace.status = SolveStatus::converged;
      break;
    }
    if (config.target_suboptimality && !std::isnan(sub) &&
        sub <= *config.target_suboptimality) {
      out.trace.status = SolveStatus::converged;
      break;
    }
    if (k >= config.max_iters) {
      out.trace.status = SolveStatus::max_iters;
      break;
    }

    double g_dot_d = m.inner(d, s.rg);
    if (g_dot_d >= 0.0) {  // not a descent direction: reset
      d = -s.rg;
      g_dot_d = -s.grad_norm * s.grad_norm;
    }

    double tau;
    if (config.fixed_step) {
      tau = config.fixed_step(k, out.x);
    } else {
      const double tau0 = k == 0 ? 1.0 / s.grad_norm : 2.0 * prev_tau;
      const auto accepted =
          armijo_search(problem, out.x, d, s.f, g_dot_d, tau0, config.armijo);
      if (!accepted) {
        out.trace.status = SolveStatus::line_search_failure;
        break;
      }
      tau = *accepted;
    }

    const Vector step_vec = tau * d;
    const Vector x_new = m.retract(out.x, step_vec);
    const IterState s_new = eval_state(problem, x_new);

    // Polak–Ribière⁺ with the previous gradient and direction transported to
    // the new tangent space.
    const Vector moved_grad = m.transport(out.x, step_vec, s.rg);
    const Vector moved_dir = m.transport(out.x, step_vec, d);
    const double denom = s.grad_norm * s.grad_norm;
    double beta = 0.0;
    if (denom > 0.0)
      beta = std::max(0.0, m.inner(s_new.rg, s_new.rg - moved_grad) / denom);
    d = -s_new.rg + beta * moved_dir;
    if ((k + 1) % restart == 0) d = -s_new.rg;

    out.x = x_new;
    s = s_new;
    prev_tau = tau;
    last_step = tau;
  }

  if (best_f < out.trace.records.back().objective) out.x = best_x;
  return out;
}

HessianSpectrum hessian_condition_at(const Problem& problem, const Vector& x) {
  validate_problem(problem, x);
  if (!problem.euclidean_hessian_vec)
    throw std::invalid_argument(
        "hessian_condition_at: euclidean_hessian_vec is required");
  const Manifold& m = *problem.manifold;

  const Matrix basis = m.tangent_basis(x);
  const Index t = basis.cols();
  const Vector eg = problem.euclidean_gradient(x);
  const Vector rg = m.egrad_to_rgrad(x, eg);

  Matrix h(t, t), gram(t, t);
  for (Index j = 0; j < t; ++j) {
    const Vector tj = basis.col(j);
    gram.col(j) = basis.transpose() * m.metric_apply(tj);
    const Vector hess_tj =
        m.hess_apply(x, eg, problem.euclidean_hessian_vec(x, tj), tj, rg);
    h.col(j) = basis.transpose() * m.metric_apply(hess_tj);
  }
  h = 0.5 * (h + h.transpose()).eval();
  gram = 0.5 * (gram + gram.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(h, gram,
                                                      Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("hessian_condition_at: eigensolver failed");

  HessianSpectrum spec;
  spec.lambda_min = es.eigenvalues()[0];
  spec.lambda_max = es.eigenvalues()[t - 1];
  spec.indefinite = spec.lambda_min < 0.0 && spec.lambda_max > 0.0;
  const double lo = std::min(std::abs(spec.lambda_min), std::abs(spec.lambda_max));
  const double hi = std::max(std::abs(spec.lambda_min), std::abs(spec.lambda_max));
  spec.kappa = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return spec;
}

}  // namespace ellopt
