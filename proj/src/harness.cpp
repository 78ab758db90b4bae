#include "ellopt/harness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ellopt {

namespace {

[[noreturn]] void line_error(std::size_t line_no, const std::string& why) {
  throw DataError("libsvm line " + std::to_string(line_no) + ": " + why);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in) {
  std::vector<std::tuple<Index, Index, double>> entries;
  std::vector<double> labels;
  Index max_col = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      line_error(line_no, "blank line");
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) line_error(line_no, "missing label");
    double label;
    try {
      std::size_t used = 0;
      label = std::stod(tok, &used);
      if (used != tok.size()) line_error(line_no, "bad label '" + tok + "'");
    } catch (const std::logic_error&) {
      line_error(line_no, "bad label '" + tok + "'");
    }
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(label);
    Index prev_idx = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        line_error(line_no, "expected idx:val, got '" + tok + "'");
      Index idx;
      double val;
      try {
        std::size_t used = 0;
        idx = static_cast<Index>(std::stoll(tok.substr(0, colon), &used));
        if (used != colon) line_error(line_no, "bad index in '" + tok + "'");
        val = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1)
          line_error(line_no, "bad value in '" + tok + "'");
      } catch (const std::logic_error&) {
        line_error(line_no, "bad token '" + tok + "'");
      }
      if (idx < 1) line_error(line_no, "indices are 1-based");
      if (idx == prev_idx) line_error(line_no, "duplicate index " + std::to_string(idx));
      if (idx < prev_idx) line_error(line_no, "indices must increase");
      prev_idx = idx;
      max_col = std::max(max_col, idx);
      entries.emplace_back(row, idx - 1, val);
    }
  }
  LibsvmData out;
  out.no_rows = labels.empty();
  out.x = SparseMatrix::from_triplets(static_cast<Index>(labels.size()),
                                      max_col, entries);
  out.labels = std::move(labels);
  return out;
}

LibsvmData parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_libsvm(in);
}

void write_libsvm(std::ostream& out, const SparseMatrix& x,
                  const std::vector<double>& labels) {
  if (static_cast<Index>(labels.size()) != x.rows())
    throw std::invalid_argument("write_libsvm: label count mismatch");
  for (Index i = 0; i < x.rows(); ++i) {
    out << fmt(labels[i]);
    for (Index k = x.offsets()[i]; k < x.offsets()[i + 1]; ++k)
      out << ' ' << (x.col_indices()[k] + 1) << ':' << fmt(x.values()[k]);
    out << '\n';
  }
}

std::pair<SparseMatrix, SparseMatrix> split_columns(const SparseMatrix& x,
                                                    Index left) {
  if (left == 0) left = (x.cols() + 1) / 2;  // left block gets ⌈d/2⌉
  if (left < 1 || left >= x.cols())
    throw std::invalid_argument("split_columns: left block out of range");
  std::vector<std::tuple<Index, Index, double>> le, ri;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index k = x.offsets()[i]; k < x.offsets()[i + 1]; ++k) {
      const Index j = x.col_indices()[k];
      if (j < left)
        le.emplace_back(i, j, x.values()[k]);
      else
        ri.emplace_back(i, j - left, x.values()[k]);
    }
  }
  return {SparseMatrix::from_triplets(x.rows(), left, le),
          SparseMatrix::from_triplets(x.rows(), x.cols() - left, ri)};
}

const char* to_string(TaskKind k) {
  return k == TaskKind::cca ? "cca" : "lda";
}

const char* to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::identity: return "identity";
    case PrecondKind::exact: return "exact";
    case PrecondKind::countsketch: return "countsketch";
    case PrecondKind::dominant: return "dominant";
  }
  return "unknown";
}

const char* to_string(SolverKind k) {
  return k == SolverKind::rgd ? "rgd" : "rcg";
}

std::string trace_to_csv(const ConvergenceTrace& trace,
                         bool include_suboptimality) {
  std::string out = include_suboptimality
                        ? "iter,passes,objective,gradnorm,suboptimality,step\n"
                        : "iter,passes,objective,gradnorm,step\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += fmt(trace.setup_passes + r.passes);
    out += ',';
    out += fmt(r.objective);
    out += ',';
    out += fmt(r.grad_norm);
    if (include_suboptimality) {
      out += ',';
      out += fmt(r.suboptimality);
    }
    out += ',';
    out += fmt(r.step);
    out += '\n';
  }
  return out;
}

namespace {

struct PrecondPair {
  PrecondPtr first;
  PrecondPtr second;  // null for LDA
};

SolveResult run_solver(SolverKind kind, const Problem& prob, const Vector& x0,
                       const SolverConfig& config) {
  return kind == SolverKind::rgd ? rgd(prob, x0, config)
                                 : rcg(prob, x0, config);
}

ExperimentResult finish(const ExperimentConfig& config, SolveResult run,
                        double setup_passes, double final_value,
                        bool have_reference, double reference,
                        std::string warning) {
  run.trace.setup_passes = setup_passes;
  ExperimentResult out;
  out.status = run.trace.status;
  out.final_value = final_value;
  out.reference = reference;
  out.have_reference = have_reference;
  out.warning = std::move(warning);
  out.csv = trace_to_csv(run.trace, have_reference);
  if (!config.out_path.empty()) {
    std::ofstream file(config.out_path, std::ios::binary);
    if (!file) throw DataError("cannot write " + config.out_path);
    file << out.csv;
  }
  std::ostringstream summary;
  summary << "task=" << to_string(config.task)
          << " precond=" << to_string(config.precond);
  if (config.precond == PrecondKind::countsketch)
    summary << " s=" << config.sketch_size;
  if (config.precond == PrecondKind::dominant)
    summary << " k=" << config.rank_k;
  summary << " solver=" << to_string(config.solver) << " seed=" << config.seed
          << " status=" << to_string(run.trace.status)
          << " iters=" << run.trace.iterations()
          << " passes=" << run.trace.total_passes()
          << " value=" << fmt(final_value);
  if (have_reference) {
    const TraceRecord& last = run.trace.records.back();
    summary << " suboptimality=" << fmt(last.suboptimality);
  }
  out.summary = summary.str();
  out.trace = std::move(run.trace);
  return out;
}

ExperimentResult run_cca(const ExperimentConfig& config) {
  CCAProblem p(config.x, config.y, config.lambda_x, config.lambda_y);
  const Index dmax = std::max(p.dim_x(), p.dim_y());

  bool have_reference = false;
  double reference = 0.0;
  std::string warning;
  if (dmax <= config.oracle_cap) {
    const CCAResult oracle =
        exact_cca(config.x, config.y, config.lambda_x, config.lambda_y);
    reference = oracle.sigma1;
    have_reference = true;
  } else {
    warning = "dimension above oracle cap; suboptimality column omitted";
  }

  PrecondPtr m_xx, m_yy;
  Matrix xs, ys;
  switch (config.precond) {
    case PrecondKind::identity:
      m_xx = identity_precond(p.dim_x());
      m_yy = identity_precond(p.dim_y());
      break;
    case PrecondKind::exact:
      m_xx = build_exact_gram(p.x(), config.lambda_x, &p.passes());
      m_yy = build_exact_gram(p.y(), config.lambda_y, &p.passes());
      break;
    case PrecondKind::countsketch: {
      if (config.sketch_size < dmax)
        throw std::invalid_argument("countsketch needs s >= max(d_x, d_y)");
      const CountSketch sketch(p.samples(), config.sketch_size, config.seed);
      xs = sketch_apply(sketch, p.x(), &p.passes());
      ys = sketch_apply(sketch, p.y(), &p.passes());
      m_xx = build_sketched_gram(xs, config.lambda_x);
      m_yy = build_sketched_gram(ys, config.lambda_y);
      break;
    }
    case PrecondKind::dominant:
      if (config.rank_k < 1 || config.rank_k >= std::min(p.dim_x(), p.dim_y()))
        throw std::invalid_argument("dominant needs 1 <= k < min(d_x, d_y)");
      m_xx = build_dominant_subspace(p.x(), config.lambda_x, config.rank_k,
                                     &p.passes());
      m_yy = build_dominant_subspace(p.y(), config.lambda_y, config.rank_k,
                                     &p.passes());
      break;
  }

  const ProductEllipsoid manifold = p.manifold(m_xx, m_yy);
  Vector z0;
  if (config.precond == PrecondKind::countsketch && config.warm_start) {
    const CCAResult warm = exact_cca(xs, ys, config.lambda_x, config.lambda_y);
    const Vector u0 =
        warm.u / std::sqrt(warm.u.dot(gram_apply(p.x(), config.lambda_x,
                                                 warm.u, &p.passes())));
    const Vector v0 =
        warm.v / std::sqrt(warm.v.dot(gram_apply(p.y(), config.lambda_y,
                                                 warm.v, &p.passes())));
    z0 = p.stack(u0, v0);
  } else {
    z0 = p.default_start(manifold);
  }

  SolverConfig solver;
  solver.max_iters = config.max_iters;
  solver.grad_tol = config.tol;
  if (have_reference) solver.reference_quality = reference;

  const double setup_passes = p.passes().passes;
  const Problem prob = p.make_problem(manifold);
  SolveResult run = run_solver(config.solver, prob, z0, solver);
  const double final_value =
      p.block_u(run.x).dot(cross_gram_apply(p.x(), p.y(), p.block_v(run.x),
                                            false, &p.passes()));
  return finish(config, std::move(run), setup_passes, final_value,
                have_reference, reference, std::move(warning));
}

ExperimentResult run_lda(const ExperimentConfig& config) {
  LDAProblem p(config.x, config.labels, config.lambda);

  bool have_reference = false;
  double reference = 0.0;
  std::string warning;
  if (p.dim() <= config.oracle_cap) {
    const LDAResult oracle = exact_lda(config.x, config.labels, config.lambda);
    reference = oracle.rho1;
    have_reference = true;
  } else {
    warning = "dimension above oracle cap; suboptimality column omitted";
  }

  PrecondPtr metric;
  Matrix xs;
  switch (config.precond) {
    case PrecondKind::identity:
      metric = identity_precond(p.dim());
      break;
    case PrecondKind::exact: {
      p.passes().add(1.0);
      Matrix sw = p.dense_scatter_within();
      sw.diagonal().array() += config.lambda;
      metric = dense_spd_precond(std::move(sw));
      break;
    }
    case PrecondKind::countsketch: {
      if (config.sketch_size < p.dim())
        throw std::invalid_argument("countsketch needs s >= d");
      const CountSketch sketch(p.samples(), config.sketch_size, config.seed);
      xs = p.sketch_centered(sketch);
      metric = build_sketched_gram(xs, config.lambda);
      break;
    }
    case PrecondKind::dominant: {
      if (config.rank_k < 1 || config.rank_k >= p.dim())
        throw std::invalid_argument("dominant needs 1 <= k < d");
      p.passes().add(1.0);
      metric = build_dominant_subspace(p.dense_scatter_within(), config.lambda,
                                       config.rank_k);
      break;
    }
  }

  const Ellipsoid manifold = p.manifold(metric);
  Vector w0;
  if (config.precond == PrecondKind::countsketch && config.warm_start) {
    const Matrix sb = p.dense_scatter_between();
    Vector w_tilde;
    if (const Matrix* r = metric->triangular_factor()) {
      const Matrix t = r->transpose().triangularView<Eigen::Lower>().solve(sb);
      const Matrix reduced =
          r->transpose().triangularView<Eigen::Lower>().solve(t.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          Matrix(0.5 * (reduced + reduced.transpose())));
      if (es.info() != Eigen::Success)
        throw NumericalError("warm-start eigensolver failed");
      w_tilde = r->triangularView<Eigen::Upper>().solve(
          es.eigenvectors().col(p.dim() - 1));
    } else {
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sb,
                                                          metric->to_dense());
      if (es.info() != Eigen::Success)
        throw NumericalError("warm-start eigensolver failed");
      w_tilde = es.eigenvectors().col(p.dim() - 1);
    }
    w0 = w_tilde / std::sqrt(w_tilde.dot(p.scatter_within_reg_apply(w_tilde)));
  } else {
    w0 = p.default_start(manifold);
  }

  SolverConfig solver;
  solver.max_iters = config.max_iters;
  solver.grad_tol = config.tol;
  if (have_reference) solver.reference_quality = reference;

  const double setup_passes = p.passes().passes;
  const Problem prob = p.make_problem(manifold);
  SolveResult run = run_solver(config.solver, prob, w0, solver);
  const double final_value = run.x.dot(p.scatter_between_apply(run.x));
  return finish(config, std::move(run), setup_passes, final_value,
                have_reference, reference, std::move(warning));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.task == TaskKind::cca) return run_cca(config);
  return run_lda(config);
}

}  // namespace ellopt
