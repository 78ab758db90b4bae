// Command line front end: run one CCA/LDA experiment and export the
// convergence trace as CSV, or sweep sketch sizes over several seeds.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "ellopt/harness.hpp"

namespace {

using namespace ellopt;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string x_path, y_path, data_path, labels_path, out_path;
  Index split_cols = 0;
  double lambda_x = 0.0, lambda_y = 0.0, lambda = 0.0;
  std::string precond = "countsketch";
  Index sketch_size = 0;
  Index rank_k = 0;
  std::string solver = "rcg";
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::size_t max_iters = 1000;
  bool no_warm_start = false;
  Index oracle_cap = 500;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool is_cca,
                bool with_sketch_size = true) {
  if (is_cca) {
    cmd->add_option("--x", o.x_path, "left data matrix, libsvm format");
    cmd->add_option("--y", o.y_path, "right data matrix, libsvm format");
    cmd->add_option("--data", o.data_path,
                    "single matrix split by columns into X|Y");
    cmd->add_option("--split-cols", o.split_cols,
                    "columns in the left block (0 = ceil(d/2))");
    cmd->add_option("--lambda-x", o.lambda_x, "ridge for the X Gram");
    cmd->add_option("--lambda-y", o.lambda_y, "ridge for the Y Gram");
  } else {
    cmd->add_option("--data", o.data_path,
                    "labeled data, libsvm format (labels inline)");
    cmd->add_option("--x", o.x_path, "data matrix, libsvm format");
    cmd->add_option("--labels-from-file", o.labels_path,
                    "labels, one numeric value per line (used with --x)");
    cmd->add_option("--lambda", o.lambda, "ridge added to the within scatter");
  }
  cmd->add_option("--precond", o.precond,
                  "identity | exact | countsketch | dominant")
      ->check(CLI::IsMember({"identity", "exact", "countsketch", "dominant"}));
  if (with_sketch_size)
    cmd->add_option("--sketch-size", o.sketch_size,
                    "CountSketch rows (>= data dimension)");
  cmd->add_option("--rank-k", o.rank_k, "dominant-subspace rank");
  cmd->add_option("--solver", o.solver, "rgd | rcg")
      ->check(CLI::IsMember({"rgd", "rcg"}));
  cmd->add_option("--seed", o.seed, "sketch seed");
  cmd->add_option("--tol", o.tol, "relative gradient-norm tolerance");
  cmd->add_option("--max-iters", o.max_iters, "iteration budget");
  cmd->add_flag("--no-warm-start", o.no_warm_start,
                "start from the normalized all-ones vector");
  cmd->add_option("--oracle-cap", o.oracle_cap,
                  "max dimension for the dense suboptimality oracle");
  cmd->add_option("--out", o.out_path, "trace CSV destination");
}

std::vector<double> read_labels_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<double> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      labels.push_back(std::stod(line));
    } catch (const std::logic_error&) {
      throw DataError("labels file line " + std::to_string(line_no) +
                      ": bad value '" + line + "'");
    }
  }
  return labels;
}

PrecondKind parse_precond(const std::string& name) {
  if (name == "identity") return PrecondKind::identity;
  if (name == "exact") return PrecondKind::exact;
  if (name == "countsketch") return PrecondKind::countsketch;
  return PrecondKind::dominant;
}

ExperimentConfig build_config(const CommonOpts& o, TaskKind task) {
  ExperimentConfig cfg;
  cfg.task = task;
  if (task == TaskKind::cca) {
    if (!o.data_path.empty()) {
      const LibsvmData data = parse_libsvm(o.data_path);
      if (data.no_rows) throw DataError(o.data_path + ": no rows");
      auto [left, right] = split_columns(data.x, o.split_cols);
      cfg.x = std::move(left);
      cfg.y = std::move(right);
    } else if (!o.x_path.empty() && !o.y_path.empty()) {
      const LibsvmData dx = parse_libsvm(o.x_path);
      const LibsvmData dy = parse_libsvm(o.y_path);
      if (dx.no_rows) throw DataError(o.x_path + ": no rows");
      if (dy.no_rows) throw DataError(o.y_path + ": no rows");
      cfg.x = dx.x;
      cfg.y = dy.x;
    } else {
      throw CLI::ValidationError("cca needs --x and --y, or --data");
    }
    cfg.lambda_x = o.lambda_x;
    cfg.lambda_y = o.lambda_y;
  } else {
    if (!o.data_path.empty()) {
      LibsvmData data = parse_libsvm(o.data_path);
      if (data.no_rows) throw DataError(o.data_path + ": no rows");
      cfg.x = std::move(data.x);
      cfg.labels = std::move(data.labels);
    } else if (!o.x_path.empty() && !o.labels_path.empty()) {
      const LibsvmData dx = parse_libsvm(o.x_path);
      if (dx.no_rows) throw DataError(o.x_path + ": no rows");
      cfg.x = dx.x;
      cfg.labels = read_labels_file(o.labels_path);
      if (static_cast<Index>(cfg.labels.size()) != cfg.x.rows())
        throw DataError("label count does not match row count");
    } else {
      throw CLI::ValidationError("lda needs --data, or --x with --labels-from-file");
    }
    cfg.lambda = o.lambda;
  }
  cfg.precond = parse_precond(o.precond);
  cfg.sketch_size = o.sketch_size;
  cfg.rank_k = o.rank_k;
  cfg.solver = o.solver == "rgd" ? SolverKind::rgd : SolverKind::rcg;
  cfg.seed = o.seed;
  cfg.tol = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.warm_start = !o.no_warm_start;
  cfg.oracle_cap = o.oracle_cap;
  cfg.out_path = o.out_path;
  return cfg;
}

int run_single(const CommonOpts& o, TaskKind task) {
  const ExperimentResult r = run_experiment(build_config(o, task));
  if (!r.warning.empty()) std::cerr << "warning: " << r.warning << "\n";
  std::cout << r.summary << "\n";
  return 0;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int run_sweep(const CommonOpts& o, TaskKind task,
              const std::vector<Index>& sizes, std::size_t num_seeds) {
  if (sizes.empty())
    throw CLI::ValidationError("sweep needs --sketch-size s1,s2,...");
  ExperimentConfig base = build_config(o, task);
  base.precond = PrecondKind::countsketch;
  base.out_path.clear();

  std::string csv =
      "task,sketch_size,seed,status,iterations,passes,suboptimality\n";
  for (Index s : sizes) {
    for (std::size_t i = 0; i < num_seeds; ++i) {
      ExperimentConfig cfg = base;
      cfg.sketch_size = s;
      cfg.seed = o.seed + i;
      const ExperimentResult r = run_experiment(cfg);
      csv += std::string(to_string(task)) + "," + std::to_string(s) + "," +
             std::to_string(cfg.seed) + "," + to_string(r.status) + "," +
             std::to_string(r.trace.iterations()) + "," +
             fmt(r.trace.total_passes()) + "," +
             (r.have_reference ? fmt(r.trace.records.back().suboptimality)
                               : std::string("nan")) +
             "\n";
      std::cout << r.summary << "\n";
    }
  }
  if (!o.out_path.empty()) {
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + o.out_path);
    out << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Riemannian solvers for top-1 CCA and LDA with randomized "
      "preconditioning"};
  app.require_subcommand(1);

  CommonOpts cca_opts, lda_opts, sweep_opts;
  CLI::App* cca_cmd =
      app.add_subcommand("cca", "top canonical correlation of two matrices");
  add_common(cca_cmd, cca_opts, true);
  CLI::App* lda_cmd =
      app.add_subcommand("lda", "leading discriminant direction");
  add_common(lda_cmd, lda_opts, false);

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "sketch-size sweep over several seeds");
  std::string sweep_task = "cca";
  std::vector<Index> sweep_sizes;
  std::size_t num_seeds = 5;
  sweep_cmd->add_option("--task", sweep_task, "cca | lda")
      ->check(CLI::IsMember({"cca", "lda"}));
  sweep_cmd
      ->add_option("--sketch-size", sweep_sizes, "comma-separated sketch sizes")
      ->delimiter(',');
  sweep_cmd->add_option("--num-seeds", num_seeds, "seeds per sketch size");
  add_common(sweep_cmd, sweep_opts, true, false);
  sweep_cmd->add_option("--labels-from-file", sweep_opts.labels_path,
                        "labels, one numeric value per line (used with --x)");
  sweep_cmd->add_option("--lambda", sweep_opts.lambda,
                        "ridge added to the within scatter (lda)");

  try {
    app.parse(argc, argv);
    if (cca_cmd->parsed()) return run_single(cca_opts, TaskKind::cca);
    if (lda_cmd->parsed()) return run_single(lda_opts, TaskKind::lda);
    const TaskKind task =
        sweep_task == "cca" ? TaskKind::cca : TaskKind::lda;
    return run_sweep(sweep_opts, task, sweep_sizes, num_seeds);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
