#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ellopt/harness.hpp"

namespace py = pybind11;
using namespace ellopt;

namespace {

SketchedSolveOptions make_options(double tol, std::size_t max_iters,
                                  bool warm_start, bool use_rgd) {
  SketchedSolveOptions opts;
  opts.solver.grad_tol = tol;
  opts.solver.max_iters = max_iters;
  opts.warm_start = warm_start;
  opts.use_rgd = use_rgd;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Riemannian solvers for top-1 CCA and LDA with sketched "
      "preconditioning";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError",
                                         PyExc_ArithmeticError);

  py::class_<SparseMatrix>(m, "SparseMatrix",
                           "Compressed sparse row matrix (double entries)")
      .def(py::init([](const Matrix& dense) {
             return SparseMatrix::from_dense(dense);
           }),
           py::arg("dense"))
      .def(py::init([](Index rows, Index cols, std::vector<Index> offsets,
                       std::vector<Index> indices, std::vector<double> values) {
             return SparseMatrix(rows, cols, std::move(offsets),
                                 std::move(indices), std::move(values));
           }),
           py::arg("rows"), py::arg("cols"), py::arg("indptr"),
           py::arg("indices"), py::arg("data"))
      .def_property_readonly("shape",
                             [](const SparseMatrix& z) {
                               return py::make_tuple(z.rows(), z.cols());
                             })
      .def_property_readonly("nnz", &SparseMatrix::nnz)
      .def("to_dense", &SparseMatrix::to_dense)
      .def("__matmul__",
           [](const SparseMatrix& z, const Vector& x) { return z.multiply(x); });

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &TraceRecord::iter)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("grad_norm", &TraceRecord::grad_norm)
      .def_readonly("passes", &TraceRecord::passes)
      .def_readonly("step", &TraceRecord::step)
      .def_readonly("suboptimality", &TraceRecord::suboptimality);

  py::class_<ConvergenceTrace>(m, "ConvergenceTrace")
      .def_readonly("records", &ConvergenceTrace::records)
      .def_readonly("setup_passes", &ConvergenceTrace::setup_passes)
      .def_property_readonly("status",
                             [](const ConvergenceTrace& t) {
                               return std::string(to_string(t.status));
                             })
      .def_property_readonly("iterations", &ConvergenceTrace::iterations)
      .def_property_readonly("total_passes", &ConvergenceTrace::total_passes);

  py::class_<CCAResult>(m, "CCAResult")
      .def_readonly("sigma1", &CCAResult::sigma1)
      .def_readonly("u", &CCAResult::u)
      .def_readonly("v", &CCAResult::v)
      .def_readonly("trace", &CCAResult::trace);

  py::class_<LDAResult>(m, "LDAResult")
      .def_readonly("rho1", &LDAResult::rho1)
      .def_readonly("w", &LDAResult::w)
      .def_readonly("degenerate", &LDAResult::degenerate)
      .def_readonly("trace", &LDAResult::trace);

  py::class_<CountSketch>(m, "CountSketch")
      .def(py::init<Index, Index, std::uint64_t>(), py::arg("n"), py::arg("s"),
           py::arg("seed"))
      .def_property_readonly("input_rows", &CountSketch::input_rows)
      .def_property_readonly("sketch_rows", &CountSketch::sketch_rows)
      .def("to_dense", &CountSketch::to_dense)
      .def("apply",
           [](const CountSketch& s, const SparseMatrix& z) {
             return sketch_apply(s, z);
           })
      .def("apply", [](const CountSketch& s, const Matrix& z) {
        return sketch_apply(s, z);
      });

  m.def(
      "exact_cca",
      [](const SparseMatrix& x, const SparseMatrix& y, double lambda_x,
         double lambda_y) { return exact_cca(x, y, lambda_x, lambda_y); },
      py::arg("x"), py::arg("y"), py::arg("lambda_x") = 0.0,
      py::arg("lambda_y") = 0.0,
      "Dense oracle for the top canonical correlation (desk scale)");

  m.def(
      "sketched_cca",
      [](const SparseMatrix& x, const SparseMatrix& y, double lambda_x,
         double lambda_y, Index sketch_size, std::uint64_t seed, double tol,
         std::size_t max_iters, bool warm_start, bool use_rgd) {
        return sketched_cca(x, y, lambda_x, lambda_y, sketch_size, seed,
                            make_options(tol, max_iters, warm_start, use_rgd));
      },
      py::arg("x"), py::arg("y"), py::arg("lambda_x"), py::arg("lambda_y"),
      py::arg("sketch_size"), py::arg("seed") = 0, py::arg("tol") = 1e-8,
      py::arg("max_iters") = 1000, py::arg("warm_start") = true,
      py::arg("use_rgd") = false,
      "Sketch-preconditioned Riemannian solve of the top canonical "
      "correlation");

  m.def(
      "exact_lda",
      [](const SparseMatrix& x, const std::vector<double>& labels,
         double lam) { return exact_lda(x, labels, lam); },
      py::arg("x"), py::arg("labels"), py::arg("lambda_") = 0.0,
      "Dense oracle for the leading discriminant direction (desk scale)");

  m.def(
      "sketched_lda",
      [](const SparseMatrix& x, const std::vector<double>& labels, double lam,
         Index sketch_size, std::uint64_t seed, double tol,
         std::size_t max_iters, bool warm_start, bool use_rgd) {
        return sketched_lda(x, labels, lam, sketch_size, seed,
                            make_options(tol, max_iters, warm_start, use_rgd));
      },
      py::arg("x"), py::arg("labels"), py::arg("lambda_"),
      py::arg("sketch_size"), py::arg("seed") = 0, py::arg("tol") = 1e-8,
      py::arg("max_iters") = 1000, py::arg("warm_start") = true,
      py::arg("use_rgd") = false,
      "Sketch-preconditioned Riemannian solve of the leading discriminant "
      "direction");

  m.def("effective_dimension", &effective_dimension, py::arg("z"),
        py::arg("lambda_"),
        "Tr((ZᵀZ+λI)⁻¹ ZᵀZ), the ridge effective dimension");

  m.def(
      "recommended_sketch_size",
      [](double s_eff, double delta, const std::string& problem) {
        if (problem != "cca" && problem != "lda")
          throw std::invalid_argument("problem must be 'cca' or 'lda'");
        return recommended_sketch_size(
            s_eff, delta,
            problem == "cca" ? SketchProblem::cca : SketchProblem::lda);
      },
      py::arg("s_eff"), py::arg("delta"), py::arg("problem"),
      "Worst-case sketch-size rule (advisory)");

  m.def("pencil_condition_number", &pencil_condition_number, py::arg("a"),
        py::arg("b"), "Generalized condition number of the pencil (A, B)");

  m.def(
      "parse_libsvm",
      [](const std::string& path) {
        LibsvmData data = parse_libsvm(path);
        return py::make_tuple(std::move(data.x), std::move(data.labels));
      },
      py::arg("path"), "Read a libsvm text file into (matrix, labels)");

  m.def(
      "split_columns",
      [](const SparseMatrix& x, Index left) { return split_columns(x, left); },
      py::arg("x"), py::arg("left") = 0,
      "Partition columns into a left/right pair (left=0 takes ceil(d/2))");
}
