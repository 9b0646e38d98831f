#include "csic/codegen.hpp"
#include "csic/errors.hpp"
#include "csic/evaluation.hpp"
#include "csic/parallel.hpp"
#include "csic/pipeline.hpp"
#include "csic/sensing.hpp"
#include "csic/spectral.hpp"
#include "csic/srssc.hpp"
#include "csic/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace csic;

namespace {

using CubeArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

SpectralCube cube_from(const CubeArray& a) {
  if (a.ndim() != 3) throw ValidationError("cube must be a (rows, cols, bands) array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  const auto b = static_cast<std::size_t>(a.shape(2));
  return SpectralCube(r, c, b, std::vector<double>(a.data(), a.data() + a.size()));
}

CubeArray cube_to(const SpectralCube& cube) {
  CubeArray out({cube.rows(), cube.cols(), cube.bands()});
  std::copy(cube.values().begin(), cube.values().end(), out.mutable_data());
  return out;
}

LabelMap labels_from(const LabelArray& a) {
  if (a.ndim() != 2) throw ValidationError("labels must be a (rows, cols) array");
  return LabelMap(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                  std::vector<int>(a.data(), a.data() + a.size()));
}

LabelArray labels_to(const LabelMap& m) {
  LabelArray out({m.rows(), m.cols()});
  std::copy(m.labels().begin(), m.labels().end(), out.mutable_data());
  return out;
}

py::dict metrics_dict(const Metrics& m, const ConfusionMatrix& cm) {
  return py::module_::import("json").attr("loads")(metrics_to_json(m, cm).dump());
}

}  // namespace

PYBIND11_MODULE(_csic, m) {
  m.doc() = "Compressive spectral image clustering";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

  m.def("set_serial", &set_serial, py::arg("serial"));

  m.def(
      "synth_cube",
      [](std::uint64_t seed, std::size_t rows, std::size_t cols, std::size_t bands, int classes, double sigma) {
        auto [cube, labels] = synth_cube(seed, rows, cols, bands, classes, sigma);
        return py::make_tuple(cube_to(cube), labels_to(labels));
      },
      py::arg("seed"), py::arg("rows"), py::arg("cols"), py::arg("bands"), py::arg("classes"),
      py::arg("sigma") = 0.0, "Synthetic union-of-subspaces cube and its ground-truth labels.");

  py::class_<CodingPattern>(m, "CodingPattern")
      .def_property_readonly("snapshots", &CodingPattern::snapshots)
      .def_property_readonly("bands", &CodingPattern::bands)
      .def_property_readonly("bandwidth", &CodingPattern::bandwidth)
      .def_property_readonly("windows",
                             [](const CodingPattern& p) {
                               std::vector<std::pair<std::size_t, std::size_t>> w;
                               for (const auto& x : p.windows()) w.emplace_back(x.first, x.last);
                               return w;
                             })
      .def("matrix", &CodingPattern::as_matrix)
      .def("score", [](const CodingPattern& p) {
        const auto s = score_pattern(p);
        py::dict d;
        d["band_correlation"] = s.band_correlation;
        d["snapshot_correlation"] = s.snapshot_correlation;
        d["coverage_min"] = s.coverage_min;
        d["coverage_max"] = s.coverage_max;
        return d;
      });

  m.def("random_pattern", &random_pattern, py::arg("seed"), py::arg("snapshots"), py::arg("bands"),
        py::arg("bandwidth"));
  m.def(
      "gp_pattern",
      [](std::uint64_t seed, std::size_t snapshots, std::size_t bands, std::size_t bandwidth) {
        return gp_pattern(seed, snapshots, bands, bandwidth);
      },
      py::arg("seed"), py::arg("snapshots"), py::arg("bands"), py::arg("bandwidth"));

  m.def(
      "sense",
      [](const CubeArray& cube, const CodingPattern& pattern, double sigma, std::uint64_t seed) {
        return sense(cube_from(cube), pattern, NoiseSpec{sigma, seed}).data;
      },
      py::arg("cube"), py::arg("pattern"), py::arg("sigma") = 0.0, py::arg("seed") = 0,
      "S x (rows*cols) measurements, pixel p = i*cols + j.");

  m.def(
      "solve_srssc",
      [](const Matrix& y, std::size_t rows, std::size_t cols, std::optional<double> lambda, double alpha,
         std::optional<double> rho, double tol, int max_iter, int outer_iters) {
        RunConfig cfg;
        cfg.lambda = lambda;
        cfg.alpha = alpha;
        cfg.rho = rho;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.outer_iters = outer_iters;
        const auto problem = make_problem(y, rows, cols, cfg);
        SrsscSolution sol;
        {
          py::gil_scoped_release release;
          sol = solve_srssc(problem);
        }
        py::dict d;
        d["c"] = sol.c;
        d["converged"] = sol.converged;
        d["iterations"] = sol.iterations;
        d["lambda"] = problem.lambda;
        d["rho"] = problem.rho;
        d["residuals"] = py::dict(py::arg("equality") = sol.residuals.equality,
                                  py::arg("diagonal") = sol.residuals.diagonal,
                                  py::arg("affine") = sol.residuals.affine,
                                  py::arg("consensus") = sol.residuals.consensus);
        return d;
      },
      py::arg("y"), py::arg("rows"), py::arg("cols"), py::arg("lambda_") = py::none(), py::arg("alpha") = 0.0,
      py::arg("rho") = py::none(), py::arg("tol") = 1e-4, py::arg("max_iter") = 5000, py::arg("outer_iters") = 3);

  m.def("mean_filter_3d", &mean_filter_3d, py::arg("c"), py::arg("rows"), py::arg("cols"));
  m.def(
      "build_affinity", [](const Matrix& c) { return build_affinity(c).w; }, py::arg("c"));

  m.def(
      "spectral_cluster",
      [](const Matrix& w, int k, std::uint64_t seed, int restarts) {
        return spectral_cluster(AffinityMatrix{w}, k, seed, restarts).labels;
      },
      py::arg("w"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 20,
      "Cluster ids 1..k, one per affinity row.");

  m.def(
      "evaluate",
      [](const LabelArray& pred, const LabelArray& truth) {
        const auto t = labels_from(truth);
        const auto p = labels_from(pred);
        if (p.rows() != t.rows() || p.cols() != t.cols()) throw ValidationError("pred and truth shapes differ");
        t.require_clusterable();
        ClusterAssignment a;
        a.k = t.num_classes();
        a.labels = p.labels();
        const auto mapping = align_labels(a, t);
        const auto cm = confusion_matrix(a, mapping, t);
        return metrics_dict(compute_metrics(cm), cm);
      },
      py::arg("pred"), py::arg("truth"), "Aligns clusters to classes and returns OA/AA/Kappa in percent.");

  m.def(
      "run_pipeline",
      [](const py::dict& config) {
        const auto text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
        const auto spec = PipelineSpec::from_json(nlohmann::json::parse(text));
        PipelineResult result;
        {
          py::gil_scoped_release release;
          result = run_pipeline(spec);
        }
        auto d = metrics_dict(result.metrics, result.confusion);
        d["converged"] = result.converged;
        d["iterations"] = result.iterations;
        return d;
      },
      py::arg("config"), "Runs the end-to-end pipeline from a run.json-style dict.");
}
