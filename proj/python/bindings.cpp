#include "hypercert/acceptance.hpp"
#include "hypercert/certifier.hpp"
#include "hypercert/cocycle.hpp"
#include "hypercert/periodic.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace hypercert;

namespace {

std::vector<double> coords(const StatePoint& p) {
  std::vector<double> out;
  for (int i = 0; i < p.dim(); ++i) out.push_back(p[i]);
  return out;
}

StatePoint point(const std::vector<double>& x) {
  if (x.size() == 1) return StatePoint(x[0]);
  if (x.size() == 2) return StatePoint(x[0], x[1]);
  throw PreconditionError("point must have 1 or 2 coordinates");
}

std::vector<std::vector<double>> matrix(const Mat& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
  }
  return out;
}

py::list orbits_of(const MapModel& m, std::size_t max_period) {
  const PeriodicSet set = find_periodic_points(m, max_period);
  py::list out;
  for (const auto& o : set.orbits) {
    py::dict d;
    std::vector<std::vector<double>> pts;
    for (const auto& p : o.points) pts.push_back(coords(p));
    d["period"] = o.period;
    d["points"] = pts;
    d["period_map"] = matrix(o.period_map);
    d["label"] = orbit_label(o);
    out.append(d);
  }
  return out;
}

CocycleSequence sequence(const std::vector<double>& values) {
  CocycleSequence s;
  s.values = values;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hyperbolicity certificates for circle and torus maps";
  m.attr("__version__") = kToolVersion;

  py::class_<MapModel>(m, "MapModel")
      .def_static("doubling", &MapModel::doubling)
      .def_static("perturbed_doubling", &MapModel::perturbed_doubling, py::arg("s"))
      .def_static("cat_map", &MapModel::cat_map)
      .def_static("perturbed_cat", &MapModel::perturbed_cat, py::arg("s"))
      .def_static("custom_circle", &MapModel::custom_circle, py::arg("lift"), py::arg("derivative"),
                  py::arg("degree"))
      .def_property_readonly("id", &MapModel::id)
      .def_property_readonly("dim", &MapModel::dim)
      .def_property_readonly("degree", &MapModel::degree)
      .def("__call__", [](const MapModel& self, const std::vector<double>& x) { return coords(eval_map(self, point(x))); })
      .def("jacobian", [](const MapModel& self, const std::vector<double>& x) { return matrix(jacobian(self, point(x))); })
      .def("__repr__", [](const MapModel& self) { return "<MapModel " + self.id() + ">"; });

  m.def("periodic_orbits", &orbits_of, py::arg("model"), py::arg("max_period"));

  m.def("hyperbolic_times", [](const std::vector<double>& a, double varsigma) {
    return hyperbolic_times(sequence(a), varsigma);
  }, py::arg("values"), py::arg("varsigma"));

  m.def("pliss_density", [](const std::vector<double>& a, double varsigma, double varsigma_prime) {
    const PlissCount c = pliss_density(sequence(a), varsigma, varsigma_prime);
    return py::dict("guaranteed"_a = c.guaranteed, "actual"_a = c.actual, "mean"_a = c.mean, "floor"_a = c.floor);
  }, py::arg("values"), py::arg("varsigma"), py::arg("varsigma_prime"));

  m.def("lyapunov_spectrum", [](const MapModel& model, const std::vector<double>& x, std::size_t n) {
    return lyapunov_spectrum(model, point(x), n);
  }, py::arg("model"), py::arg("x"), py::arg("n"));

  m.def("certify_json", [](const std::string& config_text, std::optional<std::uint64_t> seed) {
    RunConfig c = parse_config(config_text);
    if (seed) c.seed = *seed;
    py::gil_scoped_release release;
    return report_json(run_pipeline(c));
  }, py::arg("config_text"), py::arg("seed") = py::none());

  m.def("certify_file", [](const std::string& path, const std::string& report_dir) {
    RunConfig c = load_config(path);
    if (!report_dir.empty()) c.report_dir = report_dir;
    py::gil_scoped_release release;
    return emit_all(run_pipeline(c), c.report_dir);
  }, py::arg("path"), py::arg("report_dir") = "");

  m.def("lift_plot_svg", &lift_plot_svg, py::arg("model"));

  m.def("selftest", [](std::vector<int> only, double tolerance_scale) {
    SelftestOptions opt;
    opt.only = std::move(only);
    opt.tolerance_scale = tolerance_scale;
    std::vector<CriterionResult> results;
    {
      py::gil_scoped_release release;
      results = run_acceptance(opt);
    }
    py::list out;
    for (const auto& r : results) {
      out.append(py::dict("id"_a = r.id, "name"_a = r.name, "pass"_a = r.pass, "detail"_a = r.detail));
    }
    return out;
  }, py::arg("only") = std::vector<int>{}, py::arg("tolerance_scale") = 1.0);
}
