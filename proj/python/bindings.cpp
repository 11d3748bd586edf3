// Python module: equilibrium solve, the feedback law, preset and config runs,
// sweeps and the IDE diagnostics. Configs cross the boundary as JSON text or dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chemostat/cli/config.hpp"
#include "chemostat/cli/runner.hpp"
#include "chemostat/control.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/model.hpp"

namespace py = pybind11;
using namespace chemostat;

namespace {

cli::RunConfig to_config(const py::object& source) {
  if (py::isinstance<py::str>(source)) {
    const auto text = source.cast<std::string>();
    // a bare preset name, or JSON text
    if (text.find('{') == std::string::npos) return cli::preset(text);
    return cli::parse_config(text);
  }
  if (py::isinstance<py::dict>(source)) {
    return cli::parse_config(py::module_::import("json").attr("dumps")(source).cast<std::string>());
  }
  throw py::type_error("config must be a preset name, JSON text or a dict");
}

py::dict summary_dict(const cli::RunSummary& s) {
  py::dict d;
  d["name"] = s.name;
  d["d_star"] = s.d_star;
  d["d_star_used"] = s.d_used;
  d["reference"] = s.reference;
  d["final_t"] = s.final_t;
  d["final_D"] = s.final_d;
  d["final_f_boundary"] = s.final_boundary;
  d["final_y"] = s.final_y;
  d["final_w"] = s.final_w;
  d["max_abs_log_ratio"] = s.max_w;
  d["decay_rate"] = s.decay_rate ? py::cast(*s.decay_rate) : py::none();
  return d;
}

py::dict series_dict(const TimeSeries& ts) {
  py::dict d;
  std::vector<long> steps;
  for (const auto& r : ts.rows) steps.push_back(r.step);
  d["step"] = steps;
  d["t"] = ts.times();
  d["D"] = ts.column(&StepRecord::d);
  d["f_boundary"] = ts.column(&StepRecord::f_boundary);
  d["y"] = ts.column(&StepRecord::y);
  d["w"] = ts.column(&StepRecord::w);
  d["ratio_min"] = ts.column(&StepRecord::ratio_min);
  d["ratio_max"] = ts.column(&StepRecord::ratio_max);
  return d;
}

}  // namespace

PYBIND11_MODULE(chemostat, m) {
  m.doc() = "Age-structured chemostat simulator with sampled dilution feedback";

  // translators are tried newest first, so the base class goes first
  py::register_exception<Error>(m, "ChemostatError", PyExc_RuntimeError);
  py::register_exception<cli::ConfigParseError>(m, "ConfigParseError", PyExc_ValueError);
  py::register_exception<cli::ConfigValidationError>(m, "ConfigValidationError", PyExc_ValueError);

  m.def("triangular_birth_scale", &triangular_birth_scale, py::arg("mortality"), py::arg("d_star"),
        py::arg("horizon") = 2.0, "Scale g of the tent k(a) = g min(a, A - a) that puts the root at d_star.");

  m.def(
      "solve_equilibrium",
      [](const py::object& config) {
        const cli::ResolvedRun r = cli::resolve(to_config(config));
        py::dict d;
        d["d_star"] = r.equilibrium.d_star;
        d["y_star"] = r.equilibrium.y_star;
        std::vector<double> ages;
        for (int j = 0; j < r.grid.nodes(); ++j) ages.push_back(r.grid.age(j));
        d["ages"] = ages;
        d["f_star"] = r.equilibrium.f_star.values;
        return d;
      },
      py::arg("config") = "sim1", "Equilibrium dilution rate, output and profile for a config.");

  m.def(
      "sample_control",
      [](double measurement, const std::string& variant, double d_star_used, double reference, double period,
         double d_min, double d_max) {
        ControllerSpec s;
        s.variant = parse_variant(variant);
        s.d_star_used = d_star_used;
        s.reference = reference;
        s.period = period;
        s.d_min = d_min;
        s.d_max = d_max;
        s.validate();
        return sample_control(measurement, s);
      },
      py::arg("measurement"), py::arg("variant") = "output_feedback", py::arg("d_star_used") = 1.0,
      py::arg("reference") = 1.0, py::arg("period") = 0.4, py::arg("d_min") = 0.5, py::arg("d_max") = 1.5);

  m.def("preset_names", &cli::preset_names);
  m.def(
      "preset_config", [](const std::string& name) { return cli::serialize_config(cli::preset(name)); },
      py::arg("name"), "JSON text of a named preset.");

  m.def(
      "run",
      [](const py::object& config, int stride) {
        cli::RunConfig c = to_config(config);
        if (stride < 1) throw py::value_error("stride must be positive");
        c.output.stride = stride;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::run(c);
        }
        py::dict out;
        out["summary"] = summary_dict(r.summary);
        out["series"] = series_dict(r.series);
        return out;
      },
      py::arg("config") = "sim1", py::arg("stride") = 1,
      "Run a simulation; returns {'summary': {...}, 'series': {column: [...]}}.");

  m.def(
      "sweep",
      [](const py::object& config, const std::vector<std::string>& axes, int jobs) {
        const cli::RunConfig base = to_config(config);
        std::vector<cli::SweepAxis> parsed;
        for (const auto& a : axes) parsed.push_back(cli::parse_axis(a));
        std::vector<cli::SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = cli::sweep(base, parsed, jobs);
        }
        py::list out;
        for (const auto& row : rows) {
          py::dict d;
          for (std::size_t i = 0; i < parsed.size(); ++i) d[py::str(parsed[i].name)] = row.point[i];
          d["summary"] = row.summary ? py::object(summary_dict(*row.summary)) : py::none();
          d["error"] = row.error;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("axes"), py::arg("jobs") = 1, "Cartesian sweep over axes such as 'T=0.4,0.8'.");

  m.def(
      "ide_check",
      [](const py::object& config) {
        const cli::IdeReport rep = cli::ide_check(to_config(config));
        return py::make_tuple(rep.passed, py::module_::import("json").attr("loads")(rep.json));
      },
      py::arg("config") = "sim1", "IDE cross-validation and decay diagnostics; returns (passed, report).");

  m.def(
      "compare_csv",
      [](const std::string& path, const std::string& golden, double tol_rel, double tol_abs) {
        const cli::CompareResult r = cli::compare_csv(path, golden, tol_rel, tol_abs);
        return py::make_tuple(r.pass, r.message);
      },
      py::arg("path"), py::arg("golden"), py::arg("tol_rel") = 1e-9, py::arg("tol_abs") = 1e-12);
}
