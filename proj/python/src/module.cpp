#include "vagflow/config.hpp"
#include "vagflow/errors.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace vagflow;

namespace {

py::dict quality_dict(const QualityReport& q) {
  py::dict d;
  d["h"] = q.h;
  d["theta"] = q.theta;
  d["ell"] = q.ell;
  d["zeta"] = q.zeta;
  d["cond_min"] = q.cond_min;
  d["cond_max"] = q.cond_max;
  return d;
}

py::dict row_dict(const BenchRow& r) {
  py::dict d;
  d["h"] = r.h;
  d["n_vertices"] = r.n_vertices;
  d["dt_init"] = r.dt_init;
  d["dt_max"] = r.dt_max;
  d["err_l1"] = r.errors.l1;
  d["err_l2"] = r.errors.l2;
  d["err_linf"] = r.errors.linf;
  d["u_min"] = r.u_min;
  d["newton_total"] = r.newton_total;
  return d;
}

py::dict outcome_dict(const RunOutcome& out) {
  py::dict d = row_dict(out.summary);
  py::list steps;
  for (const StepRecord& s : out.result.report.steps) {
    py::dict row;
    row["t"] = s.t;
    row["dt"] = s.dt;
    row["newton_iters"] = s.newton_iters;
    row["energy"] = s.energy;
    row["dissipation"] = s.dissipation;
    row["mass"] = s.mass;
    row["u_min"] = s.u_min;
    steps.append(row);
  }
  d["steps"] = steps;
  d["entropy"] = out.entropy;
  d["failures"] = out.result.report.failures;
  return d;
}

RunOutcome run_text(const std::string& text) {
  RunSetup setup = build_run(parse_config(text));
  py::gil_scoped_release release;
  return execute_run(setup, false);
}

} // namespace

PYBIND11_MODULE(_vagflow, m) {
  m.doc() = "Vertex approximate gradient solver for degenerate nonlinear parabolic equations";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("n_cells", &Mesh::n_cells)
      .def_property_readonly("n_vertices", &Mesh::n_vertices)
      .def_property_readonly("n_boundary_vertices", &Mesh::n_boundary_vertices)
      .def_property_readonly("area", &Mesh::area)
      .def_property_readonly("vertices",
                             [](const Mesh& mesh) {
                               std::vector<std::pair<double, double>> out;
                               for (const Point& p : mesh.vertices()) out.emplace_back(p.x, p.y);
                               return out;
                             })
      .def_property_readonly("cells",
                             [](const Mesh& mesh) {
                               std::vector<std::vector<std::size_t>> out;
                               for (const Cell& c : mesh.cells()) out.push_back(c.vertices);
                               return out;
                             })
      .def("serialize", &serialize_mesh)
      .def("quality",
           [](const Mesh& mesh, double lumping) {
             return quality_dict(Discretization(mesh, TensorField(Tensor2{}), LumpingRule::uniform(lumping)).quality());
           },
           py::arg("lumping") = 0.1);

  m.def("parse_mesh", [](const std::string& text) { return parse_mesh(text); }, py::arg("text"));
  m.def("read_mesh", &read_mesh_file, py::arg("path"));
  m.def(
      "generate_mesh",
      [](const std::string& kind, std::size_t n, double distortion) {
        return generate_structured(mesh_kind_from_string(kind), n, distortion);
      },
      py::arg("kind"), py::arg("n"), py::arg("distortion") = 0.0);

  m.def(
      "model_functions",
      [](const std::string& name, double u) {
        const Model model = make_model(name);
        py::dict d;
        d["eta"] = model.eta(u);
        d["pressure"] = model.pressure(u);
        d["entropy"] = model.entropy(u);
        d["xi"] = model.xi(u);
        return d;
      },
      py::arg("model"), py::arg("u"));

  m.def(
      "analytical_solution",
      [](const std::string& test, double x, double y, double t, double lx, double ly, double g) {
        return analytical_solution(analytical_test_from_string(test), {x, y}, t, AnalyticalParams{lx, ly, g});
      },
      py::arg("test"), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("lx") = 1.0, py::arg("ly") = 1.0,
      py::arg("g") = 0.0);

  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"));
  m.def(
      "bench_config", [](const std::string& test, int level, std::size_t base_n) {
        return serialize_config(bench_config(test, level, base_n));
      },
      py::arg("test"), py::arg("level") = 0, py::arg("base_n") = 5);
  m.def("bench_tests", [] { return bench_tests; });

  m.def(
      "run", [](const std::string& text) { return outcome_dict(run_text(text)); }, py::arg("config"),
      "Runs a configuration given as text and returns the summary, per-step records and entropy series.");
  m.def(
      "bench",
      [](const std::string& test, int levels, std::size_t base_n) {
        BenchOutcome out;
        {
          py::gil_scoped_release release;
          out = run_bench(test, levels, "", base_n);
        }
        py::list rows;
        for (const BenchRow& r : out.rows) rows.append(row_dict(r));
        return rows;
      },
      py::arg("test"), py::arg("levels") = 2, py::arg("base_n") = 5);

  m.def("convergence_rates", &convergence_rates, py::arg("errors"), py::arg("h"));
  m.def(
      "entropy_decay_fit",
      [](const std::vector<std::pair<double, double>>& series, double t_lo, double t_hi) {
        const DecayFit f = entropy_decay_fit(series, t_lo, t_hi);
        py::dict d;
        d["slope"] = f.slope;
        d["intercept"] = f.intercept;
        d["r_squared"] = f.r_squared;
        return d;
      },
      py::arg("series"), py::arg("t_lo"), py::arg("t_hi"));
}
