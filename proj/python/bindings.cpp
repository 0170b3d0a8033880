#include "chkp/config.hpp"
#include "chkp/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace chkp;

PYBIND11_MODULE(_chkp, m) {
  m.doc() = "Line solitary waves: profile, spectra and the bifurcating branch";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ParityError>(m, "ParityError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::enum_<Parity>(m, "Parity").value("odd", Parity::odd).value("even", Parity::even);

  py::class_<Grid>(m, "Grid")
      .def_readonly("half_length", &Grid::half_length)
      .def_readonly("n", &Grid::n)
      .def_readonly("h", &Grid::h)
      .def_property_readonly("family", [](const Grid& g) { return std::string(to_string(g.family)); })
      .def("nodes", &Grid::nodes)
      .def("dual_nodes", &Grid::dual_nodes);
  m.def(
      "build_grid", [](double L, int n, const std::string& family) { return build_grid(L, n, parse_family(family)); },
      py::arg("half_length"), py::arg("n"), py::arg("family") = "fd6");

  py::class_<SolitonParams>(m, "SolitonParams")
      .def(py::init([](double c, double kappa) { return SolitonParams{c, kappa}; }), py::arg("c") = 3.0,
           py::arg("kappa") = 1.0)
      .def_readwrite("c", &SolitonParams::c)
      .def_readwrite("kappa", &SolitonParams::kappa)
      .def("crest", &SolitonParams::crest)
      .def("decay_rate", &SolitonParams::decay_rate);

  py::class_<ProfileSamples>(m, "ProfileSamples")
      .def_readonly("x", &ProfileSamples::x)
      .def_readonly("Q", &ProfileSamples::Q)
      .def_readonly("Qx", &ProfileSamples::Qx)
      .def_readonly("Qxx", &ProfileSamples::Qxx);

  py::class_<SolitonProfile>(m, "SolitonProfile")
      .def_readonly("params", &SolitonProfile::params)
      .def_readonly("grid", &SolitonProfile::grid)
      .def_readonly("primary", &SolitonProfile::primary)
      .def_readonly("dual", &SolitonProfile::dual)
      .def_readonly("crest_value", &SolitonProfile::crest_value)
      .def_readonly("alpha", &SolitonProfile::alpha);
  m.def("solve_profile", &solve_profile, py::arg("params"), py::arg("grid"));
  m.def("ode_residual", &ode_residual);
  m.def("first_integral_residual", &first_integral_residual);

  // The scipy conversion reads the raw compressed arrays.
  auto compressed = [](SparseMatrix a) {
    a.makeCompressed();
    return a;
  };
  m.def("assemble_M", [compressed](const SolitonProfile& p, Parity parity) { return compressed(assemble_M(p, parity).matrix); });
  m.def("assemble_L", [compressed](const SolitonProfile& p) { return compressed(assemble_L(p).matrix); });

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("name", &Verdict::name)
      .def_readonly("claim", &Verdict::claim)
      .def_readonly("passed", &Verdict::pass)
      .def_readonly("measured", &Verdict::measured)
      .def_readonly("relation", &Verdict::relation)
      .def_readonly("tolerance", &Verdict::tolerance)
      .def_readonly("upper", &Verdict::upper)
      .def_readonly("detail", &Verdict::detail)
      .def("__repr__", [](const Verdict& v) {
        return "<Verdict " + v.name + (v.pass ? " pass" : " fail") + ">";
      });

  py::class_<SpectrumReport>(m, "SpectrumReport")
      .def_readonly("op", &SpectrumReport::op)
      .def_readonly("eigenvalues", &SpectrumReport::eigenvalues)
      .def_readonly("vectors", &SpectrumReport::vectors)
      .def_readonly("vector_labels", &SpectrumReport::vector_labels)
      .def_property_readonly("counts",
                             [](const SpectrumReport& r) {
                               return py::dict(py::arg("negative") = r.counts.negative,
                                               py::arg("near_zero") = r.counts.near_zero,
                                               py::arg("positive") = r.counts.positive);
                             })
      .def_readonly("zero_tolerance", &SpectrumReport::zero_tolerance)
      .def_readonly("scalars", &SpectrumReport::scalars)
      .def_readonly("verdicts", &SpectrumReport::verdicts)
      .def("passed", &SpectrumReport::passed);
  m.def("eig_M", &eig_M);
  m.def("eig_L_odd", [](const SolitonProfile& p) { return eig_L_odd(assemble_L(p), p.grid); });

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("c", &RunConfig::c)
      .def_readwrite("kappa", &RunConfig::kappa)
      .def_readwrite("L_dom", &RunConfig::L_dom)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("family", &RunConfig::family)
      .def_readwrite("N_y", &RunConfig::N_y)
      .def_readwrite("ds", &RunConfig::ds)
      .def_readwrite("s_max", &RunConfig::s_max)
      .def_readwrite("tol", &RunConfig::tol)
      .def_readwrite("max_iter", &RunConfig::max_iter)
      .def_readwrite("n_range", &RunConfig::n_range)
      .def_readwrite("y_samples", &RunConfig::y_samples)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def("validate", &RunConfig::validate)
      .def("soliton", &RunConfig::soliton)
      .def("grid", py::overload_cast<>(&RunConfig::grid, py::const_))
      .def("to_json", &RunConfig::to_json);
  m.def("merge_json", &merge_json, py::arg("base"), py::arg("text"));

  py::class_<PeriodicSolution>(m, "PeriodicSolution")
      .def_readonly("omega", &PeriodicSolution::omega)
      .def_readonly("s", &PeriodicSolution::s)
      .def_readonly("newton_iters", &PeriodicSolution::newton_iters)
      .def_readonly("final_residual", &PeriodicSolution::final_residual)
      .def_readonly("history", &PeriodicSolution::history)
      .def_property_readonly("modes", [](const PeriodicSolution& p) {
        std::vector<Vector> out;
        for (const GridFunction& f : p.modes) out.push_back(f.values);
        return out;
      });

  py::class_<SolitonRun>(m, "SolitonRun")
      .def_readonly("profile", &SolitonRun::profile)
      .def_readonly("verdicts", &SolitonRun::verdicts);
  py::class_<SpectrumRun>(m, "SpectrumRun")
      .def_readonly("M", &SpectrumRun::M)
      .def_readonly("K", &SpectrumRun::K)
      .def_readonly("L", &SpectrumRun::L)
      .def_readonly("A", &SpectrumRun::A)
      .def_readonly("verdicts", &SpectrumRun::verdicts);
  py::class_<BranchRun>(m, "BranchRun")
      .def_readonly("profile", &BranchRun::profile)
      .def_property_readonly("points", [](const BranchRun& r) { return r.branch.points; })
      .def_property_readonly("omega0", [](const BranchRun& r) { return r.branch.omega0; })
      .def_property_readonly("lambda_", [](const BranchRun& r) { return r.branch.lambda; })
      .def_property_readonly("truncated", [](const BranchRun& r) { return r.branch.truncated; })
      .def_readonly("refined", &BranchRun::refined)
      .def_readonly("jacobian_error", &BranchRun::jacobian_error)
      .def_readonly("verdicts", &BranchRun::verdicts)
      .def("first_converged", &BranchRun::first_converged);

  m.def("run_soliton", [](const RunConfig& c) { return run_soliton(c); });
  m.def("run_spectrum", [](const RunConfig& c, const SolitonProfile& p) { return run_spectrum(c, p); });
  m.def("run_branch", [](const RunConfig& c) { return run_branch(c); });
  m.def("reversibility_checks", &reversibility_checks);
  m.def("write_soliton", &write_soliton);
  m.def("write_branch", &write_branch);
}
