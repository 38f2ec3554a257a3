#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spsb/cli.hpp"
#include "spsb/fluctuations.hpp"
#include "spsb/fock_oracle.hpp"
#include "spsb/meanfield.hpp"
#include "spsb/models.hpp"

namespace py = pybind11;
using namespace spsb;

namespace {

cli::RunConfig make_config(const std::string& model, const std::map<std::string, std::string>& settings) {
  cli::RunConfig cfg;
  if (!model.empty()) cli::apply(cfg, "model", model);
  for (const auto& [k, v] : settings) cli::apply(cfg, k, v);
  cfg.validate();
  return cfg;
}

template <cli::CommandResult (*F)(const cli::RunConfig&)>
cli::CommandResult run(const std::string& model, const std::map<std::string, std::string>& settings) {
  return F(make_config(model, settings));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Polarization symmetry breaking and noncritical squeezing in nondegenerate cavities";

  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<JonesVector>(m, "JonesVector")
      .def(py::init<>())
      .def(py::init([](cplx x, cplx y) { return JonesVector{x, y}; }), py::arg("cx"), py::arg("cy"))
      .def_readwrite("cx", &JonesVector::cx)
      .def_readwrite("cy", &JonesVector::cy)
      .def("norm2", &JonesVector::norm2)
      .def("__repr__", [](const JonesVector& v) {
        return "JonesVector(" + cli::format_complex(v.cx) + ", " + cli::format_complex(v.cy) + ")";
      });

  py::class_<OpoParams>(m, "OpoParams")
      .def(py::init([](double e, double chi, double gp, double gs) { return OpoParams{e, chi, gp, gs}; }),
           py::arg("pump_amplitude") = 1.5, py::arg("chi") = 1.0, py::arg("gamma_p") = 1.0, py::arg("gamma_s") = 1.0)
      .def_readwrite("pump_amplitude", &OpoParams::pump_amplitude)
      .def_readwrite("chi", &OpoParams::chi)
      .def_readwrite("gamma_p", &OpoParams::gamma_p)
      .def_readwrite("gamma_s", &OpoParams::gamma_s)
      .def("validate", &OpoParams::validate);

  py::class_<Chi3Params>(m, "Chi3Params")
      .def(py::init([](double delta, double g, double rho2, double a, double b, double gs) {
             return Chi3Params{delta, g, rho2, a, b, gs};
           }),
           py::arg("delta") = 2.0, py::arg("g") = -1.0, py::arg("rho2") = 0.7, py::arg("A") = 1.0 / 3.0,
           py::arg("B") = 1.0 / 3.0, py::arg("gamma_s") = 1.0)
      .def_readwrite("delta", &Chi3Params::delta)
      .def_readwrite("g", &Chi3Params::g)
      .def_readwrite("rho2", &Chi3Params::rho2)
      .def_readwrite("A", &Chi3Params::A)
      .def_readwrite("B", &Chi3Params::B)
      .def_readwrite("gamma_s", &Chi3Params::gamma_s)
      .def("validate", &Chi3Params::validate);

  py::class_<CavityModel>(m, "CavityModel")
      .def_readonly("damping", &CavityModel::damping)
      .def_readonly("charges", &CavityModel::charges)
      .def_readonly("gamma_s", &CavityModel::gamma_s)
      .def("modes", &CavityModel::modes);

  m.def("opo_model", &opo_model, py::arg("params"));
  m.def("opo_classical_pump_model", &opo_classical_pump_model, py::arg("params"));
  m.def("chi3_model", &chi3_model, py::arg("params"));
  m.def("verify_basis_equivalence", &verify_basis_equivalence, py::arg("params"));

  py::class_<ThresholdInterval>(m, "ThresholdInterval")
      .def_readonly("lower", &ThresholdInterval::lower)
      .def_readonly("upper", &ThresholdInterval::upper)
      .def_readonly("onset", &ThresholdInterval::onset)
      .def_readonly("exists", &ThresholdInterval::exists);
  m.def("threshold_interval", &threshold_interval, py::arg("params"));
  m.def("opo_threshold", &opo_threshold, py::arg("params"));

  py::class_<ClassicalState>(m, "ClassicalState")
      .def_readonly("amplitudes", &ClassicalState::amplitudes)
      .def("photon_number", &ClassicalState::photon_number, py::arg("mode"));

  py::class_<SteadyStates>(m, "SteadyStates")
      .def_readonly("trivial", &SteadyStates::trivial)
      .def_readonly("bright", &SteadyStates::bright)
      .def_readonly("failed_seeds", &SteadyStates::failed_seeds)
      .def("nonzero_exists", &SteadyStates::nonzero_exists);
  m.def("steady_states", [](const CavityModel& model) { return steady_states(model); }, py::arg("model"));
  m.def("rotate", &rotate, py::arg("model"), py::arg("state"), py::arg("theta"));

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("eigenvalues", &StabilityReport::eigenvalues)
      .def_readonly("goldstone_index", &StabilityReport::goldstone_index)
      .def_readonly("stable", &StabilityReport::stable)
      .def_readonly("max_real_excluding_goldstone", &StabilityReport::max_real_excluding_goldstone)
      .def_readonly("goldstone_vector", &StabilityReport::goldstone_vector);
  m.def("stability", &stability, py::arg("model"), py::arg("state"));

  py::class_<DriftDiffusion>(m, "DriftDiffusion")
      .def_readonly("drift", &DriftDiffusion::drift)
      .def_readonly("diffusion", &DriftDiffusion::diffusion)
      .def_readonly("normal_diffusion", &DriftDiffusion::normal_diffusion)
      .def_readonly("damping", &DriftDiffusion::damping)
      .def_property_readonly("has_goldstone", [](const DriftDiffusion& d) { return d.goldstone.has_value(); });
  m.def("linearize", &linearize, py::arg("model"), py::arg("state"));
  m.def("covariance", &covariance_lyapunov, py::arg("linearization"));

  m.def("dark_polarization", &dark_polarization, py::arg("model"), py::arg("state"));
  m.def("mode_weights", &mode_weights, py::arg("model"), py::arg("mode"));

  py::class_<OptimalQuadrature>(m, "OptimalQuadrature")
      .def_readonly("phi", &OptimalQuadrature::phi)
      .def_readonly("v_min", &OptimalQuadrature::v_min)
      .def_readonly("v_conjugate", &OptimalQuadrature::v_conjugate);
  m.def(
      "optimal_quadrature",
      [](const DriftDiffusion& dd, const std::vector<cplx>& w) { return optimal_quadrature(dd, w); },
      py::arg("linearization"), py::arg("weights"));

  py::class_<NoiseSpectrum>(m, "NoiseSpectrum")
      .def_readonly("phi", &NoiseSpectrum::phi)
      .def_readonly("mode", &NoiseSpectrum::mode)
      .def_readonly("samples", &NoiseSpectrum::samples);
  m.def(
      "output_spectrum",
      [](const DriftDiffusion& dd, const CavityModel& model, const JonesVector& mode, double phi,
         const std::vector<double>& omegas) { return output_spectrum(dd, model, mode, phi, omegas); },
      py::arg("linearization"), py::arg("model"), py::arg("mode"), py::arg("phi"), py::arg("omegas"));
  m.def(
      "twin_beam_intensity_spectrum",
      [](const OpoParams& p, const std::vector<double>& omegas) { return twin_beam_intensity_spectrum(p, omegas); },
      py::arg("params"), py::arg("omegas"));

  py::class_<SqueezingRow>(m, "SqueezingRow")
      .def_readonly("params", &SqueezingRow::params)
      .def_readonly("v_min", &SqueezingRow::v_min)
      .def_readonly("phi_opt", &SqueezingRow::phi_opt)
      .def_readonly("v_conjugate", &SqueezingRow::v_conjugate)
      .def_readonly("v_bright", &SqueezingRow::v_bright)
      .def_readonly("on_branch", &SqueezingRow::on_branch)
      .def_readonly("note", &SqueezingRow::note);
  m.def(
      "dark_mode_squeezing",
      [](const std::vector<Chi3Params>& points, int threads) {
        py::gil_scoped_release release;
        return dark_mode_squeezing(points, threads);
      },
      py::arg("points"), py::arg("threads") = 0);

  py::class_<ComparisonRow>(m, "ComparisonRow")
      .def_readonly("point", &ComparisonRow::point)
      .def_readonly("moment", &ComparisonRow::moment)
      .def_readonly("oracle", &ComparisonRow::oracle)
      .def_readonly("linearized", &ComparisonRow::linearized)
      .def_readonly("relative_deviation", &ComparisonRow::relative_deviation);
  py::class_<OracleComparison>(m, "OracleComparison")
      .def_readonly("rows", &OracleComparison::rows)
      .def_readonly("max_relative_deviation", &OracleComparison::max_relative_deviation)
      .def_readonly("cutoff_drift", &OracleComparison::cutoff_drift)
      .def_readonly("symmetric_zero_error", &OracleComparison::symmetric_zero_error);
  m.def(
      "compare_with_linearized",
      [](const CavityModel& model, const std::vector<int>& cutoffs, const std::string& label, bool double_cutoffs) {
        py::gil_scoped_release release;
        return compare_with_linearized(model, cutoffs, label, double_cutoffs);
      },
      py::arg("model"), py::arg("cutoffs"), py::arg("label") = "", py::arg("double_cutoffs") = false);

  py::class_<cli::CommandResult>(m, "CommandResult")
      .def_readonly("name", &cli::CommandResult::name)
      .def_readonly("output", &cli::CommandResult::output)
      .def_readonly("message", &cli::CommandResult::message)
      .def_readonly("exit_code", &cli::CommandResult::exit_code);

  const auto command = [&](const char* name, auto fn, const char* doc) {
    m.def(name, fn, doc, py::arg("model") = "", py::arg("settings") = std::map<std::string, std::string>{},
          py::call_guard<py::gil_scoped_release>());
  };
  command("thresholds", &run<cli::cmd_thresholds>, "Existence interval CSV");
  command("steady", &run<cli::cmd_steady>, "Steady-state sweep CSV");
  command("spectrum", &run<cli::cmd_spectrum>, "Quadrature noise spectrum CSV");
  command("squeeze_sweep", &run<cli::cmd_squeeze_sweep>, "Dark-mode squeezing CSV");
  command("oracle", &run<cli::cmd_oracle>, "Fock oracle comparison CSV");
  command("verify", &run<cli::cmd_verify>, "Invariant suite report");
  m.def(
      "config",
      [](const std::string& model, const std::map<std::string, std::string>& settings) {
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : cli::dump(make_config(model, settings))) out[k] = v;
        return out;
      },
      py::arg("model") = "", py::arg("settings") = std::map<std::string, std::string>{});
}
