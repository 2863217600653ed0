#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpjet/errors.hpp"
#include "gpjet/experiments.hpp"
#include "gpjet/gp.hpp"
#include "gpjet/metrology.hpp"
#include "gpjet/multi_fidelity.hpp"
#include "gpjet/physics_jet.hpp"
#include "gpjet/planner.hpp"
#include "gpjet/serialize.hpp"
#include "gpjet/sewing_machine.hpp"
#include "gpjet/virtual_machine.hpp"

namespace py = pybind11;
using namespace gpjet;

namespace {

py::object json_to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_gpjet, m) {
  m.doc() = "Gaussian-process experiment planning on a virtual melt-electrowriting machine";

  static py::exception<Error> error(m, "GpjetError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  // ---- physics_jet
  py::class_<jet::DimensionlessGroups>(m, "DimensionlessGroups")
      .def(py::init<>())
      .def_readwrite("Re", &jet::DimensionlessGroups::Re)
      .def_readwrite("Ca", &jet::DimensionlessGroups::Ca)
      .def_readwrite("Pe", &jet::DimensionlessGroups::Pe)
      .def_readwrite("Pe_c", &jet::DimensionlessGroups::Pe_c)
      .def_readwrite("De", &jet::DimensionlessGroups::De)
      .def_readwrite("Fe", &jet::DimensionlessGroups::Fe)
      .def_readwrite("Bi_L", &jet::DimensionlessGroups::Bi_L)
      .def_readwrite("Na", &jet::DimensionlessGroups::Na)
      .def_readwrite("Gamma", &jet::DimensionlessGroups::Gamma)
      .def_readwrite("Bo", &jet::DimensionlessGroups::Bo)
      .def_readwrite("beta", &jet::DimensionlessGroups::beta)
      .def_readwrite("beta_E", &jet::DimensionlessGroups::beta_E)
      .def_readwrite("alpha", &jet::DimensionlessGroups::alpha)
      .def_readwrite("chi", &jet::DimensionlessGroups::chi)
      .def_readwrite("A_f", &jet::DimensionlessGroups::A_f)
      .def_readwrite("theta_inf", &jet::DimensionlessGroups::theta_inf)
      .def("valid", &jet::DimensionlessGroups::valid)
      .def("to_dict", [](const jet::DimensionlessGroups& g) { return json_to_py(io::to_json(g)); });

  m.def("default_pcl_groups", &jet::default_pcl_groups,
        py::arg("rheology_temperature_change") = jet::kDefaultRheologyTemperatureChange);
  m.def("initial_radius_slope", &jet::initial_radius_slope, py::arg("groups"));
  m.def(
      "solve_jet_profile",
      [](const jet::DimensionlessGroups& g, std::size_t n) {
        const jet::JetSolution s = jet::solve_jet_profile(g, n);
        return py::make_tuple(s.profile.z_grid, s.profile.radii);
      },
      py::arg("groups"), py::arg("n_points") = 93, "Returns (z_grid, radii).");

  // ---- sewing_machine
  m.def("classify_pattern", [](double r) { return std::string(sewing::to_string(sewing::classify_pattern(r))); },
        py::arg("ratio"));
  m.def("lag_lowfidelity", [](double r, double rc) { return sewing::lag_lowfidelity(r, rc); }, py::arg("ratio"),
        py::arg("coil_radius") = 1.0);

  // ---- gp_core
  py::class_<gp::KernelHyper>(m, "KernelHyper")
      .def(py::init<double, double, double>(), py::arg("lengthscale") = 0.2, py::arg("signal_variance") = 1.0,
           py::arg("noise_variance") = 1e-4)
      .def_readwrite("lengthscale", &gp::KernelHyper::lengthscale)
      .def_readwrite("signal_variance", &gp::KernelHyper::signal_variance)
      .def_readwrite("noise_variance", &gp::KernelHyper::noise_variance);

  m.def("rbf", &gp::rbf, py::arg("x"), py::arg("x_prime"), py::arg("hyper"));

  py::class_<gp::GPModel>(m, "GPModel")
      .def(
          "predict",
          [](const gp::GPModel& g, double x) {
            const auto p = g.predict(x);
            return py::make_tuple(p.mean, p.variance);
          },
          py::arg("x"), "Returns (mean, variance).")
      .def_property_readonly("raw_hyper", &gp::GPModel::raw_hyper)
      .def_property_readonly("log_marginal_likelihood", &gp::GPModel::log_marginal_likelihood)
      .def_property_readonly("degenerate", &gp::GPModel::degenerate)
      .def("summary", [](const gp::GPModel& g) { return json_to_py(io::gp_summary(g)); });

  m.def(
      "fit_gp",
      [](const std::vector<double>& x, const std::vector<double>& y, int restarts, std::uint64_t seed) {
        gp::FitOptions o;
        o.restarts = restarts;
        o.seed = seed;
        return gp::fit(x, y, o);
      },
      py::arg("x"), py::arg("y"), py::arg("restarts") = 8, py::arg("seed") = 0);

  // ---- multi_fidelity
  py::class_<mf::MFModel>(m, "MFModel")
      .def_readonly("rho", &mf::MFModel::rho)
      .def(
          "predict",
          [](const mf::MFModel& model, double x) {
            const auto p = mf::predict_mf(model, x);
            return py::make_tuple(p.mean, p.variance);
          },
          py::arg("x"))
      .def("summary", [](const mf::MFModel& model) { return json_to_py(io::mf_summary(model)); });

  m.def(
      "fit_mf",
      [](const std::vector<double>& xl, const std::vector<double>& yl, const std::vector<double>& xh,
         const std::vector<double>& yh, std::uint64_t seed) {
        mf::MFOptions o;
        o.fit.seed = seed;
        return mf::fit_mf(xl, yl, xh, yh, o);
      },
      py::arg("x_low"), py::arg("y_low"), py::arg("x_high"), py::arg("y_high"), py::arg("seed") = 0);

  // ---- planner
  m.def(
      "acquire",
      [](const std::string& kind, double mu, double sigma, double f_best, double xi, double kappa) {
        return planner::acquire({planner::acquisition_from_string(kind), xi, kappa}, mu, sigma, f_best);
      },
      py::arg("kind"), py::arg("mu"), py::arg("sigma"), py::arg("f_best"), py::arg("xi") = 0.0,
      py::arg("kappa") = 2.0);

  // ---- virtual_machine
  m.def("list_settings_csv", [] { return vm::settings_csv(vm::list_settings()); });

  py::class_<vm::VirtualMachine>(m, "VirtualMachine")
      .def(py::init([] { return vm::VirtualMachine(); }))
      .def("radius_truth", &vm::VirtualMachine::radius_truth, py::arg("z"))
      .def("radius_physics", &vm::VirtualMachine::radius_physics, py::arg("z"))
      .def(
          "observe_radius",
          [](const vm::VirtualMachine& v, const std::vector<double>& z, std::uint64_t seed) {
            return v.observe_radius(z, seed);
          },
          py::arg("z"), py::arg("seed"))
      .def("lag_truth", &vm::VirtualMachine::lag_truth, py::arg("ratio"))
      .def("observe_lag", &vm::VirtualMachine::observe_lag, py::arg("ratio"), py::arg("seed"))
      .def_property_readonly("chi", &vm::VirtualMachine::chi);

  // ---- metrology
  m.def(
      "render_and_scan",
      [](const std::vector<double>& z, const std::vector<double>& radii, double lag_mm, int stride) {
        jet::RadiusProfile p{z, radii};
        const metrology::Frame f = metrology::render_synthetic_frame(p, lag_mm, metrology::Geometry{});
        const metrology::JetFeatures feat = metrology::edge_scan(f, stride);
        std::vector<double> diam;
        for (const auto& r : feat.rows) diam.push_back(r.diameter_mm);
        return py::make_tuple(diam, metrology::lag_from_frame(f, feat));
      },
      py::arg("z"), py::arg("radii"), py::arg("lag_mm"), py::arg("stride") = 8,
      "Renders a default-geometry frame and returns (row diameters mm, lag mm).");

  // ---- cli_runner
  m.def("experiment_names", &exp::experiment_names);
  m.def(
      "run_experiment",
      [](const std::string& name, std::uint64_t seed, const std::string& config_json) {
        const io::Json cfg = config_json.empty() ? io::Json::object() : io::Json::parse(config_json);
        const exp::Settings s = exp::settings_from_json(cfg);
        exp::Artifacts a;
        {
          py::gil_scoped_release release;
          a = exp::run_experiment(name, s, seed, false);
        }
        return json_to_py(a.result);
      },
      py::arg("name"), py::arg("seed") = 0, py::arg("config_json") = "",
      "Runs one experiment recipe and returns its result as a dict.");
}
