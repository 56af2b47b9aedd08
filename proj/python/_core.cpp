#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pursuit/errors.hpp"
#include "pursuit/exponents.hpp"
#include "pursuit/kernels.hpp"
#include "pursuit/pursuit.hpp"
#include "pursuit/sampling.hpp"
#include "pursuit/special_functions.hpp"
#include "pursuit/theory_checks.hpp"

namespace py = pybind11;
using namespace pursuit;

namespace {

py::array_t<double> to_array(const PathBatch& b) {
  py::array_t<double> out({b.rows, b.grid.points});
  std::copy(b.values.begin(), b.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian leadership Monte Carlo core";

  py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("log_gamma", &log_gamma, py::arg("z"));
  m.def("gaussian_tail", &gaussian_tail, py::arg("x"));
  m.def("mills_ratio", &mills_ratio, py::arg("u"));

  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("fbm", &KernelSpec::fbm, py::arg("hurst"))
      .def_static("lamperti", &KernelSpec::lamperti, py::arg("hurst"))
      .def_static("tabulated", &KernelSpec::tabulated, py::arg("correlations"), py::arg("step"),
                  py::arg("label") = "tabulated")
      .def_property_readonly("hurst", &KernelSpec::hurst)
      .def_property_readonly("stationary", &KernelSpec::stationary)
      .def("correlation", &KernelSpec::correlation, py::arg("lag"))
      .def("covariance", &KernelSpec::covariance, py::arg("s"), py::arg("t"))
      .def("spectral_density", &KernelSpec::spectral_density, py::arg("frequency"))
      .def("tag", &KernelSpec::tag)
      .def("__repr__", [](const KernelSpec& k) { return "KernelSpec(" + k.tag() + ")"; });

  m.def("fbm_cov", &fbm_cov, py::arg("s"), py::arg("t"), py::arg("hurst"));
  m.def("lamperti_corr", &lamperti_corr, py::arg("tau"), py::arg("hurst"));
  m.def("d_closed_form", [](double h) { return d_closed_form(h).d; }, py::arg("hurst"));
  m.def("d_quadrature", [](const KernelSpec& k) { return d_quadrature(k).d; }, py::arg("kernel"));
  m.def("prediction", py::overload_cast<const KernelSpec&>(&prediction), py::arg("kernel"));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<double, double, std::size_t>(), py::arg("start"), py::arg("end"), py::arg("points"))
      .def_readonly("start", &GridSpec::t_start)
      .def_readonly("end", &GridSpec::t_end)
      .def_readonly("points", &GridSpec::points)
      .def("spacing", &GridSpec::spacing);

  m.def("sample_fbm",
        [](double h, const GridSpec& g, std::uint64_t seed, std::size_t batch) { return to_array(sample_fbm(h, g, seed, batch)); },
        py::arg("hurst"), py::arg("grid"), py::arg("seed"), py::arg("batch"));
  m.def("sample_stationary",
        [](const KernelSpec& k, const GridSpec& g, std::uint64_t seed, std::size_t batch) {
          return to_array(sample_stationary(k, g, seed, batch));
        },
        py::arg("kernel"), py::arg("grid"), py::arg("seed"), py::arg("batch"));

  py::enum_<Formulation>(m, "Formulation")
      .value("Stationary0T", Formulation::Stationary0T)
      .value("SelfSimilar0T", Formulation::SelfSimilar0T)
      .value("SelfSimilar1T", Formulation::SelfSimilar1T);
  py::enum_<Monitoring>(m, "Monitoring").value("Grid", Monitoring::Grid).value("BrownianBridge", Monitoring::BrownianBridge);

  py::class_<PursuerGroup>(m, "PursuerGroup")
      .def(py::init([](const KernelSpec& k, std::size_t c) { return PursuerGroup{k, c}; }), py::arg("kernel"),
           py::arg("count") = 1)
      .def_readwrite("kernel", &PursuerGroup::kernel)
      .def_readwrite("count", &PursuerGroup::count);

  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init<>())
      .def_static("homogeneous", &EnsembleConfig::homogeneous, py::arg("kernel"), py::arg("n"), py::arg("horizon"),
                  py::arg("level"), py::arg("formulation"), py::arg("grid_density") = 64.0)
      .def_readwrite("leader", &EnsembleConfig::leader)
      .def_readwrite("pursuers", &EnsembleConfig::pursuers)
      .def_readwrite("horizon", &EnsembleConfig::horizon)
      .def_readwrite("level", &EnsembleConfig::level)
      .def_readwrite("formulation", &EnsembleConfig::formulation)
      .def_readwrite("grid_density", &EnsembleConfig::grid_density)
      .def_readwrite("monitoring", &EnsembleConfig::monitoring)
      .def_property_readonly("n", &EnsembleConfig::n)
      .def("validate", &EnsembleConfig::validate);

  py::class_<MCEstimate>(m, "MCEstimate")
      .def_readonly("p_hat", &MCEstimate::p_hat)
      .def_readonly("samples", &MCEstimate::samples)
      .def_readonly("survivors", &MCEstimate::survivors)
      .def_readonly("std_error", &MCEstimate::std_error)
      .def_readonly("ci_low", &MCEstimate::ci_low)
      .def_readonly("ci_high", &MCEstimate::ci_high)
      .def_readonly("zero_survivors", &MCEstimate::zero_survivors)
      .def_static("from_counts", &MCEstimate::from_counts, py::arg("survivors"), py::arg("samples"));

  m.def("estimate_survival",
        [](const EnsembleConfig& c, std::uint64_t seed, std::uint64_t samples, std::size_t workers) {
          RunOptions o;
          o.workers = workers;
          py::gil_scoped_release release;
          return estimate_survival(c, seed, samples, o);
        },
        py::arg("config"), py::arg("seed"), py::arg("samples"), py::arg("workers") = 0);

  py::class_<RatioEstimate>(m, "RatioEstimate")
      .def_readonly("value", &RatioEstimate::value)
      .def_readonly("ci_low", &RatioEstimate::ci_low)
      .def_readonly("ci_high", &RatioEstimate::ci_high)
      .def_readonly("one_sided", &RatioEstimate::one_sided);
  m.def("leadership_ratio", &leadership_ratio, py::arg("estimate"), py::arg("horizon"), py::arg("n"),
        py::arg("formulation"));

  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("slope", &ExponentFit::slope)
      .def_readonly("slope_se", &ExponentFit::slope_se)
      .def_readonly("intercept", &ExponentFit::intercept)
      .def_property_readonly("gamma", &ExponentFit::gamma)
      .def_property_readonly("gamma_ci", [](const ExponentFit& f) { return std::make_pair(f.gamma_ci_low(), f.gamma_ci_high()); });
  m.def("fit_gamma_n", &fit_gamma_n, py::arg("horizon_estimates"),
        py::arg("prediction") = std::numeric_limits<double>::quiet_NaN());

  m.def("shannon_kernel", &shannon_kernel, py::arg("t"), py::arg("N"));
  m.def("theory_report",
        [](std::uint64_t seed, std::uint64_t lemma5_samples, std::uint64_t path_samples) {
          TheoryReportOptions o{seed, lemma5_samples, path_samples};
          TheoryReport r;
          {
            py::gil_scoped_release release;
            r = theory_report(o);
          }
          py::list out;
          for (const auto& e : r.entries) {
            py::dict d;
            d["name"] = e.name;
            d["passed"] = e.passed;
            d["note"] = e.note;
            py::dict measured;
            for (const auto& [k, v] : e.measured) measured[py::str(k)] = v;
            d["measured"] = measured;
            out.append(d);
          }
          return out;
        },
        py::arg("seed") = 1, py::arg("lemma5_samples") = 200000, py::arg("path_samples") = 20000);
}
