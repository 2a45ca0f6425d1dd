#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "krcd/confounder_test.hpp"
#include "krcd/datagen.hpp"
#include "krcd/error.hpp"
#include "krcd/estimator.hpp"
#include "krcd/evalharness.hpp"
#include "krcd/io.hpp"
#include "krcd/kernel.hpp"
#include "krcd/oracle.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

krcd::KernelSpec make_kernel(const std::string& name, int degree, double offset,
                             std::optional<double> bandwidth) {
  switch (krcd::kernel_family_from_string(name)) {
    case krcd::KernelFamily::linear:
      return krcd::KernelSpec::linear();
    case krcd::KernelFamily::polynomial:
      return krcd::KernelSpec::polynomial(degree, offset);
    case krcd::KernelFamily::gaussian:
      return krcd::KernelSpec::gaussian(bandwidth);
  }
  throw krcd::ArgumentError("unknown kernel: " + name);
}

krcd::ObservedData observed(const krcd::Matrix& x, const krcd::Vector& t, const krcd::Vector& y) {
  krcd::ObservedData data;
  data.x = x;
  data.t = t;
  data.y = y;
  return data;
}

py::dict dataset_dict(const krcd::GeneratedDataset& d) {
  py::dict out("x"_a = d.x, "u"_a = d.u, "t"_a = d.t, "y"_a = d.y, "truth"_a = d.truth);
  if (!d.env_labels.empty()) out["env"] = d.env_labels;
  if (d.t_latent.size() > 0) {
    out["t_latent"] = d.t_latent;
    out["y_latent"] = d.y_latent;
  }
  return out;
}

krcd::DesignMatrix design(const krcd::Matrix& z) { return krcd::DesignMatrix(krcd::RowMatrix(z)); }

}  // namespace

PYBIND11_MODULE(_krcd, m) {
  m.doc() = "Kernel-regression detection of hidden confounding";
  m.attr("__version__") = KRCD_VERSION;

  auto base = py::register_exception<krcd::Error>(m, "KrcdError", PyExc_RuntimeError);
  py::register_exception<krcd::ConfigurationError>(m, "ConfigurationError", base.ptr());
  py::register_exception<krcd::ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<krcd::InputError>(m, "InputError", base.ptr());
  py::register_exception<krcd::NumericError>(m, "NumericError", base.ptr());

  py::class_<krcd::KernelSpec>(m, "KernelSpec")
      .def(py::init(&make_kernel), "family"_a = "poly", "degree"_a = 2, "offset"_a = 1.0,
           "bandwidth"_a = std::nullopt)
      .def_property_readonly("family", [](const krcd::KernelSpec& k) { return to_string(k.family); })
      .def_readonly("degree", &krcd::KernelSpec::degree)
      .def_readonly("offset", &krcd::KernelSpec::offset)
      .def_readonly("bandwidth", &krcd::KernelSpec::bandwidth)
      .def("__repr__", &krcd::KernelSpec::describe);

  py::class_<krcd::TestResult>(m, "TestResult")
      .def_property_readonly("verdict", [](const krcd::TestResult& r) { return to_string(r.verdict); })
      .def_readonly("z_scores", &krcd::TestResult::z_scores)
      .def_readonly("p_values", &krcd::TestResult::p_values)
      .def_readonly("rejected", &krcd::TestResult::rejected_coords)
      .def_readonly("degenerate", &krcd::TestResult::degenerate_coords)
      .def_readonly("sigma_sq", &krcd::TestResult::sigma_sq)
      .def_readonly("alpha_level", &krcd::TestResult::alpha_level)
      .def_readonly("basis_size", &krcd::TestResult::basis_size)
      .def_readonly("samples", &krcd::TestResult::samples)
      .def_readonly("effective_lambda", &krcd::TestResult::effective_lambda)
      .def_readonly("kernel", &krcd::TestResult::kernel)
      .def_readonly("warnings", &krcd::TestResult::warnings)
      .def_readonly("wall_time_ms", &krcd::TestResult::wall_time_ms)
      .def_property_readonly("delta", [](const krcd::TestResult& r) { return r.coefficients.delta; })
      .def_property_readonly("alpha_kls", [](const krcd::TestResult& r) { return r.coefficients.alpha_kls; })
      .def_property_readonly("alpha_hkls", [](const krcd::TestResult& r) { return r.coefficients.alpha_hkls; })
      .def("score", &krcd::TestResult::score)
      .def("to_json", [](const krcd::TestResult& r) { return krcd::to_json(r).dump(); });

  m.def(
      "detect",
      [](const krcd::Matrix& x, const krcd::Vector& t, const krcd::Vector& y,
         std::optional<krcd::KernelSpec> kernel, std::optional<long> basis_size, double lam,
         double alpha, std::uint64_t seed, bool random_basis) {
        krcd::RidgeConfig config;
        if (kernel) config.kernel = *kernel;
        config.basis_size = basis_size ? *basis_size : std::min<long>(40, static_cast<long>(y.size()) - 1);
        config.lambda = lam;
        config.seed = seed;
        if (random_basis) config.selection = krcd::BasisSelection::seeded_random;
        py::gil_scoped_release release;
        return krcd::detect(observed(x, t, y), config, alpha);
      },
      "x"_a, "t"_a, "y"_a, "kernel"_a = std::nullopt, "basis_size"_a = std::nullopt, "lam"_a = 1e-8,
      "alpha"_a = 0.05, "seed"_a = 0, "random_basis"_a = false,
      "Runs the confounding test on observed covariates x, treatment t and outcome y.");

  m.def(
      "generate",
      [](const std::string& scenario, double rho, long n, long dx, long du, long envs,
         std::uint64_t seed) {
        krcd::ScenarioConfig config;
        config.scenario = krcd::scenario_from_string(scenario);
        config.rho = rho;
        config.samples = n;
        config.dx = dx;
        config.du = du;
        config.n_envs = envs;
        config.seed = seed;
        return dataset_dict(krcd::generate(config));
      },
      "scenario"_a = "single_env", "rho"_a = 0.0, "n"_a = 1000, "dx"_a = 3, "du"_a = 3, "envs"_a = 2,
      "seed"_a = 0);

  m.def(
      "kernel_eval",
      [](const krcd::KernelSpec& spec, const krcd::Vector& a, const krcd::Vector& b) {
        return krcd::kernel_eval(spec, {a.data(), static_cast<std::size_t>(a.size())},
                                 {b.data(), static_cast<std::size_t>(b.size())});
      },
      "kernel"_a, "z1"_a, "z2"_a);

  m.def(
      "gram",
      [](const krcd::KernelSpec& spec, const krcd::Matrix& z, std::uint64_t seed) {
        const krcd::DesignMatrix d = design(z);
        return krcd::full_kernel(krcd::resolve_kernel(spec, d, seed), d);
      },
      "kernel"_a, "z"_a, "seed"_a = 0, "Full N x N Gram matrix of the rows of z.");

  m.def(
      "fit",
      [](const krcd::KernelSpec& spec, const krcd::Matrix& z, const krcd::Vector& y, long basis_size,
         double lam) {
        const krcd::DesignMatrix d = design(z);
        const krcd::KernelSpec resolved = krcd::resolve_kernel(spec, d);
        const krcd::BasisKernel k = krcd::basis_kernel(resolved, d, basis_size);
        const krcd::WeightedBasisKernel k_psi = krcd::weighted_basis(k, d);
        return py::make_tuple(krcd::fit_kls(k, y, lam), krcd::fit_hkls(k, k_psi, y, lam));
      },
      "kernel"_a, "z"_a, "y"_a, "basis_size"_a, "lam"_a,
      "Closed-form (alpha_kls, alpha_hkls) on the first basis_size rows of z.");

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        const krcd::RocCurve curve = krcd::roc_auc(scores, labels);
        py::list points;
        for (const auto& p : curve.points) points.append(py::make_tuple(p.fpr, p.tpr));
        return py::make_tuple(curve.auc, points);
      },
      "scores"_a, "labels"_a);

  m.def(
      "oracle_agreement",
      [](int instances, std::uint64_t seed) {
        return krcd::to_json(krcd::oracle_agreement_suite(instances, seed)).dump();
      },
      "instances"_a = 20, "seed"_a = 0, "Oracle agreement report as a JSON string.");

  m.def(
      "null_calibration",
      [](int repeats, long n, std::uint64_t seed) {
        krcd::ScenarioConfig scenario;
        scenario.samples = n;
        scenario.seed = seed;
        krcd::RidgeConfig config;
        config.basis_size = std::min<long>(40, n - 1);
        py::gil_scoped_release release;
        return krcd::to_json(krcd::monte_carlo_null_calibration(config, scenario, repeats)).dump();
      },
      "repeats"_a = 100, "n"_a = 1000, "seed"_a = 0, "Null calibration report as a JSON string.");
}
