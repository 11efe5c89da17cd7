#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pmnl/cli.hpp"
#include "pmnl/errors.hpp"
#include "pmnl/experiment.hpp"
#include "pmnl/scenario.hpp"

namespace py = pybind11;
using namespace pmnl;

namespace {

ProductFeatures as_features(const Mat& z) {
  ProductFeatures f;
  f.z = z;
  return f;
}

Action as_action(const std::vector<int>& assortment, const std::vector<double>& prices, int n,
                 const PriceBounds& bounds) {
  return make_action(assortment, prices, n, bounds);
}

py::dict run(const std::string& scenario, const std::vector<std::string>& policies, int reps,
             std::uint64_t seed, long horizon) {
  Scenario s = load_scenario(scenario);
  if (horizon > 0) s.horizon = horizon;
  ExperimentOptions options;
  options.policies = policies;
  options.reps = reps;
  options.seed = seed;
  const ExperimentResult result = run_experiment(s, options);
  py::dict out;
  for (const auto& runs : result.runs) {
    Mat regret(static_cast<Eigen::Index>(runs.traces.size()), s.horizon);
    for (std::size_t r = 0; r < runs.traces.size(); ++r) {
      for (long t = 0; t < s.horizon; ++t) regret(static_cast<Eigen::Index>(r), t) = runs.traces[r].cumulative_regret[t];
    }
    out[py::str(runs.policy)] = regret;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_pmnl, m) {
  m.doc() = "Poisson arrivals with MNL choice: model, scenarios and experiments.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  m.def(
      "choice_probabilities",
      [](const std::vector<int>& assortment, const std::vector<double>& prices, const Mat& z, const Vec& v,
         double p_low, double p_high) {
        const Action a = as_action(assortment, prices, static_cast<int>(z.rows()), {p_low, p_high});
        return choice_probabilities(a, as_features(z), v);
      },
      py::arg("assortment"), py::arg("prices"), py::arg("features"), py::arg("v"), py::arg("p_low"),
      py::arg("p_high"), "No-purchase probability first, then the offered products in ascending index order.");

  m.def("shipped_scenarios", &shipped_scenario_names);
  m.def("policy_names", &policy_names);
  m.def(
      "scenario_json", [](const std::string& ref) { return scenario_to_json(load_scenario(ref)); },
      py::arg("scenario"));
  m.def(
      "validate",
      [](const std::string& ref) {
        const ValidationReport r = validate_scenario(load_scenario(ref));
        py::dict out;
        out["warnings"] = r.warnings;
        out["feature_norm_exception"] = r.feature_norm_exception;
        out["x_bar"] = r.x_bar;
        return out;
      },
      py::arg("scenario"));
  m.def("run", &run, py::arg("scenario"), py::arg("policies"), py::arg("reps") = 1, py::arg("seed") = 0,
        py::arg("horizon") = 0, "Cumulative regret per policy as a (reps, T) array.");
  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "pmnl");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit code, stdout, stderr).");
}
