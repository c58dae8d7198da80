// Python bindings: scenarios, simulation, the logistic kernel, single
// estimates and full experiments. Results come back as plain dicts and NumPy
// arrays.

#include "tndipw/config.hpp"
#include "tndipw/enumeration.hpp"
#include "tndipw/errors.hpp"
#include "tndipw/glm.hpp"
#include "tndipw/harness.hpp"
#include "tndipw/simulator.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace tndipw;

namespace {

py::dict scenario_dict(const ScenarioSpec& s) {
  py::dict d;
  d["id"] = s.id;
  d["p_c"] = s.p_c;
  d["p_x_given_c"] = py::make_tuple(s.p_x_given_c[0], s.p_x_given_c[1]);
  d["p_u"] = s.p_u;
  d["p_h"] = s.p_h;
  d["infection"] = py::dict(py::arg("intercept") = s.infection.intercept, py::arg("x") = s.infection.x,
                            py::arg("c") = s.infection.c, py::arg("u") = s.infection.u, py::arg("h") = s.infection.h);
  d["other_infection"] =
      py::dict(py::arg("intercept") = s.other_infection.intercept, py::arg("x") = s.other_infection.x,
               py::arg("c") = s.other_infection.c, py::arg("u") = s.other_infection.u);
  d["symptoms"] = py::dict(py::arg("baseline") = s.symptoms.baseline,
                           py::arg("given_infection") = s.symptoms.given_infection,
                           py::arg("given_other") = s.symptoms.given_other);
  d["testing"] = py::dict(py::arg("intercept") = s.testing.intercept, py::arg("w") = s.testing.w,
                          py::arg("x") = s.testing.x, py::arg("c") = s.testing.c, py::arg("wx") = s.testing.wx,
                          py::arg("h") = s.testing.h, py::arg("xh") = s.testing.xh);
  const JointDistribution joint(s);
  const ProspectiveTruth truth = true_prospective_or(s);
  d["true_or"] = truth.odds_ratio;
  d["non_collapsible"] = truth.non_collapsible;
  d["exact_relative_or"] = std::exp(exact_relative_log_or(joint));
  d["testing_prevalence"] = joint.mean(Variable::t);
  d["infection_prevalence"] = joint.mean(Variable::y1);
  return d;
}

struct Overrides {
  std::optional<std::string> config;
  int scenario = 1;
  std::string profile = "desk";
  std::optional<std::size_t> replicates, population, n_tested, n_controls, bootstrap_b, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> methods;
  std::optional<double> q0;
};

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.config ? parse_run_config(*o.config).experiment
                                : profile_config(parse_profile(o.profile), o.scenario);
  if (o.replicates) c.replicates = *o.replicates;
  if (o.population) c.population_size = *o.population;
  if (o.n_tested) c.n_tested = *o.n_tested;
  if (o.n_controls) c.n_controls = *o.n_controls;
  if (o.bootstrap_b) c.bootstrap_b = *o.bootstrap_b;
  if (o.threads) c.threads = *o.threads;
  if (o.seed) c.base_seed = *o.seed;
  if (o.q0) c.q0_override = *o.q0;
  if (o.methods) {
    c.methods.clear();
    for (const auto& m : *o.methods) c.methods.push_back(parse_analysis_method(m));
  }
  c.validate();
  return c;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["log_or"] = e.log_or;
  d["odds_ratio"] = e.odds_ratio();
  d["coefficients"] = e.all_coefficients;
  d["labels"] = e.coefficient_labels;
  if (e.interval) {
    d["ci"] = py::make_tuple(e.interval->lower, e.interval->upper);
  } else {
    d["ci"] = py::none();
  }
  d["interval_method"] = std::string(interval_method_name(e.interval_method));
  d["converged"] = e.converged;
  d["positivity_floored"] = e.ipw.positivity_floored;
  d["bootstrap_failures"] = e.bootstrap_failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-factor study design simulation and estimation";

  static py::exception<Error> base_error(m, "TndipwError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base_error.ptr());
  static py::exception<EstimationError> estimation_error(m, "EstimationError", base_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const InvalidSpecError& e) {
      py::set_error(config_error, e.what());
    } catch (const EstimationError& e) {
      py::set_error(estimation_error, e.what());
    } catch (const Error& e) {
      py::set_error(base_error, e.what());
    }
  });

  m.def(
      "scenario",
      [](int id, std::optional<double> testing_prevalence) {
        return scenario_dict(default_scenario(id, testing_prevalence));
      },
      py::arg("id") = 1, py::arg("testing_prevalence") = py::none(),
      "Calibrated preset with its exact truth values.");

  m.def(
      "simulate",
      [](int scenario, std::size_t n, std::uint64_t seed, std::size_t threads) {
        Population pop;
        {
          py::gil_scoped_release release;
          pop = generate_population(default_scenario(scenario), n, seed, threads);
        }
        py::dict out;
        for (const auto v : {Variable::c, Variable::x, Variable::u, Variable::y1, Variable::y_other, Variable::w,
                             Variable::h, Variable::t}) {
          py::array_t<std::uint8_t> col(static_cast<py::ssize_t>(pop.size()));
          auto view = col.mutable_unchecked<1>();
          for (std::size_t i = 0; i < pop.size(); ++i)
            view(static_cast<py::ssize_t>(i)) = static_cast<std::uint8_t>(pop.records[i].value(v));
          out[py::str(std::string(variable_name(v)))] = col;
        }
        return out;
      },
      py::arg("scenario") = 1, py::arg("n") = 200'000, py::arg("seed") = 1, py::arg("threads") = 1,
      "Population columns c, x, u, y1, y_other, w, h, t as uint8 arrays.");

  m.def(
      "fit_logistic",
      [](const Eigen::MatrixXd& x, const std::vector<double>& y, std::optional<std::vector<double>> weights) {
        std::vector<std::string> labels;
        for (Eigen::Index j = 0; j < x.cols(); ++j) labels.push_back("b" + std::to_string(j));
        const glm::DesignMatrix design(x, labels);
        const std::vector<double> w = weights.value_or(std::vector<double>(y.size(), 1.0));
        const auto fit = glm::fit_weighted_logistic(design, y, w);
        py::dict d;
        d["coefficients"] = Eigen::VectorXd(fit.coefficients);
        d["covariance"] = Eigen::MatrixXd(fit.covariance);
        d["converged"] = fit.converged;
        d["iterations"] = fit.iterations;
        return d;
      },
      py::arg("x"), py::arg("y"), py::arg("weights") = py::none(),
      "Weighted logistic regression; x must include an intercept column if one is wanted.");

  m.def(
      "estimate",
      [](const std::string& method, int scenario, std::uint64_t seed, std::optional<std::size_t> population,
         std::optional<std::size_t> n_tested, std::optional<std::size_t> n_controls, std::size_t bootstrap_b,
         std::optional<double> q0) {
        Overrides o;
        o.scenario = scenario;
        o.seed = seed;
        o.population = population;
        o.n_tested = n_tested;
        o.n_controls = n_controls;
        o.bootstrap_b = bootstrap_b;
        o.q0 = q0;
        o.methods = std::vector<std::string>{method};
        const ExperimentConfig c = build_config(o);
        ReplicateResult r;
        {
          py::gil_scoped_release release;
          r = run_replicate(c, 0);
        }
        const MethodOutcome& outcome = r.outcomes.front();
        if (!outcome.ok()) throw EstimationError(method, outcome.error);
        py::dict d = estimate_dict(*outcome.estimate);
        d["method"] = method;
        d["q0"] = r.q0;
        return d;
      },
      py::arg("method"), py::arg("scenario") = 1, py::arg("seed") = 20201, py::arg("population") = py::none(),
      py::arg("n_tested") = py::none(), py::arg("n_controls") = py::none(), py::arg("bootstrap_b") = 0,
      py::arg("q0") = py::none(), "One sample (replicate 0 of the seed), one method.");

  m.def(
      "run_experiment",
      [](std::optional<std::string> config, int scenario, std::string profile, std::optional<std::size_t> replicates,
         std::optional<std::size_t> population, std::optional<std::size_t> n_tested,
         std::optional<std::size_t> n_controls, std::optional<std::size_t> bootstrap_b,
         std::optional<std::uint64_t> seed, std::optional<std::size_t> threads,
         std::optional<std::vector<std::string>> methods) {
        Overrides o{config, scenario, profile, replicates, population, n_tested, n_controls, bootstrap_b, threads,
                    seed,   methods, std::nullopt};
        const ExperimentConfig c = build_config(o);
        ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(c);
        }
        py::dict d;
        d["table"] = render_table(report);
        d["key_values"] = render_key_values(report);
        std::ostringstream csv;
        write_replicates_csv(csv, report.replicates);
        d["replicates_csv"] = csv.str();
        d["truth"] = py::dict(py::arg("true_or") = report.truth.true_or,
                              py::arg("true_relative_or") = report.truth.true_relative_or,
                              py::arg("exact_relative_or") = report.truth.exact_relative_or,
                              py::arg("target_q0") = report.truth.target_q0,
                              py::arg("realized_q0") = report.mean_realized_q0);
        py::dict methods_out;
        for (const auto& s : report.methods) {
          methods_out[py::str(std::string(analysis_method_name(s.method)))] = py::dict(
              py::arg("n_ok") = s.n_ok, py::arg("failures") = s.failures, py::arg("mean_log_or") = s.mean_log_or,
              py::arg("mean_est") = s.mean_est, py::arg("mc_se") = s.mc_se,
              py::arg("coverage_beta") = s.coverage_beta, py::arg("coverage_beta_star") = s.coverage_beta_star,
              py::arg("interval") = s.interval_method);
        }
        d["methods"] = methods_out;
        return d;
      },
      py::arg("config") = py::none(), py::arg("scenario") = 1, py::arg("profile") = "desk",
      py::arg("replicates") = py::none(), py::arg("population") = py::none(), py::arg("n_tested") = py::none(),
      py::arg("n_controls") = py::none(), py::arg("bootstrap_b") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("methods") = py::none(),
      "Full Monte Carlo experiment. `config` is YAML text in the CLI's config format; keyword arguments override it.");
}
