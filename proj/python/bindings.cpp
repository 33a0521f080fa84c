#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mhsplit/experiment.hpp"
#include "mhsplit/splitting.hpp"
#include "mhsplit/theory.hpp"
#include "mhsplit/verify.hpp"

namespace py = pybind11;
using namespace mhsplit;

namespace {

ExperimentConfig parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace

PYBIND11_MODULE(_mhsplit, m) {
  m.doc() = "Matrix-splitting Metropolis-Hastings: theory and simulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<NotSpd>(m, "NotSpd", base.ptr());
  py::register_exception<NonConvergent>(m, "NonConvergent", base.ptr());
  py::register_exception<SingularM>(m, "SingularM", base.ptr());
  py::register_exception<NotSymmetrizable>(m, "NotSymmetrizable", base.ptr());
  py::register_exception<NotSymmetric>(m, "NotSymmetric", base.ptr());
  py::register_exception<StepTooLarge>(m, "StepTooLarge", base.ptr());
  py::register_exception<UnstableIntegrator>(m, "UnstableIntegrator", base.ptr());
  py::register_exception<DegenerateWeights>(m, "DegenerateWeights", base.ptr());
  py::register_exception<TheoryUnavailable>(m, "TheoryUnavailable", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("predict_csv", [](const std::string& config) {
    const ExperimentConfig cfg = parse(config);
    return format_csv(cmd_predict(cfg), cfg.jump_directions);
  }, py::arg("config_json"), "Theory columns for every grid point as CSV text.");

  m.def("run_csv", [](const std::string& config) {
    const ExperimentConfig cfg = parse(config);
    std::vector<ResultRow> rows;
    {
      py::gil_scoped_release release;
      rows = cmd_run(cfg);
    }
    return format_csv(rows, cfg.jump_directions);
  }, py::arg("config_json"), "Theory and simulation columns as CSV text.");

  m.def("verify", [](const std::string& suite, double tolerance_scale, long chain_steps) {
    VerifyOptions o;
    o.tolerance_scale = tolerance_scale;
    o.chain_steps = chain_steps;
    const VerifyReport r = cmd_verify(suite, o);
    return py::make_tuple(r.passed(), r.format());
  }, py::arg("suite"), py::arg("tolerance_scale") = 1.0, py::arg("chain_steps") = 40000);

  m.def("ar1_to_splitting", [](const MatrixXd& G, const VectorXd& g, const MatrixXd& Sigma) {
    const MatrixSplitting s = ar1_to_splitting(Ar1Proposal::dense(G, g, Sigma));
    return py::make_tuple(s.M(), s.N(), s.beta());
  }, py::arg("G"), py::arg("g"), py::arg("Sigma"), "Returns (M, N, beta).");

  m.def("splitting_to_ar1", [](const MatrixXd& M, const MatrixXd& N, const VectorXd& beta) {
    const Ar1Proposal p = splitting_to_ar1(MatrixSplitting::dense(M, N, beta));
    return py::make_tuple(p.G(), p.g(), p.Sigma());
  }, py::arg("M"), py::arg("N"), py::arg("beta"), "Returns (G, g, Sigma).");

  m.def("solve_discrete_lyapunov", &solve_discrete_lyapunov, py::arg("G"), py::arg("Sigma"));
  m.def("expected_acceptance", &expected_acceptance, py::arg("mu"), py::arg("sigma"));
  m.def("lstep_efficiency", &lstep_efficiency, py::arg("L"), py::arg("t"));
  m.def("optimal_L", &optimal_L, py::arg("t"), py::arg("max_L") = 64);

  m.def("optimal_tuning", [](const std::string& family) {
    TuningFamily f;
    if (family == "langevin") f = TuningFamily::langevin;
    else if (family == "hmc") f = TuningFamily::hmc;
    else throw InvalidArgument("family must be langevin or hmc");
    const OptimalTuning t = optimal_tuning(f);
    py::dict d;
    d["s0"] = t.s0;
    d["acceptance"] = t.acceptance;
    d["objective"] = t.objective;
    d["reference_s0"] = t.reference_s0;
    d["reference_acceptance"] = t.reference_acceptance;
    d["reference_s0_acceptance"] = t.reference_s0_acceptance;
    return d;
  }, py::arg("family"));
}
