#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "mhsplit/experiment.hpp"
#include "mhsplit/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

int write_rows(const mhsplit::ExperimentConfig& cfg, const std::vector<mhsplit::ResultRow>& rows,
               const std::string& out) {
  const std::string csv = mhsplit::format_csv(rows, cfg.jump_directions);
  if (out.empty() || out == "-") std::cout << csv;
  else mhsplit::write_file_atomic(out, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metropolis-Hastings with AR(1) proposals: predictions, simulation, checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  auto* predict = app.add_subcommand("predict", "Closed-form predictions for every grid point");
  predict->add_option("--config", config_path, "Experiment config (JSON)")->required();
  predict->add_option("--out", out_path, "CSV output path (stdout when omitted)");

  auto* run = app.add_subcommand("run", "Predictions and Monte Carlo side by side");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "CSV output path (stdout when omitted)");

  std::string suite;
  mhsplit::VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("--suite", suite, "identities, theory_vs_mc or figures")->required();
  verify->add_option("--tolerance-scale", vopt.tolerance_scale, "Scale for statistical tolerances");
  verify->add_option("--out", vopt.out_path, "CSV written by the figures suite");
  verify->add_option("--chain-steps", vopt.chain_steps, "Chain length for theory_vs_mc");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*predict) {
      const auto cfg = mhsplit::load_config(config_path);
      return write_rows(cfg, mhsplit::cmd_predict(cfg), out_path);
    }
    if (*run) {
      const auto cfg = mhsplit::load_config(config_path);
      return write_rows(cfg, mhsplit::cmd_run(cfg), out_path);
    }
    const auto report = mhsplit::cmd_verify(suite, vopt);
    std::cout << report.format();
    return report.passed() ? kExitOk : kExitCheckFailure;
  } catch (const mhsplit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const mhsplit::TheoryUnavailable& e) {
    std::cerr << "theory unavailable: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailure;
  }
}
