#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mhsplit/model.hpp"
#include "mhsplit/proposals.hpp"
#include "mhsplit/sampler.hpp"
#include "mhsplit/serialize.hpp"

namespace mhsplit {

struct TargetSpec {
  int dim = 100;
  double kappa = 0.0;
  double scale = 1.0;
  bool rotate = false;
  std::uint64_t seed = 1;
  ShiftLaw shift = ShiftLaw::zero;
  std::string phi = "zero";
  double phi_amplitude = 0.0;
};

/// Family is one of sla, theta_langevin, lstep, hmc, pcn, cn. Either h or l
/// must be given; l is mapped through the family's scaling law.
struct ProposalSpec {
  std::string family = "sla";
  std::optional<double> h;
  std::optional<double> l;
  double theta = 0.0;
  int L = 1;
  std::optional<double> T;
  /// identity, inverse_precision or dense; dense takes V_matrix.
  std::string V = "identity";
  std::optional<MatrixXd> V_matrix;
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

enum class ExperimentKind { chain, lstep_efficiency };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::chain;
  TargetSpec target;
  ProposalSpec proposal;
  ChainConfig chain;
  /// Cartesian product of the sweeps; parameters l, h, L, theta, T, dim, t.
  std::vector<SweepSpec> sweeps;
  double t_phi_cost = 0.0;
  int jump_directions = 4;
  /// Off by default so that repeated runs produce identical bytes.
  bool timing = false;
  int threads = 0;

  static ExperimentConfig from_json(const json& j);
};

ExperimentConfig load_config(const std::string& path);

struct GridPoint {
  int index = 0;
  TargetSpec target;
  ProposalSpec proposal;
  double t_phi_cost = 0.0;
  std::uint64_t chain_seed = 0;
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

/// Reference Gaussian plus the change of measure when phi is not zero.
struct BuiltTarget {
  GaussianTargetPtr reference;
  std::optional<ChangeOfMeasureTarget> tilted;
};

BuiltTarget build_target(const TargetSpec& spec);
/// Resolves h (directly or through the scaling law) and builds the family.
BuiltProposal build_proposal(const GaussianTarget& target, const ProposalSpec& spec,
                             double kappa, double* h_out = nullptr);

struct ResultRow {
  std::vector<std::string> config;
  double predicted_acceptance;
  double predicted_mean_jump;
  VectorXd predicted_jump;
  double empirical_acceptance;
  double empirical_mean_jump;
  VectorXd empirical_jump;
  double stderr_acceptance;
  double stderr_mean_jump;
  VectorXd stderr_jump;
  double efficiency;
  double wall_time_s = 0.0;
  long matvecs = 0;
};

std::vector<std::string> config_columns();
std::vector<std::string> csv_header(int jump_directions);
std::string format_csv(const std::vector<ResultRow>& rows, int jump_directions);
/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// Theory columns only; no random numbers are drawn.
std::vector<ResultRow> cmd_predict(const ExperimentConfig& config);
/// Theory and simulation side by side.
std::vector<ResultRow> cmd_run(const ExperimentConfig& config);

}  // namespace mhsplit
