#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mhsplit/model.hpp"
#include "mhsplit/proposals.hpp"
#include "mhsplit/splitting.hpp"

namespace mhsplit {

enum class InitKind { exact_equilibrium, given, importance_resample };
enum class ChainMode { metropolis, unadjusted };
enum class AcceptPath { gaussian_closed_form, general_density, surrogate };

struct ChainConfig {
  long n_steps = 200000;
  /// Defaults to 0 for an exact equilibrium start and 10% of n_steps otherwise.
  std::optional<long> burn_in;
  std::uint64_t seed = 0;
  InitKind init = InitKind::exact_equilibrium;
  /// Start state in target coordinates when init == given.
  VectorXd init_state;
  ChainMode mode = ChainMode::metropolis;
  AcceptPath accept_path = AcceptPath::gaussian_closed_form;
  /// Number of batches for batch-means standard errors.
  int n_batches = 100;
  /// Reference draws used by the importance-resampling start.
  int importance_candidates = 2000;
  /// Keep the per-step log acceptance ratios and decisions.
  bool record_trace = false;
  /// Run in target coordinates even when a spectral form exists.
  bool force_dense = false;
  /// Dense path only: the standard normal noise is multiplied by this matrix.
  std::optional<MatrixXd> noise_transform;

  long effective_burn_in() const;
};

/// Per-chain statistics; per-direction quantities are in the target eigenbasis.
struct ChainDiagnostics {
  long n_steps = 0;
  long burn_in = 0;
  long kept = 0;
  long accepted = 0;
  double acceptance_rate = 0.0;
  double acceptance_stderr = 0.0;
  VectorXd jump_sq;
  VectorXd jump_sq_stderr;
  double mean_jump_sq = 0.0;
  double mean_jump_sq_stderr = 0.0;
  VectorXd lag1_corr;
  double z_mean = 0.0;
  double z_var = 0.0;
  VectorXd sample_mean;
  VectorXd sample_cov_diag;
  double wall_time_s = 0.0;
  long matvec_count = 0;
  bool spectral_path = false;
  std::vector<double> z_trace;
  std::vector<char> accept_trace;
};

/// Z = -y^T (A - calA) y / 2 + x^T (A - calA) x / 2 + (b - beta)^T (y - x).
/// Throws NotSymmetric unless M is symmetric.
double log_accept_gaussian(const MatrixSplitting& splitting, const GaussianTarget& target,
                           const VectorXd& x, const VectorXd& y);

/// phi(x) - phi(y) + Z.
double log_accept_general(const MatrixSplitting& splitting, const ChangeOfMeasureTarget& target,
                          const VectorXd& x, const VectorXd& y);

/// log q(x, y) for y = G x + g + nu, nu ~ N(0, Sigma), up to the normalizing constant.
double log_transition_density(const Ar1Proposal& proposal, const VectorXd& x, const VectorXd& y);

/// log pi(y) + log q(y, x) - log pi(x) - log q(x, y) from explicit densities.
double log_accept_density(const Ar1Proposal& proposal, const ChangeOfMeasureTarget& target,
                          const VectorXd& x, const VectorXd& y);

/// log pi(y) - log pi(x) + log pi*(x) - log pi*(y) with pi* the proposal limit.
double log_accept_surrogate(const ChangeOfMeasureTarget& target, const ProposalLimit& limit,
                            const VectorXd& x, const VectorXd& y);

/// Surrogate ratio of L-step SLA written with products by A only:
/// (h/8)(|Ax|^2 - |Ay|^2) - (h/4) b^T (Ax - Ay) + phi(x) - phi(y).
double log_accept_lstep_sla(const ChangeOfMeasureTarget& target, double h, const VectorXd& x,
                            const VectorXd& y);

ChainDiagnostics run_chain(const GaussianTarget& target, const BuiltProposal& proposal,
                           const ChainConfig& config);
ChainDiagnostics run_chain(const ChangeOfMeasureTarget& target, const BuiltProposal& proposal,
                           const ChainConfig& config);

/// Self-normalized importance-sampling moments of xi_i = lambda_i (q_i^T x - m_i).
struct KappaGamma {
  VectorXd kappa;
  VectorXd gamma;
  VectorXd kappa_stderr;
  VectorXd gamma_stderr;
  double ess = 0.0;
};

/// Reference draws reweighted by exp(-phi). DegenerateWeights if ESS < 0.01 n.
KappaGamma estimate_kappa_gamma(const ChangeOfMeasureTarget& target, long n, Rng& rng);

}  // namespace mhsplit
