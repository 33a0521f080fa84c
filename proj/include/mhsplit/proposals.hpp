#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhsplit/model.hpp"
#include "mhsplit/splitting.hpp"

namespace mhsplit {

enum class PreconditionerKind { identity, inverse_precision, polynomial, dense };

/// Preconditioner V. Every kind except `dense` is a function of A, so its
/// eigenvalues follow from those of A and the theory path stays available.
struct Preconditioner {
  PreconditionerKind kind = PreconditionerKind::identity;
  /// p(A) = sum_k coefficients[k] A^k for the polynomial kind.
  std::vector<double> coefficients;
  MatrixXd matrix;

  static Preconditioner identity() { return {}; }
  static Preconditioner inverse_precision() {
    return {PreconditionerKind::inverse_precision, {}, {}};
  }
  static Preconditioner polynomial(std::vector<double> c) {
    return {PreconditionerKind::polynomial, std::move(c), {}};
  }
  static Preconditioner dense(MatrixXd v) {
    return {PreconditionerKind::dense, {}, std::move(v)};
  }

  bool is_function_of_a() const { return kind != PreconditionerKind::dense; }
  /// Eigenvalues of V for the given eigenvalues of A (function-of-A kinds).
  VectorXd mode_values(const VectorXd& a_eigenvalues) const;
  /// Dense V for a target (composed in its eigenbasis unless kind is dense).
  MatrixXd dense_matrix(const GaussianTarget& target) const;
};

Preconditioner parse_preconditioner(const std::string& name);
std::string preconditioner_name(const Preconditioner& v);

struct ThetaLangevinSpec {
  double theta = 0.0;
  double h = 0.0;
  Preconditioner V;
};

struct HmcSpec {
  double h = 0.0;
  int L = 1;
  Preconditioner V;
  /// When set, L = floor(T / h).
  std::optional<double> T;

  int steps() const;
};

enum class ScalingKind { langevin, hmc };

/// h = l^2 d^(-1/3 - 2 kappa) (Langevin) or h = l d^(-1/4 - kappa) (HMC).
struct ScalingLaw {
  ScalingKind kind = ScalingKind::langevin;
  double l = 1.0;
  double kappa = 0.0;

  double step(int d) const;
};

/// A proposal paired with its splitting and bookkeeping.
struct BuiltProposal {
  std::string family;
  Ar1Proposal proposal;
  MatrixSplitting splitting;
  /// False when some proposal matrix is not a function of A.
  bool theory_available = true;
  std::vector<std::string> flags;
  /// Products with A needed per proposal.
  int matvecs_per_step = 1;

  bool has_flag(const std::string& f) const;
};

/// y = (I - h/2 A) x + h/2 b + sqrt(h) xi. StepTooLarge when h >= 4 / lambda_max^2.
BuiltProposal sla_proposal(const GaussianTarget& target, double h);

/// y = (I + theta h/2 VA)^{-1} ((I - (1-theta) h/2 VA) x + h/2 V b + sqrt(h) V^{1/2} xi).
BuiltProposal theta_langevin_proposal(const GaussianTarget& target,
                                      const ThetaLangevinSpec& spec);

/// L steps of the base proposal composed into a single AR(1) proposal.
Ar1Proposal l_step_proposal(const Ar1Proposal& base, int L);
/// As above; the splitting keeps calA and beta of the base.
BuiltProposal l_step_proposal(const BuiltProposal& base, int L);

/// Position marginal of L leapfrog steps with momentum p0 ~ N(0, V^{-1}).
BuiltProposal hmc_proposal(const GaussianTarget& target, const HmcSpec& spec);

/// cos(L theta_i), theta_i = -arccos(1 - h^2 mu_i / 2) for eigenvalues mu_i of VA.
VectorXd hmc_mode_eigenvalues(const VectorXd& va_eigenvalues, double h, int L);

/// One leapfrog step [q; p] -> K [q; p] + J [0; h/2 b].
struct LeapfrogMatrices {
  MatrixXd K;
  MatrixXd J;
};

LeapfrogMatrices leapfrog_matrices(const MatrixXd& A, const MatrixXd& V, double h);

struct PhaseState {
  VectorXd q;
  VectorXd p;
};

/// L explicit leapfrog steps for H(q, p) = p^T V p / 2 + q^T A q / 2 - b^T q.
PhaseState leapfrog_integrate(const MatrixXd& A, const VectorXd& b, const MatrixXd& V,
                              double h, int L, PhaseState start);

}  // namespace mhsplit
