#pragma once

#include <string>
#include <vector>

#include "mhsplit/model.hpp"
#include "mhsplit/splitting.hpp"

namespace mhsplit {

struct VerifyOptions {
  /// Multiplies every statistical tolerance; 0 turns the Monte Carlo checks
  /// into a negative control.
  double tolerance_scale = 1.0;
  /// Where the figures suite writes its CSV; empty means no file.
  std::string out_path;
  long chain_steps = 40000;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string format() const;
};

/// Suites: identities, theory_vs_mc, figures. Failures are report content;
/// an unknown suite name throws ConfigError.
VerifyReport cmd_verify(const std::string& suite, const VerifyOptions& options = {});

/// Dense AR(1) proposal with rho(G) < 0.95 and a well conditioned Sigma.
Ar1Proposal random_convergent_ar1(int d, Rng& rng);
/// As above with G Sigma symmetric, so the symmetric splitting applies.
Ar1Proposal random_symmetrizable_ar1(int d, Rng& rng);
/// Rotated Gaussian target with eigenvalues in [0.2, 5] and a random shift.
GaussianTarget random_gaussian_target(int d, Rng& rng);
/// Random SPD matrix with eigenvalues in [lo, hi].
MatrixXd random_spd(int d, double lo, double hi, Rng& rng);

}  // namespace mhsplit
