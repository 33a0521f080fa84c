#pragma once

#include <vector>

#include "mhsplit/model.hpp"

namespace mhsplit {

/// Largest spectral radius accepted as convergent.
inline constexpr double kMaxSpectralRadius = 1.0 - 1e-12;

/// Per-mode scalars of an AR(1) proposal whose matrices are all diagonal in
/// `basis`. The offset g is stored in eigen coordinates (Q^T g).
struct SpectralAr1 {
  SpectrumPtr basis;
  VectorXd G;
  VectorXd g;
  VectorXd Sigma;
};

/// y = G x + g + nu with nu ~ N(0, Sigma).
///
/// Either dense or spectral. Dense accessors on a spectral proposal compose the
/// matrices on demand.
class Ar1Proposal {
 public:
  static Ar1Proposal dense(MatrixXd G, VectorXd g, MatrixXd Sigma);
  static Ar1Proposal spectral(SpectrumPtr basis, VectorXd G, VectorXd g_eigen,
                              VectorXd Sigma);

  int dim() const { return static_cast<int>(g_.size()); }
  bool has_spectral_form() const { return spectral_.has_value(); }
  const SpectralAr1& spectral_form() const;

  MatrixXd G() const;
  VectorXd g() const;
  MatrixXd Sigma() const;

  /// Modes with zero noise variance (allowed only when |G_i| = 1).
  const std::vector<int>& degenerate_modes() const { return degenerate_; }

 private:
  Ar1Proposal() = default;

  std::optional<SpectralAr1> spectral_;
  MatrixXd G_;
  MatrixXd Sigma_;
  VectorXd g_;
  std::vector<int> degenerate_;
};

/// Returns a spectral copy of `p` if G and Sigma are diagonal in `basis` to
/// 1e-10 relative, otherwise nullopt.
std::optional<Ar1Proposal> try_spectral_form(const Ar1Proposal& p,
                                             const SpectrumPtr& basis);

struct SpectralSplitting {
  SpectrumPtr basis;
  VectorXd M;
  VectorXd N;
  VectorXd beta;  // eigen coordinates
  VectorXd calA;
};

/// M y = N x + beta + nu with calA = M - N symmetric positive definite.
///
/// Spectral splittings carry calA explicitly. For degenerate HMC modes M and N
/// are NaN while calA remains the (finite) limit value.
class MatrixSplitting {
 public:
  static MatrixSplitting dense(MatrixXd M, MatrixXd N, VectorXd beta);
  static MatrixSplitting spectral(SpectrumPtr basis, VectorXd M, VectorXd N,
                                  VectorXd beta_eigen, VectorXd calA);

  int dim() const { return static_cast<int>(beta_.size()); }
  bool has_spectral_form() const { return spectral_.has_value(); }
  const SpectralSplitting& spectral_form() const;

  MatrixXd M() const;
  MatrixXd N() const;
  VectorXd beta() const;
  MatrixXd calA() const;

  /// M symmetric to 1e-10 relative (always true for spectral splittings).
  bool is_symmetric() const;

 private:
  MatrixSplitting() = default;

  std::optional<SpectralSplitting> spectral_;
  MatrixXd M_;
  MatrixXd N_;
  MatrixXd calA_;
  VectorXd beta_;
};

/// Proposal limit distribution N(calA^{-1} beta, calA^{-1}).
struct ProposalLimit {
  VectorXd mean;
  MatrixXd precision;

  double log_density(const VectorXd& x) const {
    return -0.5 * x.dot(precision * x) + x.dot(precision * mean);
  }
};

double spectral_radius(const MatrixXd& G);
double spectral_radius(const Ar1Proposal& p);

/// Solves X - G X G^T = Sigma by complex Schur reduction of G
/// (Bartels-Stewart / Kitagawa column recursion). Requires rho(G) < 1.
MatrixXd solve_discrete_lyapunov(const MatrixXd& G, const MatrixXd& Sigma);

MatrixSplitting ar1_to_splitting(const Ar1Proposal& p);
Ar1Proposal splitting_to_ar1(const MatrixSplitting& s);
/// Closed form valid when G Sigma is symmetric; M and N come out symmetric.
MatrixSplitting symmetric_splitting(const Ar1Proposal& p);
ProposalLimit proposal_limit(const MatrixSplitting& s);

}  // namespace mhsplit
