#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "mhsplit/errors.hpp"

namespace mhsplit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using Rng = std::mt19937_64;

/// splitmix64 mixing of (master, index); used to derive independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Fills v with i.i.d. standard normal draws.
void fill_standard_normal(Rng& rng, VectorXd& v);

/// Uniform draw on the open interval (0, 1).
double uniform_open(Rng& rng);

/// Dense symmetric positive definite matrix.
///
/// Construction checks symmetry to 1e-12 relative to the largest entry,
/// stores the symmetrized matrix (A + A^T)/2 and verifies definiteness with a
/// Cholesky factorization.
class SpdMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit SpdMatrix(const MatrixXd& entries);

  int dim() const { return static_cast<int>(m_.rows()); }
  const MatrixXd& matrix() const { return m_; }

 private:
  MatrixXd m_;
};

/// A = Q diag(eigenvalues) Q^T with ascending, strictly positive eigenvalues.
///
/// The eigenvalues are the squared quantities lambda_i^2. When the basis is
/// the identity the projections are skipped entirely.
class SpdSpectrum {
 public:
  static SpdSpectrum decompose(const SpdMatrix& a);
  /// Validates orthogonality of the basis to 1e-10 and sorts ascending.
  static SpdSpectrum from_parts(VectorXd eigenvalues, MatrixXd basis);
  static SpdSpectrum diagonal(VectorXd eigenvalues);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Dense Q; materialized on each call when the basis is the identity.
  MatrixXd basis() const;
  bool identity_basis() const { return identity_; }

  VectorXd to_eigen(const VectorXd& x) const;
  VectorXd from_eigen(const VectorXd& z) const;
  /// Q diag(values) Q^T for per-mode values.
  MatrixXd compose(const VectorXd& mode_values) const;
  MatrixXd reconstruct() const { return compose(eigenvalues_); }

 private:
  SpdSpectrum(VectorXd eigenvalues, MatrixXd basis, bool identity);

  VectorXd eigenvalues_;
  MatrixXd basis_;
  bool identity_ = false;
};

using SpectrumPtr = std::shared_ptr<const SpdSpectrum>;

/// Gaussian N(A^{-1} b, A^{-1}) with density proportional to
/// exp(-x^T A x / 2 + b^T x).
class GaussianTarget {
 public:
  GaussianTarget(SpectrumPtr spectrum, VectorXd shift);
  GaussianTarget(const SpdMatrix& precision, VectorXd shift);

  int dim() const { return spectrum_->dim(); }
  /// Dense A, composed on first use and shared between copies.
  const MatrixXd& precision() const;
  const VectorXd& shift() const { return shift_; }
  const VectorXd& mean() const { return mean_; }
  const SpdSpectrum& spectrum() const { return *spectrum_; }
  const SpectrumPtr& spectrum_ptr() const { return spectrum_; }

  /// Shift and mean expressed in the eigenbasis.
  const VectorXd& shift_eigen() const { return shift_eigen_; }
  const VectorXd& mean_eigen() const { return mean_eigen_; }

  /// Unnormalized log density.
  double log_density(const VectorXd& x) const;
  double log_density_eigen(const VectorXd& z) const;

 private:
  void finish();

  struct PrecisionCache {
    std::once_flag once;
    MatrixXd matrix;
  };

  SpectrumPtr spectrum_;
  std::shared_ptr<PrecisionCache> precision_ = std::make_shared<PrecisionCache>();
  VectorXd shift_;
  VectorXd shift_eigen_;
  VectorXd mean_;
  VectorXd mean_eigen_;
};

using GaussianTargetPtr = std::shared_ptr<const GaussianTarget>;

/// Deterministic potential phi with optional bound |phi| <= bound.
struct Phi {
  std::string name;
  double amplitude = 0.0;
  std::function<double(const VectorXd&)> eval;
  std::optional<double> bound;

  double operator()(const VectorXd& x) const { return eval ? eval(x) : 0.0; }
  bool is_zero() const { return !eval; }
};

enum class PhiKind { zero, bounded_cosine };

/// bounded_cosine: amplitude * mean_i cos(x_i). zero: phi == 0.
Phi builtin_phi(PhiKind kind, double amplitude);
PhiKind parse_phi_kind(const std::string& name);

/// Target with d pi / d pi_ref = exp(-phi).
class ChangeOfMeasureTarget {
 public:
  ChangeOfMeasureTarget(GaussianTargetPtr reference, Phi phi);

  int dim() const { return reference_->dim(); }
  const GaussianTarget& reference() const { return *reference_; }
  const GaussianTargetPtr& reference_ptr() const { return reference_; }
  const Phi& phi() const { return phi_; }

  double log_density(const VectorXd& x) const;

 private:
  GaussianTargetPtr reference_;
  Phi phi_;
};

/// lambda_i = scale * i^kappa for i = 1..d; eigenvalues are lambda_i^2.
struct SpectrumFamily {
  double kappa = 0.0;
  double scale = 1.0;

  double lambda(int i) const;
  VectorXd eigenvalues(int d) const;
};

enum class ShiftLaw { zero, random };

/// Haar-style orthogonal matrix: QR of a standard normal matrix with the
/// diagonal of R forced positive.
MatrixXd random_orthogonal(int d, std::uint64_t seed);

/// Test problem with spectrum from `family`. The rotation is drawn from the
/// stream `seed` (so serialized targets can carry q_seed) and the random shift
/// from an independent stream derived from it.
GaussianTarget make_test_target(int d, const SpectrumFamily& family,
                                std::uint64_t seed, bool rotate,
                                ShiftLaw shift_law);

/// A^{-1} b + Q Lambda^{-1/2} xi.
VectorXd exact_gaussian_sample(const GaussianTarget& target, Rng& rng);
/// Same draw expressed in the eigenbasis (no Q product).
VectorXd exact_gaussian_sample_eigen(const GaussianTarget& target, Rng& rng);

/// (1 / d^{1 + p kappa}) sum_i weight(lambda_i) lambda_i^p where lambda_i is
/// the square root of the i-th eigenvalue.
double tau_statistic(const VectorXd& eigenvalues, int power, double kappa,
                     const std::function<double(double)>& weight = {});

}  // namespace mhsplit
