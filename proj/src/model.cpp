#include "mhsplit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mhsplit {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void fill_standard_normal(Rng& rng, VectorXd& v) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
}

double uniform_open(Rng& rng) {
  // 53 random bits mapped to the midpoints of a uniform grid on (0, 1).
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

SpdMatrix::SpdMatrix(const MatrixXd& entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols())
    throw InvalidArgument("SpdMatrix: matrix must be square and non-empty");
  const double scale = std::max(entries.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream os;
    os << "SpdMatrix: asymmetry " << asym / scale << " exceeds tolerance";
    throw NotSpd(os.str());
  }
  m_ = 0.5 * (entries + entries.transpose());
  Eigen::LLT<MatrixXd> llt(m_);
  if (llt.info() != Eigen::Success)
    throw NotSpd("SpdMatrix: matrix is not positive definite");
}

SpdSpectrum::SpdSpectrum(VectorXd eigenvalues, MatrixXd basis, bool identity)
    : eigenvalues_(std::move(eigenvalues)),
      basis_(std::move(basis)),
      identity_(identity) {}

SpdSpectrum SpdSpectrum::decompose(const SpdMatrix& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.matrix());
  if (es.info() != Eigen::Success)
    throw Error("SpdSpectrum: eigen-decomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NotSpd("SpdSpectrum: non-positive eigenvalue");
  return SpdSpectrum(es.eigenvalues(), es.eigenvectors(), false);
}

SpdSpectrum SpdSpectrum::from_parts(VectorXd eigenvalues, MatrixXd basis) {
  const int d = static_cast<int>(eigenvalues.size());
  if (d == 0 || basis.rows() != d || basis.cols() != d)
    throw InvalidArgument("SpdSpectrum: basis must be d x d");
  if (eigenvalues.minCoeff() <= 0.0)
    throw NotSpd("SpdSpectrum: eigenvalues must be strictly positive");
  const bool identity_in = basis.isIdentity(0.0);
  if (identity_in && std::is_sorted(eigenvalues.data(), eigenvalues.data() + d))
    return SpdSpectrum(std::move(eigenvalues), MatrixXd(), true);
  if (!identity_in) {
    const double orth =
        (basis.transpose() * basis - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
    if (orth > 1e-10) throw InvalidArgument("SpdSpectrum: basis is not orthogonal");
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return eigenvalues[i] < eigenvalues[j]; });
  VectorXd ev(d);
  MatrixXd q(d, d);
  for (int k = 0; k < d; ++k) {
    ev[k] = eigenvalues[order[k]];
    q.col(k) = basis.col(order[k]);
  }
  const bool identity = q.isIdentity(0.0);
  return SpdSpectrum(std::move(ev), std::move(q), identity);
}

SpdSpectrum SpdSpectrum::diagonal(VectorXd eigenvalues) {
  const int d = static_cast<int>(eigenvalues.size());
  if (d == 0) throw InvalidArgument("SpdSpectrum: empty spectrum");
  if (eigenvalues.minCoeff() <= 0.0)
    throw NotSpd("SpdSpectrum: eigenvalues must be strictly positive");
  if (std::is_sorted(eigenvalues.data(), eigenvalues.data() + d))
    return SpdSpectrum(std::move(eigenvalues), MatrixXd(), true);
  return from_parts(std::move(eigenvalues), MatrixXd::Identity(d, d));
}

MatrixXd SpdSpectrum::basis() const {
  if (identity_) return MatrixXd::Identity(dim(), dim());
  return basis_;
}

VectorXd SpdSpectrum::to_eigen(const VectorXd& x) const {
  if (identity_) return x;
  return basis_.transpose() * x;
}

VectorXd SpdSpectrum::from_eigen(const VectorXd& z) const {
  if (identity_) return z;
  return basis_ * z;
}

MatrixXd SpdSpectrum::compose(const VectorXd& mode_values) const {
  if (identity_) return mode_values.asDiagonal();
  return basis_ * mode_values.asDiagonal() * basis_.transpose();
}

GaussianTarget::GaussianTarget(SpectrumPtr spectrum, VectorXd shift)
    : spectrum_(std::move(spectrum)), shift_(std::move(shift)) {
  if (!spectrum_) throw InvalidArgument("GaussianTarget: null spectrum");
  finish();
}

GaussianTarget::GaussianTarget(const SpdMatrix& precision, VectorXd shift)
    : spectrum_(std::make_shared<SpdSpectrum>(SpdSpectrum::decompose(precision))),
      shift_(std::move(shift)) {
  std::call_once(precision_->once, [&] { precision_->matrix = precision.matrix(); });
  finish();
}

const MatrixXd& GaussianTarget::precision() const {
  std::call_once(precision_->once, [this] { precision_->matrix = spectrum_->reconstruct(); });
  return precision_->matrix;
}

void GaussianTarget::finish() {
  if (shift_.size() != spectrum_->dim())
    throw InvalidArgument("GaussianTarget: shift has wrong dimension");
  shift_eigen_ = spectrum_->to_eigen(shift_);
  mean_eigen_ = shift_eigen_.cwiseQuotient(spectrum_->eigenvalues());
  mean_ = spectrum_->from_eigen(mean_eigen_);
}

double GaussianTarget::log_density(const VectorXd& x) const {
  return log_density_eigen(spectrum_->to_eigen(x));
}

double GaussianTarget::log_density_eigen(const VectorXd& z) const {
  return -0.5 * z.cwiseProduct(z).dot(spectrum_->eigenvalues()) +
         shift_eigen_.dot(z);
}

Phi builtin_phi(PhiKind kind, double amplitude) {
  if (!(amplitude >= 0.0)) throw InvalidArgument("builtin_phi: amplitude < 0");
  Phi phi;
  phi.amplitude = amplitude;
  switch (kind) {
    case PhiKind::zero:
      phi.name = "zero";
      phi.bound = 0.0;
      break;
    case PhiKind::bounded_cosine:
      phi.name = "bounded_cosine";
      phi.bound = amplitude;
      phi.eval = [amplitude](const VectorXd& x) {
        return amplitude * x.array().cos().sum() / static_cast<double>(x.size());
      };
      break;
  }
  return phi;
}

PhiKind parse_phi_kind(const std::string& name) {
  if (name == "zero") return PhiKind::zero;
  if (name == "bounded_cosine") return PhiKind::bounded_cosine;
  throw InvalidArgument("unknown phi: " + name);
}

ChangeOfMeasureTarget::ChangeOfMeasureTarget(GaussianTargetPtr reference, Phi phi)
    : reference_(std::move(reference)), phi_(std::move(phi)) {
  if (!reference_) throw InvalidArgument("ChangeOfMeasureTarget: null reference");
}

double ChangeOfMeasureTarget::log_density(const VectorXd& x) const {
  return reference_->log_density(x) - phi_(x);
}

double SpectrumFamily::lambda(int i) const {
  return scale * std::pow(static_cast<double>(i), kappa);
}

VectorXd SpectrumFamily::eigenvalues(int d) const {
  if (!(kappa >= 0.0) || !(scale > 0.0))
    throw InvalidArgument("SpectrumFamily: need kappa >= 0 and scale > 0");
  VectorXd ev(d);
  for (int i = 0; i < d; ++i) {
    const double l = lambda(i + 1);
    ev[i] = l * l;
  }
  return ev;
}

MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

GaussianTarget make_test_target(int d, const SpectrumFamily& family,
                                std::uint64_t seed, bool rotate,
                                ShiftLaw shift_law) {
  if (d < 1) throw InvalidArgument("make_test_target: d must be >= 1");
  VectorXd ev = family.eigenvalues(d);
  auto spectrum = std::make_shared<SpdSpectrum>(
      rotate ? SpdSpectrum::from_parts(std::move(ev), random_orthogonal(d, seed))
             : SpdSpectrum::diagonal(std::move(ev)));
  VectorXd b = VectorXd::Zero(d);
  if (shift_law == ShiftLaw::random) {
    Rng rng(derive_seed(seed, 1));
    fill_standard_normal(rng, b);
  }
  return GaussianTarget(std::move(spectrum), std::move(b));
}

VectorXd exact_gaussian_sample_eigen(const GaussianTarget& target, Rng& rng) {
  VectorXd xi(target.dim());
  fill_standard_normal(rng, xi);
  return target.mean_eigen() +
         xi.cwiseQuotient(target.spectrum().eigenvalues().cwiseSqrt());
}

VectorXd exact_gaussian_sample(const GaussianTarget& target, Rng& rng) {
  return target.spectrum().from_eigen(exact_gaussian_sample_eigen(target, rng));
}

double tau_statistic(const VectorXd& eigenvalues, int power, double kappa,
                     const std::function<double(double)>& weight) {
  if (power != 4 && power != 6)
    throw InvalidArgument("tau_statistic: power must be 4 or 6");
  const double d = static_cast<double>(eigenvalues.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = std::sqrt(eigenvalues[i]);
    const double w = weight ? weight(lam) : 1.0;
    sum += w * std::pow(lam, power);
  }
  return sum / std::pow(d, 1.0 + power * kappa);
}

}  // namespace mhsplit
