#include "mhsplit/splitting.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace mhsplit {
namespace {

constexpr double kDerivedSymmetryTolerance = 1e-8;
constexpr double kMaxCondition = 1e14;

double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double relative_asymmetry(const MatrixXd& m) {
  const double scale = std::max(max_abs(m), 1e-300);
  return max_abs(m - m.transpose()) / scale;
}

MatrixXd symmetrized(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

bool is_spd(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(symmetrized(m));
  return llt.info() == Eigen::Success;
}

void require_convergent(double radius, const char* who) {
  if (!(radius <= kMaxSpectralRadius)) {
    std::ostringstream os;
    os << who << ": spectral radius " << radius << " is not below 1 - 1e-12";
    throw NonConvergent(radius, os.str());
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* who) {
  if (a != b) throw InvalidArgument(std::string(who) + ": dimension mismatch");
}

double off_diagonal_scale(const MatrixXd& m) {
  MatrixXd off = m;
  off.diagonal().setZero();
  return max_abs(off);
}

}  // namespace

// ---------------------------------------------------------------- Ar1Proposal

Ar1Proposal Ar1Proposal::dense(MatrixXd G, VectorXd g, MatrixXd Sigma) {
  const auto d = g.size();
  if (d == 0) throw InvalidArgument("Ar1Proposal: empty proposal");
  require_same_dim(G.rows(), d, "Ar1Proposal");
  require_same_dim(G.cols(), d, "Ar1Proposal");
  require_same_dim(Sigma.rows(), d, "Ar1Proposal");
  require_same_dim(Sigma.cols(), d, "Ar1Proposal");
  if (relative_asymmetry(Sigma) > kDerivedSymmetryTolerance)
    throw NotSpd("Ar1Proposal: Sigma is not symmetric");
  Sigma = symmetrized(Sigma);
  if (!is_spd(Sigma)) throw NotSpd("Ar1Proposal: Sigma is not positive definite");
  Ar1Proposal p;
  p.G_ = std::move(G);
  p.g_ = std::move(g);
  p.Sigma_ = std::move(Sigma);
  return p;
}

Ar1Proposal Ar1Proposal::spectral(SpectrumPtr basis, VectorXd G, VectorXd g_eigen,
                                  VectorXd Sigma) {
  if (!basis) throw InvalidArgument("Ar1Proposal: null basis");
  const auto d = basis->dim();
  require_same_dim(G.size(), d, "Ar1Proposal");
  require_same_dim(g_eigen.size(), d, "Ar1Proposal");
  require_same_dim(Sigma.size(), d, "Ar1Proposal");
  Ar1Proposal p;
  for (int i = 0; i < d; ++i) {
    if (!(Sigma[i] >= 0.0)) throw NotSpd("Ar1Proposal: negative mode variance");
    if (Sigma[i] == 0.0) {
      if (std::abs(std::abs(G[i]) - 1.0) > 1e-9)
        throw NotSpd("Ar1Proposal: zero variance on a non-degenerate mode");
      p.degenerate_.push_back(i);
    }
  }
  p.g_ = g_eigen;
  p.spectral_ = SpectralAr1{std::move(basis), std::move(G), std::move(g_eigen),
                            std::move(Sigma)};
  return p;
}

const SpectralAr1& Ar1Proposal::spectral_form() const {
  if (!spectral_) throw TheoryUnavailable("proposal has no spectral form");
  return *spectral_;
}

MatrixXd Ar1Proposal::G() const {
  return spectral_ ? spectral_->basis->compose(spectral_->G) : G_;
}

VectorXd Ar1Proposal::g() const {
  return spectral_ ? spectral_->basis->from_eigen(spectral_->g) : g_;
}

MatrixXd Ar1Proposal::Sigma() const {
  return spectral_ ? spectral_->basis->compose(spectral_->Sigma) : Sigma_;
}

std::optional<Ar1Proposal> try_spectral_form(const Ar1Proposal& p,
                                             const SpectrumPtr& basis) {
  if (p.has_spectral_form()) return p;
  if (!basis || basis->dim() != p.dim()) return std::nullopt;
  const MatrixXd& q = basis->basis();
  const MatrixXd gq = q.transpose() * p.G() * q;
  const MatrixXd sq = q.transpose() * p.Sigma() * q;
  if (off_diagonal_scale(gq) > 1e-10 * std::max(1.0, max_abs(gq))) return std::nullopt;
  if (off_diagonal_scale(sq) > 1e-10 * std::max(1.0, max_abs(sq))) return std::nullopt;
  return Ar1Proposal::spectral(basis, gq.diagonal(), basis->to_eigen(p.g()),
                               sq.diagonal());
}

// ------------------------------------------------------------ MatrixSplitting

MatrixSplitting MatrixSplitting::dense(MatrixXd M, MatrixXd N, VectorXd beta) {
  const auto d = beta.size();
  if (d == 0) throw InvalidArgument("MatrixSplitting: empty splitting");
  require_same_dim(M.rows(), d, "MatrixSplitting");
  require_same_dim(M.cols(), d, "MatrixSplitting");
  require_same_dim(N.rows(), d, "MatrixSplitting");
  require_same_dim(N.cols(), d, "MatrixSplitting");
  MatrixXd calA = M - N;
  if (relative_asymmetry(calA) > kDerivedSymmetryTolerance)
    throw NotSpd("MatrixSplitting: M - N is not symmetric");
  calA = symmetrized(calA);
  if (!is_spd(calA)) throw NotSpd("MatrixSplitting: M - N is not positive definite");
  if (!is_spd(M.transpose() + N))
    throw NotSpd("MatrixSplitting: M^T + N is not positive definite");
  MatrixSplitting s;
  s.M_ = std::move(M);
  s.N_ = std::move(N);
  s.calA_ = std::move(calA);
  s.beta_ = std::move(beta);
  return s;
}

MatrixSplitting MatrixSplitting::spectral(SpectrumPtr basis, VectorXd M, VectorXd N,
                                          VectorXd beta_eigen, VectorXd calA) {
  if (!basis) throw InvalidArgument("MatrixSplitting: null basis");
  const auto d = basis->dim();
  require_same_dim(M.size(), d, "MatrixSplitting");
  require_same_dim(N.size(), d, "MatrixSplitting");
  require_same_dim(beta_eigen.size(), d, "MatrixSplitting");
  require_same_dim(calA.size(), d, "MatrixSplitting");
  for (int i = 0; i < d; ++i) {
    if (!(calA[i] > 0.0)) throw NotSpd("MatrixSplitting: calA mode not positive");
    if (std::isfinite(M[i]) && !(M[i] + N[i] > 0.0))
      throw NotSpd("MatrixSplitting: M^T + N mode not positive");
  }
  MatrixSplitting s;
  s.beta_ = beta_eigen;
  s.spectral_ = SpectralSplitting{std::move(basis), std::move(M), std::move(N),
                                  std::move(beta_eigen), std::move(calA)};
  return s;
}

const SpectralSplitting& MatrixSplitting::spectral_form() const {
  if (!spectral_) throw TheoryUnavailable("splitting has no spectral form");
  return *spectral_;
}

MatrixXd MatrixSplitting::M() const {
  return spectral_ ? spectral_->basis->compose(spectral_->M) : M_;
}
MatrixXd MatrixSplitting::N() const {
  return spectral_ ? spectral_->basis->compose(spectral_->N) : N_;
}
VectorXd MatrixSplitting::beta() const {
  return spectral_ ? spectral_->basis->from_eigen(spectral_->beta) : beta_;
}
MatrixXd MatrixSplitting::calA() const {
  return spectral_ ? spectral_->basis->compose(spectral_->calA) : calA_;
}

bool MatrixSplitting::is_symmetric() const {
  if (spectral_) return true;
  return relative_asymmetry(M_) <= 1e-10;
}

// ------------------------------------------------------------------ algorithms

double spectral_radius(const MatrixXd& G) {
  if (G.rows() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(G, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const Ar1Proposal& p) {
  if (p.has_spectral_form()) return p.spectral_form().G.cwiseAbs().maxCoeff();
  return spectral_radius(p.G());
}

MatrixXd solve_discrete_lyapunov(const MatrixXd& G, const MatrixXd& Sigma) {
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;
  const auto d = G.rows();
  require_same_dim(G.cols(), d, "solve_discrete_lyapunov");
  require_same_dim(Sigma.rows(), d, "solve_discrete_lyapunov");
  require_same_dim(Sigma.cols(), d, "solve_discrete_lyapunov");

  Eigen::ComplexSchur<MatrixXd> schur(G);
  if (schur.info() != Eigen::Success)
    throw Error("solve_discrete_lyapunov: Schur decomposition failed");
  const CMatrix& U = schur.matrixU();
  const CMatrix& T = schur.matrixT();
  const CMatrix C = U.adjoint() * Sigma.cast<std::complex<double>>() * U;

  // Y - T Y T^* = C, columns solved from the last one backwards.
  CMatrix Y = CMatrix::Zero(d, d);
  CVector acc(d);
  const CMatrix I = CMatrix::Identity(d, d);
  for (Eigen::Index j = d - 1; j >= 0; --j) {
    acc.setZero();
    for (Eigen::Index l = j + 1; l < d; ++l) acc += Y.col(l) * std::conj(T(j, l));
    CVector rhs = C.col(j) + T * acc;
    const CMatrix lhs = I - std::conj(T(j, j)) * T;
    Y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  const MatrixXd X = (U * Y * U.adjoint()).real();
  return symmetrized(X);
}

MatrixSplitting ar1_to_splitting(const Ar1Proposal& p) {
  const double radius = spectral_radius(p);
  require_convergent(radius, "ar1_to_splitting");
  if (p.has_spectral_form()) {
    const auto& s = p.spectral_form();
    const VectorXd one = VectorXd::Ones(p.dim());
    const VectorXd calA = (one - s.G.cwiseAbs2()).cwiseQuotient(s.Sigma);
    const VectorXd M = calA.cwiseQuotient(one - s.G);
    const VectorXd N = M.cwiseProduct(s.G);
    const VectorXd beta = M.cwiseProduct(s.g);
    return MatrixSplitting::spectral(s.basis, M, N, beta, calA);
  }
  const MatrixXd G = p.G();
  const MatrixXd X = solve_discrete_lyapunov(G, p.Sigma());
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success)
    throw NotSpd("ar1_to_splitting: stationary covariance is not positive definite");
  const auto d = p.dim();
  const MatrixXd calA = symmetrized(llt.solve(MatrixXd::Identity(d, d)));
  const MatrixXd I = MatrixXd::Identity(d, d);
  // M = calA (I - G)^{-1}, i.e. M^T = (I - G)^{-T} calA.
  const MatrixXd M = (I - G).transpose().partialPivLu().solve(calA).transpose();
  MatrixXd N = M * G;
  VectorXd beta = M * p.g();
  return MatrixSplitting::dense(M, std::move(N), std::move(beta));
}

Ar1Proposal splitting_to_ar1(const MatrixSplitting& s) {
  if (s.has_spectral_form()) {
    const auto& sp = s.spectral_form();
    const double lo = sp.M.cwiseAbs().minCoeff();
    const double hi = sp.M.cwiseAbs().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition)
      throw SingularM(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity(),
                      "splitting_to_ar1: M is numerically singular");
    VectorXd G = sp.N.cwiseQuotient(sp.M);
    VectorXd g = sp.beta.cwiseQuotient(sp.M);
    VectorXd Sigma = (sp.M + sp.N).cwiseQuotient(sp.M.cwiseAbs2());
    return Ar1Proposal::spectral(sp.basis, std::move(G), std::move(g), std::move(Sigma));
  }
  const MatrixXd M = s.M();
  Eigen::PartialPivLU<MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1.0 / kMaxCondition))
    throw SingularM(rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity(),
                    "splitting_to_ar1: M is numerically singular");
  MatrixXd G = lu.solve(s.N());
  VectorXd g = lu.solve(s.beta());
  const MatrixXd W = lu.solve(M.transpose() + s.N());
  MatrixXd Sigma = lu.solve(W.transpose()).transpose();
  return Ar1Proposal::dense(std::move(G), std::move(g), symmetrized(Sigma));
}

MatrixSplitting symmetric_splitting(const Ar1Proposal& p) {
  if (p.has_spectral_form()) return ar1_to_splitting(p);
  const MatrixXd G = p.G();
  const MatrixXd Sigma = p.Sigma();
  const MatrixXd GS = G * Sigma;
  const double asym = relative_asymmetry(GS);
  if (asym > 1e-10) {
    std::ostringstream os;
    os << "symmetric_splitting: G Sigma asymmetry " << asym << " exceeds 1e-10";
    throw NotSymmetrizable(os.str());
  }
  require_convergent(spectral_radius(G), "symmetric_splitting");
  const auto d = p.dim();
  Eigen::LLT<MatrixXd> llt(Sigma);
  const MatrixXd M = symmetrized(llt.solve(MatrixXd::Identity(d, d) + G));
  MatrixXd N = symmetrized(M * G);
  VectorXd beta = M * p.g();
  return MatrixSplitting::dense(M, std::move(N), std::move(beta));
}

ProposalLimit proposal_limit(const MatrixSplitting& s) {
  ProposalLimit limit;
  if (s.has_spectral_form()) {
    const auto& sp = s.spectral_form();
    limit.mean = sp.basis->from_eigen(sp.beta.cwiseQuotient(sp.calA));
    limit.precision = sp.basis->compose(sp.calA);
    return limit;
  }
  limit.precision = s.calA();
  Eigen::LLT<MatrixXd> llt(limit.precision);
  if (llt.info() != Eigen::Success)
    throw NotSpd("proposal_limit: calA is not positive definite");
  limit.mean = llt.solve(s.beta());
  return limit;
}

}  // namespace mhsplit
