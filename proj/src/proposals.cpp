#include "mhsplit/proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mhsplit {
namespace {

constexpr double kNearNonconvergent = 1.0 - 1e-6;

void check_radius(double radius, std::vector<std::string>& flags) {
  if (!(radius <= kMaxSpectralRadius)) {
    std::ostringstream os;
    os << "proposal spectral radius " << radius << " is not below 1 - 1e-12";
    throw NonConvergent(radius, os.str());
  }
  if (radius > kNearNonconvergent) flags.push_back("near_nonconvergent");
}

/// Eigenvalues of V A for dense V via the congruence L^T A L with V = L L^T.
VectorXd va_eigenvalues(const MatrixXd& A, const MatrixXd& V) {
  Eigen::LLT<MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw NotSpd("preconditioner is not positive definite");
  const MatrixXd L = llt.matrixL();
  const MatrixXd B = L.transpose() * A * L;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void check_theta_step(double theta, double h, double mu_max) {
  if (theta >= 0.5) return;
  const double critical = 4.0 / ((1.0 - 2.0 * theta) * mu_max);
  if (h >= critical) {
    std::ostringstream os;
    os << "step h = " << h << " makes calA indefinite; need h < " << critical;
    throw StepTooLarge(critical, os.str());
  }
}

void check_hmc_step(double h, double mu_max) {
  if (h * h * mu_max >= 4.0) {
    std::ostringstream os;
    os << "leapfrog step h = " << h << " unstable; need h < " << 2.0 / std::sqrt(mu_max);
    throw UnstableIntegrator(os.str());
  }
}

}  // namespace

VectorXd Preconditioner::mode_values(const VectorXd& a) const {
  switch (kind) {
    case PreconditionerKind::identity:
      return VectorXd::Ones(a.size());
    case PreconditionerKind::inverse_precision:
      return a.cwiseInverse();
    case PreconditionerKind::polynomial: {
      if (coefficients.empty()) throw InvalidArgument("polynomial preconditioner has no coefficients");
      VectorXd v = VectorXd::Zero(a.size());
      for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it)
        v = (v.array() * a.array() + *it).matrix();
      if (!(v.minCoeff() > 0.0)) throw NotSpd("polynomial preconditioner is not positive");
      return v;
    }
    case PreconditionerKind::dense:
      break;
  }
  throw TheoryUnavailable("dense preconditioner has no mode values");
}

MatrixXd Preconditioner::dense_matrix(const GaussianTarget& target) const {
  if (kind == PreconditionerKind::dense) {
    if (matrix.rows() != target.dim()) throw InvalidArgument("preconditioner has wrong dimension");
    return SpdMatrix(matrix).matrix();
  }
  return target.spectrum().compose(mode_values(target.spectrum().eigenvalues()));
}

Preconditioner parse_preconditioner(const std::string& name) {
  if (name == "identity" || name == "I") return Preconditioner::identity();
  if (name == "inverse_precision" || name == "A^-1") return Preconditioner::inverse_precision();
  throw InvalidArgument("unknown preconditioner: " + name);
}

std::string preconditioner_name(const Preconditioner& v) {
  switch (v.kind) {
    case PreconditionerKind::identity: return "identity";
    case PreconditionerKind::inverse_precision: return "inverse_precision";
    case PreconditionerKind::polynomial: return "polynomial";
    case PreconditionerKind::dense: return "dense";
  }
  return "unknown";
}

int HmcSpec::steps() const {
  if (!(h > 0.0)) throw InvalidArgument("HMC step h must be positive");
  if (!T) {
    if (L < 1) throw InvalidArgument("HMC needs L >= 1");
    return L;
  }
  const double n = std::floor(*T / h);
  if (!(n >= 1.0)) throw InvalidArgument("HMC: floor(T / h) must be at least 1");
  return static_cast<int>(n);
}

double ScalingLaw::step(int d) const {
  if (!(l > 0.0) || d < 1) throw InvalidArgument("ScalingLaw: need l > 0 and d >= 1");
  const double dd = static_cast<double>(d);
  if (kind == ScalingKind::langevin) return l * l * std::pow(dd, -1.0 / 3.0 - 2.0 * kappa);
  return l * std::pow(dd, -0.25 - kappa);
}

bool BuiltProposal::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

BuiltProposal sla_proposal(const GaussianTarget& target, double h) {
  BuiltProposal p = theta_langevin_proposal(target, {0.0, h, Preconditioner::identity()});
  p.family = "sla";
  return p;
}

BuiltProposal theta_langevin_proposal(const GaussianTarget& target,
                                      const ThetaLangevinSpec& spec) {
  const double theta = spec.theta;
  const double h = spec.h;
  if (!(h > 0.0)) throw InvalidArgument("theta-Langevin: h must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta-Langevin: theta must be in [0, 1]");
  std::vector<std::string> flags;

  if (spec.V.is_function_of_a()) {
    const auto& basis = target.spectrum_ptr();
    const VectorXd& a = basis->eigenvalues();
    const VectorXd v = spec.V.mode_values(a);
    const VectorXd mu = v.cwiseProduct(a);
    check_theta_step(theta, h, mu.maxCoeff());
    const auto d = a.size();
    VectorXd G(d), g(d), Sigma(d), calA(d), beta(d), M(d), N(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double hm = 0.5 * h * mu[i];
      const double den = 1.0 + theta * hm;
      const double w = 1.0 + (theta - 0.5) * hm;
      G[i] = (1.0 - (1.0 - theta) * hm) / den;
      g[i] = 0.5 * h * v[i] * target.shift_eigen()[i] / den;
      Sigma[i] = h * v[i] / (den * den);
      calA[i] = w * a[i];
      beta[i] = w * target.shift_eigen()[i];
      M[i] = 2.0 * w * den / (h * v[i]);
      N[i] = M[i] * G[i];
    }
    check_radius(G.cwiseAbs().maxCoeff(), flags);
    return {"theta_langevin",
            Ar1Proposal::spectral(basis, G, g, Sigma),
            MatrixSplitting::spectral(basis, M, N, beta, calA),
            true, flags, 1};
  }

  const MatrixXd& A = target.precision();
  const MatrixXd V = spec.V.dense_matrix(target);
  check_theta_step(theta, h, va_eigenvalues(A, V).maxCoeff());
  const auto d = target.dim();
  const MatrixXd I = MatrixXd::Identity(d, d);
  const MatrixXd VA = V * A;
  Eigen::PartialPivLU<MatrixXd> lu(I + 0.5 * theta * h * VA);
  MatrixXd G = lu.solve(I - 0.5 * (1.0 - theta) * h * VA);
  VectorXd g = lu.solve(0.5 * h * V * target.shift());
  const MatrixXd X = lu.solve(h * V);
  MatrixXd Sigma = lu.solve(X.transpose()).transpose();
  Sigma = 0.5 * (Sigma + Sigma.transpose());
  check_radius(spectral_radius(G), flags);
  flags.push_back("theory_unavailable");
  Ar1Proposal ar1 = Ar1Proposal::dense(std::move(G), std::move(g), std::move(Sigma));
  MatrixSplitting split = symmetric_splitting(ar1);
  return {"theta_langevin", std::move(ar1), std::move(split), false, flags, 1};
}

Ar1Proposal l_step_proposal(const Ar1Proposal& base, int L) {
  if (L < 1) throw InvalidArgument("l_step_proposal: L must be >= 1");
  if (L == 1) return base;
  if (base.has_spectral_form()) {
    const auto& s = base.spectral_form();
    const auto d = s.G.size();
    VectorXd GL = VectorXd::Ones(d);
    VectorXd gL = VectorXd::Zero(d);
    VectorXd SL = VectorXd::Zero(d);
    for (int l = 0; l < L; ++l) {
      SL += GL.cwiseAbs2().cwiseProduct(s.Sigma);
      gL += GL.cwiseProduct(s.g);
      GL = GL.cwiseProduct(s.G);
    }
    return Ar1Proposal::spectral(s.basis, GL, gL, SL);
  }
  const MatrixXd G = base.G();
  const MatrixXd Sigma = base.Sigma();
  const VectorXd g = base.g();
  const auto d = base.dim();
  MatrixXd Gl = MatrixXd::Identity(d, d);
  MatrixXd SL = MatrixXd::Zero(d, d);
  VectorXd gL = VectorXd::Zero(d);
  for (int l = 0; l < L; ++l) {
    SL += Gl * Sigma * Gl.transpose();
    gL += Gl * g;
    Gl = G * Gl;
  }
  return Ar1Proposal::dense(std::move(Gl), std::move(gL), 0.5 * (SL + SL.transpose()));
}

BuiltProposal l_step_proposal(const BuiltProposal& base, int L) {
  if (L < 1) throw InvalidArgument("l_step_proposal: L must be >= 1");
  Ar1Proposal ar1 = l_step_proposal(base.proposal, L);
  std::vector<std::string> flags = base.flags;
  if (ar1.has_spectral_form() && base.splitting.has_spectral_form()) {
    const auto& b = base.splitting.spectral_form();
    const VectorXd& GL = ar1.spectral_form().G;
    const VectorXd M = b.calA.cwiseQuotient(VectorXd::Ones(GL.size()) - GL);
    const VectorXd N = M.cwiseProduct(GL);
    MatrixSplitting split = MatrixSplitting::spectral(b.basis, M, N, b.beta, b.calA);
    return {"lstep", std::move(ar1), std::move(split), base.theory_available, flags,
            L * base.matvecs_per_step};
  }
  const auto d = ar1.dim();
  const MatrixXd calA = base.splitting.calA();
  const MatrixXd GL = ar1.G();
  const MatrixXd I = MatrixXd::Identity(d, d);
  MatrixXd M = (I - GL).transpose().partialPivLu().solve(calA).transpose();
  MatrixXd N = M * GL;
  MatrixSplitting split = MatrixSplitting::dense(std::move(M), std::move(N), base.splitting.beta());
  return {"lstep", std::move(ar1), std::move(split), base.theory_available, flags,
          L * base.matvecs_per_step};
}

VectorXd hmc_mode_eigenvalues(const VectorXd& va, double h, int L) {
  if (!(h > 0.0) || L < 1) throw InvalidArgument("hmc_mode_eigenvalues: need h > 0 and L >= 1");
  VectorXd G(va.size());
  for (Eigen::Index i = 0; i < va.size(); ++i) {
    const double c = 1.0 - 0.5 * h * h * va[i];
    if (std::abs(c) > 1.0) throw UnstableIntegrator("hmc_mode_eigenvalues: arccos argument outside [-1, 1]");
    const double th = -std::acos(c);
    G[i] = std::cos(L * th);
  }
  return G;
}

BuiltProposal hmc_proposal(const GaussianTarget& target, const HmcSpec& spec) {
  const double h = spec.h;
  const int L = spec.steps();
  std::vector<std::string> flags;

  if (spec.V.is_function_of_a()) {
    const auto& basis = target.spectrum_ptr();
    const VectorXd& a = basis->eigenvalues();
    const VectorXd v = spec.V.mode_values(a);
    const VectorXd mu = v.cwiseProduct(a);
    check_hmc_step(h, mu.maxCoeff());
    const auto d = a.size();
    VectorXd G(d), g(d), Sigma(d), calA(d), beta(d), M(d), N(d);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double h2mu = h * h * mu[i];
      const double th = -std::acos(1.0 - 0.5 * h2mu);
      const double sL = std::sin(L * th);
      const double ratio = sL / std::sin(th);
      const double mean = target.mean_eigen()[i];
      calA[i] = a[i] * (1.0 - 0.25 * h2mu);
      beta[i] = calA[i] * mean;
      const double cL = std::cos(L * th);
      if (std::abs(cL) > kMaxSpectralRadius) {
        degenerate = true;
        G[i] = cL > 0.0 ? 1.0 : -1.0;
        Sigma[i] = 0.0;
        M[i] = nan;
        N[i] = nan;
      } else {
        G[i] = cL;
        Sigma[i] = v[i] * h * h * ratio * ratio;
        M[i] = calA[i] / (1.0 - G[i]);
        N[i] = M[i] * G[i];
      }
      g[i] = (1.0 - G[i]) * mean;
    }
    if (degenerate) flags.push_back("degenerate_mode");
    double radius = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::isfinite(M[i])) radius = std::max(radius, std::abs(G[i]));
    check_radius(radius, flags);
    return {"hmc",
            Ar1Proposal::spectral(basis, G, g, Sigma),
            MatrixSplitting::spectral(basis, M, N, beta, calA),
            true, flags, L};
  }

  const MatrixXd& A = target.precision();
  const MatrixXd V = spec.V.dense_matrix(target);
  check_hmc_step(h, va_eigenvalues(A, V).maxCoeff());
  const auto d = target.dim();
  const LeapfrogMatrices lf = leapfrog_matrices(A, V, h);
  VectorXd c = VectorXd::Zero(2 * d);
  c.tail(d) = 0.5 * h * target.shift();
  const VectorXd Jc = lf.J * c;
  MatrixXd KL = MatrixXd::Identity(2 * d, 2 * d);
  VectorXd offset = VectorXd::Zero(2 * d);
  for (int l = 0; l < L; ++l) {
    offset += KL * Jc;
    KL = lf.K * KL;
  }
  MatrixXd G = KL.topLeftCorner(d, d);
  const MatrixXd K12 = KL.topRightCorner(d, d);
  Eigen::LLT<MatrixXd> vllt(V);
  MatrixXd Sigma = K12 * vllt.solve(K12.transpose());
  Sigma = 0.5 * (Sigma + Sigma.transpose());
  check_radius(spectral_radius(G), flags);
  flags.push_back("theory_unavailable");
  Ar1Proposal ar1 = Ar1Proposal::dense(std::move(G), offset.head(d), std::move(Sigma));
  MatrixSplitting split = symmetric_splitting(ar1);
  return {"hmc", std::move(ar1), std::move(split), false, flags, L};
}

LeapfrogMatrices leapfrog_matrices(const MatrixXd& A, const MatrixXd& V, double h) {
  const auto d = A.rows();
  if (A.cols() != d || V.rows() != d || V.cols() != d)
    throw InvalidArgument("leapfrog_matrices: dimension mismatch");
  const MatrixXd I = MatrixXd::Identity(d, d);
  const MatrixXd VA = V * A;
  const MatrixXd AV = A * V;
  LeapfrogMatrices m;
  m.K.resize(2 * d, 2 * d);
  m.K << I - 0.5 * h * h * VA, h * V,
         -h * A + 0.25 * h * h * h * A * VA, I - 0.5 * h * h * AV;
  m.J.resize(2 * d, 2 * d);
  m.J << 2.0 * I, h * V,
         -0.5 * h * A, 2.0 * I - 0.5 * h * h * AV;
  return m;
}

PhaseState leapfrog_integrate(const MatrixXd& A, const VectorXd& b, const MatrixXd& V,
                              double h, int L, PhaseState s) {
  VectorXd grad = A * s.q - b;
  for (int l = 0; l < L; ++l) {
    s.p -= 0.5 * h * grad;
    s.q += h * (V * s.p);
    grad = A * s.q - b;
    s.p -= 0.5 * h * grad;
  }
  return s;
}

}  // namespace mhsplit
