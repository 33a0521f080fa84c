#include "doctest.h"
#include "oracles.hpp"

#include "mhsplit/proposals.hpp"
#include "mhsplit/verify.hpp"

using namespace mhsplit;

namespace {

double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

GaussianTarget rotated_target(int d, std::uint64_t seed) {
  return make_test_target(d, {0.5, 1.0}, seed, true, ShiftLaw::random);
}

}  // namespace

TEST_SUITE("proposals") {

TEST_CASE("SLA matrices") {
  const GaussianTarget t = rotated_target(6, 1);
  const double h = 0.3;
  const BuiltProposal bp = sla_proposal(t, h);
  const MatrixXd I = MatrixXd::Identity(6, 6);
  CHECK(rel(bp.proposal.G(), I - 0.5 * h * t.precision()) < 1e-12);
  CHECK(rel(bp.proposal.g(), 0.5 * h * t.shift()) < 1e-12);
  CHECK(rel(bp.proposal.Sigma(), h * I) < 1e-12);
  CHECK(bp.theory_available);
  CHECK(bp.family == "sla");
  const double lmax = t.spectrum().eigenvalues().maxCoeff();
  CHECK_THROWS_AS(sla_proposal(t, 4.0 / lmax), StepTooLarge);
  CHECK_NOTHROW(sla_proposal(t, 3.99 / lmax));
}

TEST_CASE("theta-method matrices against the implicit update") {
  const GaussianTarget t = rotated_target(5, 2);
  const MatrixXd& A = t.precision();
  MatrixXd V = A.inverse() + 0.1 * A;
  V = 0.5 * (V + V.transpose()).eval();
  const int d = 5;
  const MatrixXd I = MatrixXd::Identity(d, d);
  for (double theta : {0.0, 0.25, 0.5, 1.0}) {
    const double h = 0.2;
    const MatrixXd P = I + 0.5 * theta * h * V * A;
    const MatrixXd Pi = P.inverse();
    const MatrixXd G = Pi * (I - 0.5 * (1.0 - theta) * h * V * A);
    const VectorXd g = Pi * (0.5 * h * V * t.shift());
    const MatrixXd S = Pi * (h * V) * Pi.transpose();

    const BuiltProposal poly =
        theta_langevin_proposal(t, {theta, h, Preconditioner::polynomial({0.0, 0.1})});
    const BuiltProposal inv =
        theta_langevin_proposal(t, {theta, h, Preconditioner::inverse_precision()});
    const BuiltProposal dense = theta_langevin_proposal(t, {theta, h, Preconditioner::dense(V)});
    CHECK(rel(dense.proposal.G(), G) < 1e-10);
    CHECK(rel(dense.proposal.g(), g) < 1e-10);
    CHECK(rel(dense.proposal.Sigma(), S) < 1e-10);
    CHECK_FALSE(dense.theory_available);
    CHECK(dense.has_flag("theory_unavailable"));
    CHECK(poly.proposal.has_spectral_form());
    CHECK(inv.proposal.has_spectral_form());

    const MatrixXd Ai = A.inverse();
    const BuiltProposal combo = theta_langevin_proposal(
        t, {theta, h, Preconditioner::dense(0.5 * (Ai + Ai.transpose()))});
    CHECK(rel(combo.proposal.G(), inv.proposal.G()) < 1e-9);
    CHECK(rel(combo.proposal.Sigma(), inv.proposal.Sigma()) < 1e-9);
    CHECK(rel(combo.splitting.M(), inv.splitting.M()) < 1e-9);
    CHECK(rel(combo.splitting.beta(), inv.splitting.beta()) < 1e-9);
  }
}

TEST_CASE("theta at one half with V = A^{-1} preserves the target") {
  const GaussianTarget t = rotated_target(8, 3);
  const BuiltProposal bp = theta_langevin_proposal(t, {0.5, 1.7, Preconditioner::inverse_precision()});
  CHECK(rel(bp.splitting.calA(), t.precision()) < 1e-10);
  CHECK(rel(bp.splitting.beta(), t.shift()) < 1e-10);
}

TEST_CASE("explicit theta step bound") {
  const GaussianTarget t = rotated_target(4, 4);
  const double mu = t.spectrum().eigenvalues().maxCoeff();
  const double theta = 0.25;
  const double crit = 4.0 / ((1.0 - 2.0 * theta) * mu);
  CHECK_THROWS_AS(theta_langevin_proposal(t, {theta, crit * 1.0001, {}}), StepTooLarge);
  CHECK_NOTHROW(theta_langevin_proposal(t, {theta, crit * 0.99, {}}));
  CHECK_NOTHROW(theta_langevin_proposal(t, {0.75, 100.0, {}}));
}

TEST_CASE("L-step composition") {
  const GaussianTarget t = rotated_target(5, 5);
  const BuiltProposal base = sla_proposal(t, 0.4);
  const Ar1Proposal dense_base = Ar1Proposal::dense(base.proposal.G(), base.proposal.g(),
                                                    base.proposal.Sigma());
  const MatrixXd I = MatrixXd::Identity(5, 5);
  const MatrixXd X = oracle::lyapunov_kron(base.proposal.G(), base.proposal.Sigma());
  for (int L : {1, 2, 4, 8}) {
    MatrixXd GL = I;
    for (int l = 0; l < L; ++l) GL *= base.proposal.G();
    const MatrixXd SL = X - GL * X * GL.transpose();
    const VectorXd gL = (I - GL) * (I - base.proposal.G()).inverse() * base.proposal.g();
    const BuiltProposal lp = l_step_proposal(base, L);
    CHECK(rel(lp.proposal.G(), GL) < 1e-10);
    CHECK(rel(lp.proposal.Sigma(), SL) < 1e-9);
    CHECK(rel(lp.proposal.g(), gL) < 1e-10);
    CHECK(rel(lp.splitting.calA(), base.splitting.calA()) < 1e-10);
    CHECK(lp.matvecs_per_step == L);
    const Ar1Proposal ld = l_step_proposal(dense_base, L);
    CHECK(rel(ld.G(), GL) < 1e-10);
    CHECK(rel(ld.Sigma(), SL) < 1e-9);
  }
}

TEST_CASE("HMC mode eigenvalues follow the Chebyshev recurrence") {
  const VectorXd mu = (VectorXd(4) << 0.1, 1.0, 2.0, 3.5).finished();
  const double h = 1.0;
  for (int L : {1, 2, 3, 7}) {
    const VectorXd G = hmc_mode_eigenvalues(mu, h, L);
    for (int i = 0; i < 4; ++i) {
      const double c = 1.0 - 0.5 * h * h * mu[i];
      double t0 = 1.0, t1 = c;
      for (int l = 1; l < L; ++l) {
        const double t2 = 2.0 * c * t1 - t0;
        t0 = t1;
        t1 = t2;
      }
      CHECK(G[i] == doctest::Approx(t1).epsilon(1e-12));
    }
  }
}

TEST_CASE("HMC proposal is the position marginal of leapfrog") {
  const GaussianTarget t = rotated_target(4, 6);
  const MatrixXd& A = t.precision();
  Rng rng(7);
  const MatrixXd V = random_spd(4, 0.5, 1.5, rng);
  const double h = 0.3;
  const int L = 5;
  const BuiltProposal bp = hmc_proposal(t, {h, L, Preconditioner::dense(V), {}});
  const VectorXd x = oracle::normals(4, rng);
  const VectorXd drift = leapfrog_integrate(A, t.shift(), V, h, L, {x, VectorXd::Zero(4)}).q;
  CHECK((bp.proposal.G() * x + bp.proposal.g() - drift).norm() < 1e-12 * (1.0 + drift.norm()));
  MatrixXd K12(4, 4);
  for (int j = 0; j < 4; ++j)
    K12.col(j) = leapfrog_integrate(A, VectorXd::Zero(4), V, h, L,
                                    {VectorXd::Zero(4), VectorXd::Unit(4, j)}).q;
  const MatrixXd S = K12 * V.inverse() * K12.transpose();
  CHECK(rel(bp.proposal.Sigma(), S) < 1e-10);
  CHECK(bp.matvecs_per_step == L);
  CHECK(rel(bp.splitting.calA().inverse() * bp.splitting.beta(), t.mean()) < 1e-9);
}

TEST_CASE("HMC spectral and dense paths agree") {
  const GaussianTarget t = rotated_target(6, 8);
  const double h = 0.25;
  const BuiltProposal sp = hmc_proposal(t, {h, 6, Preconditioner::identity(), {}});
  const BuiltProposal de =
      hmc_proposal(t, {h, 6, Preconditioner::dense(MatrixXd::Identity(6, 6)), {}});
  CHECK(sp.proposal.has_spectral_form());
  CHECK(rel(sp.proposal.G(), de.proposal.G()) < 1e-10);
  CHECK(rel(sp.proposal.g(), de.proposal.g()) < 1e-10);
  CHECK(rel(sp.proposal.Sigma(), de.proposal.Sigma()) < 1e-10);
  CHECK(rel(sp.splitting.M(), de.splitting.M()) < 1e-8);
  const MatrixXd calA = t.precision() - 0.25 * h * h * t.precision() * t.precision();
  CHECK(rel(sp.splitting.calA(), calA) < 1e-10);
}

TEST_CASE("HMC integration time and stability") {
  const GaussianTarget t = make_test_target(3, {0.0, 1.0}, 1, false, ShiftLaw::zero);
  CHECK(HmcSpec{0.3, 1, {}, 1.0}.steps() == 3);
  CHECK_THROWS_AS(hmc_proposal(t, {2.0, 3, {}, {}}), UnstableIntegrator);
  CHECK_NOTHROW(hmc_proposal(t, {1.9, 3, {}, {}}));
  const BuiltProposal deg = hmc_proposal(t, {std::sqrt(2.0), 2, {}, {}});
  CHECK(deg.has_flag("degenerate_mode"));
  CHECK(deg.proposal.degenerate_modes().size() == 3);
}

TEST_CASE("leapfrog conserves energy to second order") {
  const GaussianTarget t = rotated_target(3, 9);
  const MatrixXd& A = t.precision();
  const MatrixXd V = MatrixXd::Identity(3, 3);
  Rng rng(10);
  const PhaseState s0{oracle::normals(3, rng), oracle::normals(3, rng)};
  auto H = [&](const PhaseState& s) {
    return 0.5 * s.p.squaredNorm() + 0.5 * s.q.dot(A * s.q) - t.shift().dot(s.q);
  };
  const double T = 1.0;
  const double e1 = std::abs(H(leapfrog_integrate(A, t.shift(), V, T / 20, 20, s0)) - H(s0));
  const double e2 = std::abs(H(leapfrog_integrate(A, t.shift(), V, T / 40, 40, s0)) - H(s0));
  CHECK(e2 < 0.4 * e1);
}

TEST_CASE("scaling laws and preconditioner names") {
  CHECK(ScalingLaw{ScalingKind::langevin, 2.0, 0.0}.step(1000) == doctest::Approx(0.4));
  CHECK(ScalingLaw{ScalingKind::hmc, 1.0, 0.0}.step(16) == doctest::Approx(0.5));
  CHECK(parse_preconditioner("identity").kind == PreconditionerKind::identity);
  CHECK(parse_preconditioner("inverse_precision").kind == PreconditionerKind::inverse_precision);
  CHECK_THROWS(parse_preconditioner("nope"));
}

}
