#include "mhsplit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "mhsplit/experiment.hpp"
#include "mhsplit/proposals.hpp"
#include "mhsplit/sampler.hpp"
#include "mhsplit/theory.hpp"

namespace mhsplit {
namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform_open(rng); }

MatrixXd normal_matrix(int r, int c, Rng& rng) {
  VectorXd v(r * c);
  fill_standard_normal(rng, v);
  return Eigen::Map<MatrixXd>(v.data(), r, c);
}

VectorXd normal_vector(int d, Rng& rng) {
  VectorXd v(d);
  fill_standard_normal(rng, v);
  return v;
}

double rel_err(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

MatrixXd sym_power(const MatrixXd& s, double p) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  return es.eigenvectors() * es.eigenvalues().array().pow(p).matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Runs `body` over n instances and records the worst deviation.
CheckResult worst_case(const std::string& name, double tol, int n,
                       const std::function<double(int)>& body) {
  CheckResult c{name, true, 0.0, tol, {}};
  for (int k = 0; k < n; ++k) {
    try {
      c.measured = std::max(c.measured, body(k));
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("instance ") + std::to_string(k) + ": " + e.what();
      return c;
    }
  }
  c.passed = c.measured < tol;
  c.detail = std::to_string(n) + " instances";
  return c;
}

double series_lyapunov_error(const Ar1Proposal& p) {
  const MatrixXd G = p.G();
  const MatrixXd X = solve_discrete_lyapunov(G, p.Sigma());
  MatrixXd term = p.Sigma();
  MatrixXd sum = MatrixXd::Zero(G.rows(), G.cols());
  for (int k = 0; k < 5000 && term.norm() > 1e-18 * std::max(1.0, sum.norm()); ++k) {
    sum += term;
    term = G * term * G.transpose();
  }
  return rel_err(X, sum);
}

std::vector<CheckResult> identities_suite() {
  std::vector<CheckResult> out;
  Rng rng(20240901);

  std::vector<Ar1Proposal> general;
  std::vector<Ar1Proposal> symmetric;
  for (int k = 0; k < 30; ++k) {
    const int d = 2 + k % 15;
    general.push_back(random_convergent_ar1(d, rng));
    symmetric.push_back(random_symmetrizable_ar1(d, rng));
  }

  out.push_back(worst_case("ar1_splitting_round_trip", 1e-10, 30, [&](int k) {
    const Ar1Proposal& p = general[k];
    const Ar1Proposal q = splitting_to_ar1(ar1_to_splitting(p));
    return std::max({rel_err(q.G(), p.G()), rel_err(q.g(), p.g()), rel_err(q.Sigma(), p.Sigma())});
  }));
  out.push_back(worst_case("covariance_identity", 1e-10, 30, [&](int k) {
    const Ar1Proposal& p = general[k];
    const MatrixXd calA = ar1_to_splitting(p).calA();
    const MatrixXd inv = calA.llt().solve(MatrixXd::Identity(calA.rows(), calA.cols()));
    return rel_err(inv - p.G() * inv * p.G().transpose(), p.Sigma());
  }));
  out.push_back(worst_case("lyapunov_vs_series", 1e-10, 30,
                           [&](int k) { return series_lyapunov_error(general[k]); }));
  out.push_back(worst_case("symmetric_vs_general_splitting", 1e-10, 30, [&](int k) {
    const MatrixSplitting a = symmetric_splitting(symmetric[k]);
    const MatrixSplitting b = ar1_to_splitting(symmetric[k]);
    return std::max({rel_err(a.M(), b.M()), rel_err(a.N(), b.N()), rel_err(a.beta(), b.beta())});
  }));

  out.push_back(worst_case("closed_form_Z_vs_density_ratio", 1e-10, 10, [&](int k) {
    const int d = 2 + k % 7;
    auto target = std::make_shared<GaussianTarget>(random_gaussian_target(d, rng));
    const ChangeOfMeasureTarget flat(target, builtin_phi(PhiKind::zero, 0.0));
    const double mu_max = target->spectrum().eigenvalues().maxCoeff();
    const Preconditioner V = Preconditioner::dense(random_spd(d, 0.5, 2.0, rng));
    const double theta = uniform(rng, 0.0, 1.0);
    const double h = uniform(rng, 0.05, 0.5) / mu_max;
    const BuiltProposal bp = theta_langevin_proposal(*target, {theta, h, V});
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const VectorXd x = target->mean() + normal_vector(d, rng);
      const VectorXd y = target->mean() + normal_vector(d, rng);
      const double z = log_accept_gaussian(bp.splitting, *target, x, y);
      const double ref = log_accept_density(bp.proposal, flat, x, y);
      worst = std::max(worst, std::abs(z - ref) / std::max(1.0, std::abs(ref)));
    }
    return worst;
  }));

  struct HmcCase {
    MatrixXd A, V;
    double h;
    int L;
  };
  std::vector<HmcCase> hmc;
  for (int k = 0; k < 20; ++k) {
    const int d = 2 + k % 7;
    HmcCase c{random_spd(d, 0.2, 5.0, rng), random_spd(d, 0.5, 2.0, rng), 0.0, 1 + k % 9};
    Eigen::EigenSolver<MatrixXd> es(c.V * c.A);
    const double mu_max = es.eigenvalues().real().maxCoeff();
    c.h = uniform(rng, 0.1, 1.8) / std::sqrt(mu_max);
    hmc.push_back(std::move(c));
  }
  out.push_back(worst_case("hmc_mode_eigenvalues", 1e-10, 20, [&](int k) {
    const HmcCase& c = hmc[k];
    const auto lf = leapfrog_matrices(c.A, c.V, c.h);
    const int d = static_cast<int>(c.A.rows());
    MatrixXd KL = MatrixXd::Identity(2 * d, 2 * d);
    for (int l = 0; l < c.L; ++l) KL = lf.K * KL;
    Eigen::EigenSolver<MatrixXd> es(KL.topLeftCorner(d, d));
    VectorXd got = es.eigenvalues().real();
    Eigen::EigenSolver<MatrixXd> va(c.V * c.A);
    VectorXd want = hmc_mode_eigenvalues(va.eigenvalues().real(), c.h, c.L);
    std::sort(got.data(), got.data() + d);
    std::sort(want.data(), want.data() + d);
    return (got - want).cwiseAbs().maxCoeff();
  }));
  out.push_back(worst_case("leapfrog_det_one", 1e-10, 20, [&](int k) {
    const HmcCase& c = hmc[k];
    return std::abs(leapfrog_matrices(c.A, c.V, c.h).K.determinant() - 1.0);
  }));
  out.push_back(worst_case("hmc_limit_mean", 1e-8, 20, [&](int k) {
    const HmcCase& c = hmc[k];
    const int d = static_cast<int>(c.A.rows());
    const GaussianTarget target(SpdMatrix(c.A), normal_vector(d, rng));
    const BuiltProposal bp = hmc_proposal(target, {c.h, c.L, Preconditioner::dense(c.V), {}});
    const VectorXd lim = bp.splitting.calA().llt().solve(bp.splitting.beta());
    return rel_err(lim, target.mean());
  }));
  out.push_back(worst_case("leapfrog_reversibility", 1e-9, 20, [&](int k) {
    const HmcCase& c = hmc[k];
    const int d = static_cast<int>(c.A.rows());
    const VectorXd b = normal_vector(d, rng);
    const PhaseState start{normal_vector(d, rng), normal_vector(d, rng)};
    PhaseState s = leapfrog_integrate(c.A, b, c.V, c.h, c.L, start);
    s.p = -s.p;
    s = leapfrog_integrate(c.A, b, c.V, c.h, c.L, s);
    const double scale = std::max(1.0, start.q.norm() + start.p.norm());
    return std::max((s.q - start.q).norm(), (s.p + start.p).norm()) / scale;
  }));

  out.push_back(worst_case("pcn_zero_log_ratio", 1e-10, 5, [&](int k) {
    const GaussianTarget target = make_test_target(20, {0.5, 1.0}, 100 + k, true, ShiftLaw::random);
    const BuiltProposal bp =
        theta_langevin_proposal(target, {0.5, uniform(rng, 0.1, 4.0), Preconditioner::inverse_precision()});
    const TheorySummary s = summarize(target, bp);
    double worst = std::max(std::abs(s.mu), std::abs(s.sigma2)) + std::abs(s.expected_acceptance - 1.0);
    for (int n = 0; n < 10; ++n) {
      const VectorXd x = normal_vector(20, rng);
      const VectorXd y = normal_vector(20, rng);
      worst = std::max(worst, std::abs(log_accept_gaussian(bp.splitting, target, x, y)));
    }
    return worst;
  }));

  const OptimalTuning lang = optimal_tuning(TuningFamily::langevin);
  out.push_back({"langevin_s0", std::abs(lang.s0 - 0.8252) < 5e-4, std::abs(lang.s0 - 0.8252), 5e-4,
                 "s0 = " + format_double(lang.s0)});
  out.push_back({"langevin_acceptance", std::abs(lang.acceptance - 0.574) < 1e-3,
                 std::abs(lang.acceptance - 0.574), 1e-3,
                 "acceptance = " + format_double(lang.acceptance)});
  const int best = optimal_L(0.0);
  out.push_back({"lstep_argmax_t0", best == 3, static_cast<double>(best), 0.0, "argmax L = " +
                 std::to_string(best) + ", expected 3"});
  return out;
}

struct McCase {
  std::string name;
  ProposalSpec proposal;
  int dim;
};

std::vector<CheckResult> theory_vs_mc_suite(const VerifyOptions& opt) {
  std::vector<McCase> cases;
  auto add = [&](std::string name, std::string family, double l, double theta, int L, int dim) {
    ProposalSpec p;
    p.family = std::move(family);
    p.l = l;
    p.theta = theta;
    p.L = L;
    cases.push_back({std::move(name), p, dim});
  };
  add("sla", "sla", 1.3, 0.0, 1, 50);
  add("theta_langevin_0.25", "theta_langevin", 1.3, 0.25, 1, 50);
  add("theta_langevin_1", "theta_langevin", 1.1, 1.0, 1, 50);
  add("lstep_4", "lstep", 1.0, 0.0, 4, 50);
  add("hmc", "hmc", 1.2, 0.0, 5, 50);
  add("pcn", "pcn", 1.0, 0.0, 1, 50);

  std::vector<CheckResult> out;
  std::uint64_t seed = 7;
  for (const auto& c : cases) {
    TargetSpec ts;
    ts.dim = c.dim;
    ts.kappa = 0.0;
    ts.shift = ShiftLaw::random;
    ts.seed = seed;
    const BuiltTarget target = build_target(ts);
    CheckResult acc{c.name + "_acceptance", false, 0.0, 0.0, {}};
    CheckResult jump{c.name + "_mean_jump", false, 0.0, 0.0, {}};
    try {
      const BuiltProposal bp = build_proposal(*target.reference, c.proposal, ts.kappa);
      const TheorySummary s = summarize(*target.reference, bp);
      ChainConfig cfg;
      cfg.n_steps = opt.chain_steps;
      cfg.seed = derive_seed(seed, 1);
      const ChainDiagnostics d = run_chain(*target.reference, bp, cfg);
      acc.measured = std::abs(d.acceptance_rate - s.expected_acceptance);
      acc.tolerance = opt.tolerance_scale * 4.0 * d.acceptance_stderr;
      acc.passed = acc.measured <= acc.tolerance;
      acc.detail = "empirical " + format_double(d.acceptance_rate) + " predicted " +
                   format_double(s.expected_acceptance);
      const double pj = s.mean_predicted_jump();
      jump.measured = std::abs(d.mean_jump_sq - pj) / pj;
      jump.tolerance = opt.tolerance_scale * 4.0 * d.mean_jump_sq_stderr / pj;
      jump.passed = jump.measured <= jump.tolerance;
      jump.detail = "relative; empirical " + format_double(d.mean_jump_sq) + " predicted " +
                    format_double(pj);
    } catch (const std::exception& e) {
      acc.detail = jump.detail = e.what();
    }
    out.push_back(acc);
    if (c.proposal.family != "pcn") out.push_back(jump);
    ++seed;
  }
  return out;
}

std::vector<CheckResult> figures_suite(const VerifyOptions& opt) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::lstep_efficiency;
  cfg.sweeps.push_back({"t", {0, 1, 2, 4, 8}});
  std::vector<double> Ls;
  for (int L = 1; L <= 16; ++L) Ls.push_back(L);
  cfg.sweeps.push_back({"L", Ls});
  cfg.threads = 1;
  const std::vector<ResultRow> rows = cmd_predict(cfg);
  if (!opt.out_path.empty()) write_file_atomic(opt.out_path, format_csv(rows, cfg.jump_directions));

  const auto cols = config_columns();
  const auto col = [&](const char* name) {
    return std::find(cols.begin(), cols.end(), name) - cols.begin();
  };
  const auto t_col = col("t_phi_cost");
  const auto L_col = col("L");
  std::map<double, std::pair<int, double>> best;
  for (const auto& r : rows) {
    const double t = std::stod(r.config[t_col]);
    const int L = std::stoi(r.config[L_col]);
    auto it = best.find(t);
    if (it == best.end() || r.efficiency > it->second.second) best[t] = {L, r.efficiency};
  }
  std::vector<CheckResult> out;
  for (const auto& [t, b] : best) {
    const double c = optimal_L_continuous(t);
    const int lo = static_cast<int>(std::floor(c));
    const int hi = lo + 1;
    const int expected = lstep_efficiency(hi, t) > lstep_efficiency(lo, t) ? hi : lo;
    std::ostringstream name;
    name << "efficiency_argmax_t" << t;
    out.push_back({name.str(), b.first == expected, static_cast<double>(b.first), 0.0,
                   "table argmax " + std::to_string(b.first) + ", continuous optimum " +
                       format_double(c) + ", rounded best " + std::to_string(expected)});
  }
  return out;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::format() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "PASS " : "FAIL ") << suite << '/' << c.name
       << " measured=" << format_double(c.measured) << " tolerance=" << format_double(c.tolerance)
       << " (" << c.detail << ")\n";
  const auto n_pass = std::count_if(checks.begin(), checks.end(), [](auto& c) { return c.passed; });
  os << suite << ": " << n_pass << '/' << checks.size() << " checks passed\n";
  return os.str();
}

VerifyReport cmd_verify(const std::string& suite, const VerifyOptions& options) {
  VerifyReport r{suite, {}};
  if (suite == "identities") r.checks = identities_suite();
  else if (suite == "theory_vs_mc") r.checks = theory_vs_mc_suite(options);
  else if (suite == "figures") r.checks = figures_suite(options);
  else throw ConfigError("unknown verify suite: " + suite);
  return r;
}

MatrixXd random_spd(int d, double lo, double hi, Rng& rng) {
  const MatrixXd Q = random_orthogonal(d, rng());
  VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = uniform(rng, lo, hi);
  MatrixXd s = Q * ev.asDiagonal() * Q.transpose();
  return 0.5 * (s + s.transpose());
}

Ar1Proposal random_convergent_ar1(int d, Rng& rng) {
  const MatrixXd W = normal_matrix(d, d, rng);
  const MatrixXd G = W * (uniform(rng, 0.3, 0.95) / spectral_radius(W));
  const MatrixXd B = normal_matrix(d, d, rng);
  MatrixXd Sigma = B * B.transpose() / d + 0.5 * MatrixXd::Identity(d, d);
  Sigma = 0.5 * (Sigma + Sigma.transpose());
  return Ar1Proposal::dense(G, normal_vector(d, rng), Sigma);
}

Ar1Proposal random_symmetrizable_ar1(int d, Rng& rng) {
  const MatrixXd S = random_spd(d, 0.5, 2.0, rng);
  const MatrixXd Q = random_orthogonal(d, rng());
  VectorXd k(d);
  for (int i = 0; i < d; ++i) k[i] = uniform(rng, -0.9, 0.9);
  const MatrixXd K = Q * k.asDiagonal() * Q.transpose();
  const MatrixXd G = sym_power(S, 0.5) * K * sym_power(S, -0.5);
  return Ar1Proposal::dense(G, normal_vector(d, rng), S);
}

GaussianTarget random_gaussian_target(int d, Rng& rng) {
  VectorXd ev(d);
  for (int i = 0; i < d; ++i) ev[i] = uniform(rng, 0.2, 5.0);
  auto spectrum =
      std::make_shared<SpdSpectrum>(SpdSpectrum::from_parts(ev, random_orthogonal(d, rng())));
  return GaussianTarget(std::move(spectrum), normal_vector(d, rng));
}

}  // namespace mhsplit
