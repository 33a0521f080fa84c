#include "mhsplit/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace mhsplit {
namespace {

constexpr double kTailCutoff = -30.0;

double sq(double x) { return x * x; }

}  // namespace

double ModeTerms::mode_mean(int i) const { return T[0][i] + T[3][i] + T[4][i]; }

double ModeTerms::mode_variance(int i) const {
  return sq(T[1][i]) + sq(T[2][i]) + 2.0 * sq(T[3][i]) + 2.0 * sq(T[4][i]) + sq(T[5][i]);
}

ModeTerms mode_terms(const VectorXd& a, const VectorXd& G, const VectorXd& calA,
                     const VectorXd& m, const VectorXd& m_tilde) {
  const auto d = a.size();
  if (G.size() != d || calA.size() != d || m.size() != d || m_tilde.size() != d)
    throw InvalidArgument("mode_terms: dimension mismatch");
  ModeTerms t;
  t.lambda = a.cwiseSqrt();
  t.tilde_lambda = calA.cwiseSqrt();
  t.G = G;
  t.m = m;
  t.m_tilde = m_tilde;
  t.g_tilde.resize(d);
  t.g.resize(d);
  t.r.resize(d);
  t.r_tilde.resize(d);
  t.r_hat.resize(d);
  for (auto& v : t.T) v.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = t.lambda[i];
    const double Gi = G[i];
    const double gt = 1.0 - Gi;
    const double gg = 1.0 - Gi * Gi;
    const double r = (a[i] - calA[i]) / a[i];
    const double rt = a[i] / calA[i];
    const double rh = m[i] - m_tilde[i];
    const double root = std::sqrt(rt * gg);
    t.g_tilde[i] = gt;
    t.g[i] = gg;
    t.r[i] = r;
    t.r_tilde[i] = rt;
    t.r_hat[i] = rh;
    t.T[0][i] = rh * rh * a[i] * (0.5 * r * gg - gt);
    t.T[1][i] = rh * lam * (r * gg - gt);
    t.T[2][i] = rh * lam * root * (1.0 - r * Gi);
    t.T[3][i] = 0.5 * r * gg;
    t.T[4][i] = -0.5 * r * rt * gg;
    t.T[5][i] = -r * Gi * root;
  }
  return t;
}

ModeTerms mode_terms(const GaussianTarget& target, const BuiltProposal& proposal) {
  if (!proposal.theory_available || !proposal.proposal.has_spectral_form() ||
      !proposal.splitting.has_spectral_form())
    throw TheoryUnavailable("proposal matrices are not functions of the target precision");
  const auto& p = proposal.proposal.spectral_form();
  const auto& s = proposal.splitting.spectral_form();
  if (p.basis.get() != target.spectrum_ptr().get())
    throw TheoryUnavailable("proposal is expressed in a different eigenbasis");
  return mode_terms(target.spectrum().eigenvalues(), p.G, s.calA, target.mean_eigen(),
                    s.beta.cwiseQuotient(s.calA));
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double log_normal_cdf(double t) {
  if (t > kTailCutoff) return std::log(normal_cdf(t));
  // Mills-ratio series: Phi(t) = phi(t) / |t| (1 - 1/t^2 + 3/t^4 - 15/t^6 + ...).
  const double z = 1.0 / (t * t);
  const double series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - 105.0 * z)));
  return -0.5 * t * t - std::log(-t) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double expected_acceptance(double mu, double sigma) {
  if (!(sigma >= 0.0)) throw InvalidArgument("expected_acceptance: sigma must be >= 0");
  if (sigma == 0.0) return std::min(1.0, std::exp(mu));
  const double first = normal_cdf(mu / sigma);
  const double log_second = mu + 0.5 * sigma * sigma + log_normal_cdf(-sigma - mu / sigma);
  const double value = first + std::exp(log_second);
  return std::clamp(value, 0.0, 1.0);
}

JumpPrediction jump_size_prediction(int i, const ModeTerms& t, double mu_minus,
                                    double sigma_minus) {
  if (i < 0 || i >= t.dim()) throw InvalidArgument("jump_size_prediction: mode out of range");
  const double gt2 = sq(t.g_tilde[i]);
  const double rh2 = sq(t.r_hat[i]);
  const double a = sq(t.lambda[i]);
  JumpPrediction j;
  j.U1 = gt2 * rh2 + gt2 / a + t.g[i] / sq(t.tilde_lambda[i]);
  j.U2 = expected_acceptance(mu_minus, sigma_minus);
  const double inner = gt2 + t.r_tilde[i] * t.g[i];
  const double fourth = gt2 * gt2 * rh2 * rh2 + 3.0 / (a * a) * inner * inner +
                        6.0 / a * rh2 * gt2 * inner;
  const double mi = t.mode_mean(i);
  j.U3 = std::sqrt(t.mode_variance(i) + mi * mi) * std::sqrt(fourth);
  return j;
}

std::array<double, 5> lyapunov_diagnostic(const ModeTerms& t, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("lyapunov_diagnostic: delta must be > 0");
  std::array<double, 5> out{};
  for (int j = 1; j <= 5; ++j) {
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < t.dim(); ++i) {
      const double v = std::abs(t.T[j][i]);
      num += std::pow(v, 2.0 + delta);
      den += v * v;
    }
    out[j - 1] = den > 0.0 ? num / std::pow(den, 1.0 + 0.5 * delta) : 0.0;
  }
  return out;
}

TheorySummary summarize(ModeTerms terms) {
  TheorySummary s;
  const int d = terms.dim();
  s.mu_i.resize(d);
  s.sigma2_i.resize(d);
  for (int i = 0; i < d; ++i) {
    s.mu_i[i] = terms.mode_mean(i);
    s.sigma2_i[i] = terms.mode_variance(i);
  }
  s.mu = s.mu_i.sum();
  s.sigma2 = s.sigma2_i.sum();
  s.expected_acceptance = expected_acceptance(s.mu, std::sqrt(s.sigma2));
  s.U1.resize(d);
  s.U2.resize(d);
  s.U3.resize(d);
  for (int i = 0; i < d; ++i) {
    const double mu_minus = s.mu - s.mu_i[i];
    const double sigma_minus = std::sqrt(std::max(0.0, s.sigma2 - s.sigma2_i[i]));
    const JumpPrediction j = jump_size_prediction(i, terms, mu_minus, sigma_minus);
    s.U1[i] = j.U1;
    s.U2[i] = j.U2;
    s.U3[i] = j.U3;
  }
  s.lyapunov_ratios = lyapunov_diagnostic(terms);
  s.terms = std::move(terms);
  return s;
}

TheorySummary summarize(const GaussianTarget& target, const BuiltProposal& proposal) {
  return summarize(mode_terms(target, proposal));
}

LimitPrediction sla_limit(double l, double tau) {
  if (!(l > 0.0) || !(tau >= 0.0)) throw InvalidArgument("sla_limit: need l > 0, tau >= 0");
  const double a = 2.0 * normal_cdf(-l * l * l * std::sqrt(tau) / 8.0);
  return {a, a};
}

double genlang_limit(double l, double tau, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("genlang_limit: theta in [0, 1]");
  return 2.0 * normal_cdf(-l * l * l * std::abs(theta - 0.5) * std::sqrt(tau) / 4.0);
}

LimitPrediction lstep_limit(double l, double tau, int L) {
  if (L < 1) throw InvalidArgument("lstep_limit: L must be >= 1");
  const double a = 2.0 * normal_cdf(-l * l * l * std::sqrt(L * tau) / 8.0);
  return {a, L * a};
}

HmcLimit hmc_limit(double l, double tau, const VectorXd& eigenvalues, double T_prime) {
  HmcLimit out;
  out.acceptance = 2.0 * normal_cdf(-l * l * std::sqrt(tau) / 8.0);
  out.jump.resize(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = std::sqrt(eigenvalues[i]);
    out.jump[i] = 2.0 * (1.0 - std::cos(lam * T_prime)) / eigenvalues[i] * out.acceptance;
  }
  return out;
}

double tuning_objective(TuningFamily family, double s) {
  if (family == TuningFamily::langevin) return s * s * normal_cdf(-s * s * s);
  return std::sqrt(s) * normal_cdf(-s);
}

OptimalTuning optimal_tuning(TuningFamily family) {
  auto neg = [family](double s) { return -tuning_objective(family, s); };
  const auto [s0, fmin] =
      boost::math::tools::brent_find_minima(neg, 1e-3, 3.0, std::numeric_limits<double>::digits / 2);
  OptimalTuning t;
  t.family = family;
  t.s0 = s0;
  t.objective = -fmin;
  if (family == TuningFamily::langevin) {
    t.acceptance = 2.0 * normal_cdf(-s0 * s0 * s0);
    t.reference_s0 = 0.8252;
    t.reference_acceptance = 0.574;
    t.reference_s0_acceptance = 2.0 * normal_cdf(-std::pow(0.8252, 3));
  } else {
    t.acceptance = 2.0 * normal_cdf(-s0);
    t.reference_s0 = 0.4250;
    t.reference_acceptance = 0.651;
    t.reference_s0_acceptance = 2.0 * normal_cdf(-0.4250);
  }
  return t;
}

double lstep_efficiency(int L, double t) {
  if (L < 1 || !(t >= 0.0)) throw InvalidArgument("lstep_efficiency: need L >= 1, t >= 0");
  return std::pow(static_cast<double>(L), 2.0 / 3.0) / (1.426 + 0.426 * t + L);
}

double optimal_L_continuous(double t) { return 2.0 * (1.426 + 0.426 * t); }

int optimal_L(double t, int max_L) {
  int best = 1;
  for (int L = 2; L <= max_L; ++L)
    if (lstep_efficiency(L, t) > lstep_efficiency(best, t)) best = L;
  return best;
}

NongaussianMoments nongaussian_moments(const TheorySummary& s, const VectorXd& kappa,
                                       const VectorXd& gamma) {
  const int d = s.terms.dim();
  if (kappa.size() != d || gamma.size() != d)
    throw InvalidArgument("nongaussian_moments: dimension mismatch");
  NongaussianMoments out{s.mu, s.sigma2};
  for (int i = 0; i < d; ++i) {
    const double c = kappa[i] * s.terms.T[1][i] + s.terms.T[3][i] * (gamma[i] - 1.0);
    out.mu += c;
    out.sigma2 += c * c;
  }
  return out;
}

Interval nongaussian_jump_bracket(int i, const ModeTerms& t, double gamma_i,
                                  double acceptance) {
  if (i < 0 || i >= t.dim()) throw InvalidArgument("nongaussian_jump_bracket: mode out of range");
  const double gt2 = sq(t.g_tilde[i]);
  const double center = (gt2 * sq(t.r_hat[i]) + t.g[i] / sq(t.tilde_lambda[i])) * acceptance;
  const double u = 2.0 * std::abs(t.r_hat[i]) * gt2 * std::sqrt(gamma_i) / t.lambda[i];
  const double v = gt2 * gamma_i / sq(t.lambda[i]);
  return {center - u, center + u + v};
}

}  // namespace mhsplit
