#pragma once

#include <array>
#include <string>

#include "mhsplit/model.hpp"
#include "mhsplit/proposals.hpp"

namespace mhsplit {

/// Per-mode quantities of an AR(1) proposal whose matrices are functions of A.
///
/// lambda_i^2 and tilde_lambda_i^2 are the eigenvalues of A and calA; m and
/// m_tilde are the target and proposal-limit means in the eigenbasis.
struct ModeTerms {
  VectorXd lambda;
  VectorXd tilde_lambda;
  VectorXd G;
  VectorXd g_tilde;  // 1 - G
  VectorXd g;        // 1 - G^2
  VectorXd m;
  VectorXd m_tilde;
  VectorXd r;
  VectorXd r_tilde;
  VectorXd r_hat;
  std::array<VectorXd, 6> T;

  int dim() const { return static_cast<int>(lambda.size()); }
  /// E[Z_i] = T0 + T3 + T4.
  double mode_mean(int i) const;
  /// Var[Z_i] = T1^2 + T2^2 + 2 T3^2 + 2 T4^2 + T5^2.
  double mode_variance(int i) const;
};

ModeTerms mode_terms(const VectorXd& a_eigenvalues, const VectorXd& G,
                     const VectorXd& calA, const VectorXd& m, const VectorXd& m_tilde);
/// Throws TheoryUnavailable unless the proposal is diagonal in the target's eigenbasis.
ModeTerms mode_terms(const GaussianTarget& target, const BuiltProposal& proposal);

double normal_cdf(double t);
double log_normal_cdf(double t);

/// E[1 ^ e^X] for X ~ N(mu, sigma^2), evaluated in log space.
double expected_acceptance(double mu, double sigma);

struct JumpPrediction {
  double U1 = 0.0;
  double U2 = 0.0;
  double U3 = 0.0;
  double predicted() const { return U1 * U2; }
};

/// Squared jump prediction in direction i; mu_minus and sigma_minus exclude mode i.
JumpPrediction jump_size_prediction(int i, const ModeTerms& terms, double mu_minus,
                                    double sigma_minus);

/// Lyapunov ratios sum |T_j|^(2+delta) / (sum T_j^2)^(1+delta/2) for j = 1..5.
std::array<double, 5> lyapunov_diagnostic(const ModeTerms& terms, double delta = 1.0);

struct TheorySummary {
  ModeTerms terms;
  VectorXd mu_i;
  VectorXd sigma2_i;
  double mu = 0.0;
  double sigma2 = 0.0;
  double expected_acceptance = 1.0;
  VectorXd U1;
  VectorXd U2;
  VectorXd U3;
  std::array<double, 5> lyapunov_ratios{};

  VectorXd predicted_jump() const { return U1.cwiseProduct(U2); }
  double mean_predicted_jump() const { return predicted_jump().mean(); }
};

TheorySummary summarize(ModeTerms terms);
TheorySummary summarize(const GaussianTarget& target, const BuiltProposal& proposal);

struct LimitPrediction {
  double acceptance = 0.0;
  /// Expected squared jump divided by h.
  double jump_per_h = 0.0;
};

/// 2 Phi(-l^3 sqrt(tau) / 8), jump 2 h Phi(...).
LimitPrediction sla_limit(double l, double tau);
/// 2 Phi(-l^3 |theta - 1/2| sqrt(tau) / 4).
double genlang_limit(double l, double tau, double theta);
/// 2 Phi(-l^3 sqrt(L tau) / 8), jump 2 L h Phi(...).
LimitPrediction lstep_limit(double l, double tau, int L);

struct HmcLimit {
  double acceptance = 0.0;
  VectorXd jump;
};

/// a(l) = 2 Phi(-l^2 sqrt(tau) / 8); jump_i = 2 (1 - cos(lambda_i T')) / lambda_i^2 a(l).
HmcLimit hmc_limit(double l, double tau_weighted, const VectorXd& eigenvalues, double T_prime);

enum class TuningFamily { langevin, hmc };

struct OptimalTuning {
  TuningFamily family = TuningFamily::langevin;
  double s0 = 0.0;
  double acceptance = 0.0;
  double objective = 0.0;
  /// Quoted reference constants. For HMC the quoted s0 and the quoted
  /// acceptance disagree, so both are carried.
  double reference_s0 = 0.0;
  double reference_acceptance = 0.0;
  double reference_s0_acceptance = 0.0;
};

/// Langevin: maximize s^2 Phi(-s^3). HMC: maximize sqrt(s) Phi(-s).
double tuning_objective(TuningFamily family, double s);
OptimalTuning optimal_tuning(TuningFamily family);

/// L^(2/3) / (1.426 + 0.426 t + L).
double lstep_efficiency(int L, double t);
/// 2 (1.426 + 0.426 t).
double optimal_L_continuous(double t);
/// Integer argmax of lstep_efficiency over 1..max_L.
int optimal_L(double t, int max_L = 64);

struct NongaussianMoments {
  double mu = 0.0;
  double sigma2 = 0.0;
};

NongaussianMoments nongaussian_moments(const TheorySummary& summary, const VectorXd& kappa,
                                       const VectorXd& gamma);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double x) const { return x >= lower && x <= upper; }
};

/// Range of the non-Gaussian squared-jump expression over u in [-1, 1], v in [0, 1].
Interval nongaussian_jump_bracket(int i, const ModeTerms& terms, double gamma_i,
                                  double acceptance);

}  // namespace mhsplit
