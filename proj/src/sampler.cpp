#include "mhsplit/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace mhsplit {
namespace {

/// Running sums over kept transitions plus batch means for standard errors.
class ChainStats {
 public:
  ChainStats(int d, long kept, int n_batches, bool record)
      : d_(d), record_(record) {
    nb_ = static_cast<int>(std::max<long>(1, std::min<long>(n_batches, kept)));
    batch_size_ = std::max<long>(1, kept / nb_);
    sum_pre_ = VectorXd::Zero(d);
    sum_pre2_ = VectorXd::Zero(d);
    sum_post_ = VectorXd::Zero(d);
    sum_post2_ = VectorXd::Zero(d);
    sum_cross_ = VectorXd::Zero(d);
    sum_jump_ = VectorXd::Zero(d);
    batch_jump_ = MatrixXd::Zero(d, nb_);
    batch_acc_.assign(nb_, 0.0);
    if (record_) {
      z_trace_.reserve(kept);
      accept_trace_.reserve(kept);
    }
  }

  void add(const VectorXd& pre, const VectorXd& post, bool accepted, double z) {
    const long batch = n_ / batch_size_;
    sum_pre_ += pre;
    sum_pre2_ += pre.cwiseAbs2();
    sum_post_ += post;
    sum_post2_ += post.cwiseAbs2();
    sum_cross_ += pre.cwiseProduct(post);
    if (accepted) {
      const VectorXd jump = (post - pre).cwiseAbs2();
      sum_jump_ += jump;
      if (batch < nb_) {
        batch_jump_.col(batch) += jump;
        batch_acc_[batch] += 1.0;
      }
      ++accepted_;
    }
    z_sum_ += z;
    z_sum2_ += z * z;
    if (record_) {
      z_trace_.push_back(z);
      accept_trace_.push_back(accepted ? 1 : 0);
    }
    ++n_;
  }

  void finish(ChainDiagnostics& out) {
    const double n = static_cast<double>(std::max<long>(n_, 1));
    out.kept = n_;
    out.accepted = accepted_;
    out.acceptance_rate = accepted_ / n;
    out.jump_sq = sum_jump_ / n;
    out.mean_jump_sq = out.jump_sq.mean();
    const double bs = static_cast<double>(batch_size_);
    const int nb = static_cast<int>(std::min<long>(nb_, n_ / batch_size_));
    out.jump_sq_stderr = VectorXd::Zero(d_);
    if (nb >= 2) {
      double acc_mean = 0.0, acc_m2 = 0.0, mj_mean = 0.0, mj_m2 = 0.0;
      VectorXd jm = VectorXd::Zero(d_), jm2 = VectorXd::Zero(d_);
      for (int k = 0; k < nb; ++k) {
        const double a = batch_acc_[k] / bs;
        acc_mean += a;
        acc_m2 += a * a;
        const VectorXd j = batch_jump_.col(k) / bs;
        jm += j;
        jm2 += j.cwiseAbs2();
        const double mj = j.mean();
        mj_mean += mj;
        mj_m2 += mj * mj;
      }
      const double K = nb;
      auto se = [K](double s, double s2) {
        const double var = std::max(0.0, (s2 - s * s / K) / (K - 1.0));
        return std::sqrt(var / K);
      };
      out.acceptance_stderr = se(acc_mean, acc_m2);
      out.mean_jump_sq_stderr = se(mj_mean, mj_m2);
      for (int i = 0; i < d_; ++i) out.jump_sq_stderr[i] = se(jm[i], jm2[i]);
    }
    const VectorXd mean_pre = sum_pre_ / n;
    const VectorXd mean_post = sum_post_ / n;
    const VectorXd var_pre = (sum_pre2_ / n - mean_pre.cwiseAbs2()).cwiseMax(0.0);
    const VectorXd var_post = (sum_post2_ / n - mean_post.cwiseAbs2()).cwiseMax(0.0);
    out.sample_mean = mean_post;
    out.sample_cov_diag = var_post;
    out.lag1_corr.resize(d_);
    for (int i = 0; i < d_; ++i) {
      const double cov = sum_cross_[i] / n - mean_pre[i] * mean_post[i];
      const double den = std::sqrt(var_pre[i] * var_post[i]);
      out.lag1_corr[i] = den > 0.0 ? cov / den : 1.0;
    }
    out.z_mean = z_sum_ / n;
    out.z_var = std::max(0.0, z_sum2_ / n - out.z_mean * out.z_mean);
    out.z_trace = std::move(z_trace_);
    out.accept_trace = std::move(accept_trace_);
  }

 private:
  int d_;
  bool record_;
  int nb_ = 1;
  long batch_size_ = 1;
  long n_ = 0;
  long accepted_ = 0;
  VectorXd sum_pre_, sum_pre2_, sum_post_, sum_post2_, sum_cross_, sum_jump_;
  MatrixXd batch_jump_;
  std::vector<double> batch_acc_;
  double z_sum_ = 0.0;
  double z_sum2_ = 0.0;
  std::vector<double> z_trace_;
  std::vector<char> accept_trace_;
};

bool same_basis(const SpectrumPtr& a, const SpectrumPtr& b) { return a.get() == b.get(); }

MatrixXd symmetric_sqrt(const MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()));
  const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// Draws a start state by resampling reference draws with weights exp(-phi).
VectorXd importance_resample(const GaussianTarget& ref, const Phi* phi, int candidates,
                             Rng& rng) {
  const int n = std::max(1, candidates);
  std::vector<VectorXd> xs;
  std::vector<double> logw;
  xs.reserve(n);
  logw.reserve(n);
  for (int k = 0; k < n; ++k) {
    xs.push_back(exact_gaussian_sample(ref, rng));
    logw.push_back(phi ? -(*phi)(xs.back()) : 0.0);
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) total += (w = std::exp(w - mx));
  double u = uniform_open(rng) * total;
  for (int k = 0; k < n; ++k) {
    u -= logw[k];
    if (u <= 0.0) return xs[k];
  }
  return xs.back();
}

VectorXd initial_state(const GaussianTarget& ref, const Phi* phi, const ChainConfig& cfg,
                       Rng& rng) {
  switch (cfg.init) {
    case InitKind::exact_equilibrium:
      if (phi && !phi->is_zero())
        throw InvalidArgument("exact_equilibrium start is only available for Gaussian targets");
      return exact_gaussian_sample(ref, rng);
    case InitKind::given:
      if (cfg.init_state.size() != ref.dim()) throw InvalidArgument("init_state has wrong dimension");
      return cfg.init_state;
    case InitKind::importance_resample:
      return importance_resample(ref, phi, cfg.importance_candidates, rng);
  }
  throw InvalidArgument("unknown init kind");
}

ChainDiagnostics run_spectral(const GaussianTarget& ref, const Phi* phi, const BuiltProposal& bp,
                              const ChainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& sp = bp.proposal.spectral_form();
  const auto& ss = bp.splitting.spectral_form();
  const SpdSpectrum& basis = ref.spectrum();
  const int d = ref.dim();
  const VectorXd& a = basis.eigenvalues();
  const VectorXd& bh = ref.shift_eigen();
  const VectorXd c = a - ss.calA;
  const VectorXd e = bh - ss.beta;
  const VectorXd root = sp.Sigma.cwiseSqrt();
  VectorXd inv_sigma(d);
  for (int i = 0; i < d; ++i) inv_sigma[i] = sp.Sigma[i] > 0.0 ? 1.0 / sp.Sigma[i] : 0.0;
  const bool use_phi = phi && !phi->is_zero();

  const long burn = cfg.effective_burn_in();
  Rng rng(cfg.seed);
  VectorXd z = basis.to_eigen(initial_state(ref, phi, cfg, rng));
  VectorXd y(d), xi(d);
  double phi_z = use_phi ? (*phi)(basis.from_eigen(z)) : 0.0;
  ChainStats stats(d, cfg.n_steps - burn, cfg.n_batches, cfg.record_trace);

  for (long t = 0; t < cfg.n_steps; ++t) {
    fill_standard_normal(rng, xi);
    y = sp.G.cwiseProduct(z) + sp.g + root.cwiseProduct(xi);
    double Z = 0.0;
    switch (cfg.accept_path) {
      case AcceptPath::gaussian_closed_form:
        for (int i = 0; i < d; ++i)
          Z += -0.5 * c[i] * (y[i] * y[i] - z[i] * z[i]) + e[i] * (y[i] - z[i]);
        break;
      case AcceptPath::surrogate:
        for (int i = 0; i < d; ++i) {
          const double ref_part = -0.5 * a[i] * (y[i] * y[i] - z[i] * z[i]) + bh[i] * (y[i] - z[i]);
          const double lim_part =
              -0.5 * ss.calA[i] * (z[i] * z[i] - y[i] * y[i]) + ss.beta[i] * (z[i] - y[i]);
          Z += ref_part + lim_part;
        }
        break;
      case AcceptPath::general_density:
        for (int i = 0; i < d; ++i) {
          Z += -0.5 * a[i] * (y[i] * y[i] - z[i] * z[i]) + bh[i] * (y[i] - z[i]);
          const double back = z[i] - sp.G[i] * y[i] - sp.g[i];
          const double fwd = y[i] - sp.G[i] * z[i] - sp.g[i];
          Z += -0.5 * inv_sigma[i] * (back * back - fwd * fwd);
        }
        break;
    }
    double phi_y = 0.0;
    if (use_phi) {
      phi_y = (*phi)(basis.from_eigen(y));
      Z += phi_z - phi_y;
    }
    const double log_u = std::log(uniform_open(rng));
    const bool accept = cfg.mode == ChainMode::unadjusted || log_u < Z;
    if (t >= burn) stats.add(z, accept ? y : z, accept, Z);
    if (accept) {
      z.swap(y);
      phi_z = phi_y;
    }
  }

  ChainDiagnostics out;
  out.n_steps = cfg.n_steps;
  out.burn_in = burn;
  out.spectral_path = true;
  stats.finish(out);
  out.matvec_count = cfg.n_steps * bp.matvecs_per_step;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ChainDiagnostics run_dense(const GaussianTarget& ref, const Phi* phi, const BuiltProposal& bp,
                           const ChainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int d = ref.dim();
  const MatrixXd G = bp.proposal.G();
  const VectorXd g = bp.proposal.g();
  const MatrixXd Sigma = bp.proposal.Sigma();
  const MatrixXd S = symmetric_sqrt(Sigma);
  const MatrixXd& A = ref.precision();
  const VectorXd& b = ref.shift();
  const MatrixXd Qt = ref.spectrum().basis().transpose();
  const bool use_phi = phi && !phi->is_zero();
  if (cfg.noise_transform && (cfg.noise_transform->rows() != d || cfg.noise_transform->cols() != d))
    throw InvalidArgument("noise_transform has wrong dimension");

  MatrixXd C, Sinv, calA;
  VectorXd e, beta;
  switch (cfg.accept_path) {
    case AcceptPath::gaussian_closed_form:
      if (!bp.splitting.is_symmetric())
        throw NotSymmetric("closed-form acceptance needs a symmetric splitting");
      C = A - bp.splitting.calA();
      e = b - bp.splitting.beta();
      break;
    case AcceptPath::general_density: {
      Eigen::LLT<MatrixXd> llt(Sigma);
      if (llt.info() != Eigen::Success) throw NotSpd("proposal covariance is singular");
      Sinv = llt.solve(MatrixXd::Identity(d, d));
      break;
    }
    case AcceptPath::surrogate: {
      const ProposalLimit lim = proposal_limit(bp.splitting);
      calA = lim.precision;
      beta = lim.precision * lim.mean;
      break;
    }
  }

  const long burn = cfg.effective_burn_in();
  Rng rng(cfg.seed);
  VectorXd x = initial_state(ref, phi, cfg, rng);
  VectorXd y(d), xi(d), px = Qt * x, py(d);
  double phi_x = use_phi ? (*phi)(x) : 0.0;
  ChainStats stats(d, cfg.n_steps - burn, cfg.n_batches, cfg.record_trace);

  for (long t = 0; t < cfg.n_steps; ++t) {
    fill_standard_normal(rng, xi);
    if (cfg.noise_transform) xi = (*cfg.noise_transform) * xi;
    y = G * x + g + S * xi;
    double Z = 0.0;
    switch (cfg.accept_path) {
      case AcceptPath::gaussian_closed_form:
        Z = -0.5 * y.dot(C * y) + 0.5 * x.dot(C * x) + e.dot(y - x);
        break;
      case AcceptPath::surrogate:
        Z = ref.log_density(y) - ref.log_density(x) + (-0.5 * x.dot(calA * x) + beta.dot(x)) -
            (-0.5 * y.dot(calA * y) + beta.dot(y));
        break;
      case AcceptPath::general_density: {
        const VectorXd back = x - G * y - g;
        const VectorXd fwd = y - G * x - g;
        Z = ref.log_density(y) - ref.log_density(x) - 0.5 * back.dot(Sinv * back) +
            0.5 * fwd.dot(Sinv * fwd);
        break;
      }
    }
    double phi_y = 0.0;
    if (use_phi) {
      phi_y = (*phi)(y);
      Z += phi_x - phi_y;
    }
    const double log_u = std::log(uniform_open(rng));
    const bool accept = cfg.mode == ChainMode::unadjusted || log_u < Z;
    if (t >= burn || accept) py = Qt * y;
    if (t >= burn) stats.add(px, accept ? py : px, accept, Z);
    if (accept) {
      x.swap(y);
      px.swap(py);
      phi_x = phi_y;
    }
  }

  ChainDiagnostics out;
  out.n_steps = cfg.n_steps;
  out.burn_in = burn;
  out.spectral_path = false;
  stats.finish(out);
  out.matvec_count = cfg.n_steps * bp.matvecs_per_step;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ChainDiagnostics run_any(const GaussianTarget& ref, const Phi* phi, const BuiltProposal& bp,
                         const ChainConfig& cfg) {
  if (bp.proposal.dim() != ref.dim()) throw InvalidArgument("run_chain: dimension mismatch");
  if (cfg.n_steps < 1) throw InvalidArgument("run_chain: n_steps must be positive");
  const bool spectral = !cfg.force_dense && !cfg.noise_transform &&
                        bp.proposal.has_spectral_form() && bp.splitting.has_spectral_form() &&
                        same_basis(bp.proposal.spectral_form().basis, ref.spectrum_ptr()) &&
                        same_basis(bp.splitting.spectral_form().basis, ref.spectrum_ptr());
  return spectral ? run_spectral(ref, phi, bp, cfg) : run_dense(ref, phi, bp, cfg);
}

}  // namespace

long ChainConfig::effective_burn_in() const {
  const long b = burn_in ? *burn_in : (init == InitKind::exact_equilibrium ? 0 : n_steps / 10);
  if (b < 0 || b >= n_steps) throw InvalidArgument("burn_in must satisfy 0 <= burn_in < n_steps");
  return b;
}

double log_accept_gaussian(const MatrixSplitting& s, const GaussianTarget& target,
                           const VectorXd& x, const VectorXd& y) {
  if (!s.is_symmetric()) throw NotSymmetric("closed-form acceptance needs a symmetric splitting");
  if (s.has_spectral_form() && same_basis(s.spectral_form().basis, target.spectrum_ptr())) {
    const auto& sp = s.spectral_form();
    const SpdSpectrum& basis = target.spectrum();
    const VectorXd zx = basis.to_eigen(x);
    const VectorXd zy = basis.to_eigen(y);
    const VectorXd c = basis.eigenvalues() - sp.calA;
    const VectorXd e = target.shift_eigen() - sp.beta;
    return -0.5 * zy.cwiseAbs2().dot(c) + 0.5 * zx.cwiseAbs2().dot(c) + e.dot(zy - zx);
  }
  const MatrixXd C = target.precision() - s.calA();
  const VectorXd e = target.shift() - s.beta();
  return -0.5 * y.dot(C * y) + 0.5 * x.dot(C * x) + e.dot(y - x);
}

double log_accept_general(const MatrixSplitting& s, const ChangeOfMeasureTarget& target,
                          const VectorXd& x, const VectorXd& y) {
  return target.phi()(x) - target.phi()(y) + log_accept_gaussian(s, target.reference(), x, y);
}

double log_transition_density(const Ar1Proposal& p, const VectorXd& x, const VectorXd& y) {
  if (p.has_spectral_form()) {
    const auto& s = p.spectral_form();
    const VectorXd r = s.basis->to_eigen(y) - s.G.cwiseProduct(s.basis->to_eigen(x)) - s.g;
    double out = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (s.Sigma[i] > 0.0) out += -0.5 * r[i] * r[i] / s.Sigma[i];
    return out;
  }
  const VectorXd r = y - p.G() * x - p.g();
  Eigen::LLT<MatrixXd> llt(p.Sigma());
  return -0.5 * r.dot(llt.solve(r));
}

double log_accept_density(const Ar1Proposal& p, const ChangeOfMeasureTarget& target,
                          const VectorXd& x, const VectorXd& y) {
  return target.log_density(y) + log_transition_density(p, y, x) - target.log_density(x) -
         log_transition_density(p, x, y);
}

double log_accept_surrogate(const ChangeOfMeasureTarget& target, const ProposalLimit& limit,
                            const VectorXd& x, const VectorXd& y) {
  return target.log_density(y) - target.log_density(x) + limit.log_density(x) -
         limit.log_density(y);
}

double log_accept_lstep_sla(const ChangeOfMeasureTarget& target, double h, const VectorXd& x,
                            const VectorXd& y) {
  const MatrixXd& A = target.reference().precision();
  const VectorXd& b = target.reference().shift();
  const VectorXd Ax = A * x;
  const VectorXd Ay = A * y;
  return h / 8.0 * (Ax.squaredNorm() - Ay.squaredNorm()) - h / 4.0 * b.dot(Ax - Ay) +
         target.phi()(x) - target.phi()(y);
}

ChainDiagnostics run_chain(const GaussianTarget& target, const BuiltProposal& proposal,
                           const ChainConfig& config) {
  return run_any(target, nullptr, proposal, config);
}

ChainDiagnostics run_chain(const ChangeOfMeasureTarget& target, const BuiltProposal& proposal,
                           const ChainConfig& config) {
  return run_any(target.reference(), &target.phi(), proposal, config);
}

KappaGamma estimate_kappa_gamma(const ChangeOfMeasureTarget& target, long n, Rng& rng) {
  if (n < 2) throw InvalidArgument("estimate_kappa_gamma: need n >= 2");
  const GaussianTarget& ref = target.reference();
  const SpdSpectrum& basis = ref.spectrum();
  const int d = ref.dim();
  const VectorXd lam = basis.eigenvalues().cwiseSqrt();
  MatrixXd xis(d, n);
  std::vector<double> logw(n);
  VectorXd xi(d);
  for (long k = 0; k < n; ++k) {
    fill_standard_normal(rng, xi);
    xis.col(k) = xi;
    const VectorXd z = ref.mean_eigen() + xi.cwiseQuotient(lam);
    logw[k] = -target.phi()(basis.from_eigen(z));
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  VectorXd w(n);
  for (long k = 0; k < n; ++k) w[k] = std::exp(logw[k] - mx);
  const double sw = w.sum();
  const double ess = sw * sw / w.squaredNorm();
  if (ess < 0.01 * n) throw DegenerateWeights(ess, "importance weights are degenerate");
  const VectorXd wn = w / sw;
  KappaGamma out;
  out.ess = ess;
  out.kappa = xis * wn;
  out.gamma = xis.cwiseAbs2() * wn;
  out.kappa_stderr.resize(d);
  out.gamma_stderr.resize(d);
  for (int i = 0; i < d; ++i) {
    const auto dk = (xis.row(i).array() - out.kappa[i]).matrix();
    const auto dg = (xis.row(i).array().square() - out.gamma[i]).matrix();
    out.kappa_stderr[i] = std::sqrt((wn.array().square() * dk.transpose().array().square()).sum());
    out.gamma_stderr[i] = std::sqrt((wn.array().square() * dg.transpose().array().square()).sum());
  }
  return out;
}

}  // namespace mhsplit
